"""The small CNN that turns a thumbnail into the two color-map matrices.

A shared trunk of 3x3/stride-2 conv stages feeds a global average pool and
two linear heads: one emits the normalizing matrix d, the other the stylizing
matrix r (each k*k values, reshaped row-major). Heads start as zero weights
with an identity-matrix bias, so an untrained encoder decodes to the identity
map for every input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tape, Tensor
from .imaging import Thumbnail
from .mapping import ColorMapMatrix

# counts every encode(); lets callers assert that preset switching never re-encodes
_encode_calls = 0


def encode_call_count() -> int:
    return _encode_calls


def reset_encode_call_count() -> None:
    global _encode_calls
    _encode_calls = 0


@dataclass(frozen=True)
class EncoderConfig:
    k: int = 16
    thumbnail_size: int = 64
    widths: tuple[int, ...] = (16, 32, 64, 128)
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.widths:
            raise ValueError("widths must be nonempty")
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        stride_total = 2 ** len(self.widths)
        if self.thumbnail_size % stride_total != 0:
            raise ValueError(
                f"thumbnail_size {self.thumbnail_size} must be divisible by {stride_total}"
            )


@dataclass
class EncoderWeights:
    config: EncoderConfig
    conv_w: list = field(default_factory=list)   # per stage: (c_out, c_in, 3, 3)
    conv_b: list = field(default_factory=list)   # per stage: (c_out,)
    head_d_w: np.ndarray = None
    head_d_b: np.ndarray = None
    head_r_w: np.ndarray = None
    head_r_b: np.ndarray = None

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """All trainable arrays in their declared (checkpoint) order."""
        out = []
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            out.append((f"conv{i}.w", w))
            out.append((f"conv{i}.b", b))
        out.append(("head_d.w", self.head_d_w))
        out.append(("head_d.b", self.head_d_b))
        out.append(("head_r.w", self.head_r_w))
        out.append(("head_r.b", self.head_r_b))
        return out


def init_weights(config: EncoderConfig) -> EncoderWeights:
    """He-initialized trunk from the seed; heads decode to the identity matrix."""
    rng = np.random.default_rng(config.seed)
    weights = EncoderWeights(config=config)
    c_in = 3
    for c_out in config.widths:
        fan_in = c_in * 9
        std = np.sqrt(2.0 / fan_in)
        weights.conv_w.append(rng.normal(0.0, std, size=(c_out, c_in, 3, 3)).astype(np.float32))
        weights.conv_b.append(np.zeros(c_out, dtype=np.float32))
        c_in = c_out
    k2 = config.k * config.k
    ident = np.eye(config.k, dtype=np.float32).reshape(-1)
    weights.head_d_w = np.zeros((c_in, k2), dtype=np.float32)
    weights.head_d_b = ident.copy()
    weights.head_r_w = np.zeros((c_in, k2), dtype=np.float32)
    weights.head_r_b = ident.copy()
    return weights


def _check_thumbnail(thumbnail: Thumbnail, config: EncoderConfig):
    if thumbnail.height != config.thumbnail_size or thumbnail.width != config.thumbnail_size:
        raise ValueError(
            f"thumbnail is {thumbnail.height}x{thumbnail.width}, "
            f"encoder expects {config.thumbnail_size}x{config.thumbnail_size}"
        )


def forward(thumbnail_chw: Tensor, params: dict[str, Tensor], config: EncoderConfig,
            tape: Tape | None = None) -> tuple[Tensor, Tensor]:
    """Trunk + both heads on a (3, s, s) tensor; returns flat (k*k,) d and r."""
    x = ad.shift(thumbnail_chw, -0.5, tape)
    for i in range(len(config.widths)):
        x = ad.conv2d(x, params[f"conv{i}.w"], params[f"conv{i}.b"], tape)
        x = ad.relu(x, tape)
    pooled = ad.global_avg_pool(x, tape)
    d = ad.linear(pooled, params["head_d.w"], params["head_d.b"], tape)
    r = ad.linear(pooled, params["head_r.w"], params["head_r.b"], tape)
    return d, r


def as_tensors(weights: EncoderWeights, requires_grad: bool = False) -> dict[str, Tensor]:
    return {name: Tensor(arr, requires_grad=requires_grad) for name, arr in weights.parameters()}


def encode(thumbnail: Thumbnail, weights: EncoderWeights) -> tuple[ColorMapMatrix, ColorMapMatrix]:
    """Predict the (normalizing d, stylizing r) matrices for one thumbnail."""
    global _encode_calls
    _check_thumbnail(thumbnail, weights.config)
    _encode_calls += 1
    chw = Tensor(np.ascontiguousarray(thumbnail.data.transpose(2, 0, 1)))
    d, r = forward(chw, as_tensors(weights), weights.config)
    k = weights.config.k
    return (
        ColorMapMatrix(d.data.reshape(k, k)),
        ColorMapMatrix(r.data.reshape(k, k)),
    )


def encode_backward(thumbnail: Thumbnail, weights: EncoderWeights,
                    upstream_d: np.ndarray, upstream_r: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of <upstream_d, d> + <upstream_r, r> w.r.t. every weight array."""
    _check_thumbnail(thumbnail, weights.config)
    tape = Tape()
    tensors = as_tensors(weights, requires_grad=True)
    chw = Tensor(np.ascontiguousarray(thumbnail.data.transpose(2, 0, 1)))
    d, r = forward(chw, tensors, weights.config, tape)
    d.grad = np.asarray(upstream_d, dtype=d.dtype).reshape(d.shape)
    r.grad = np.asarray(upstream_r, dtype=r.dtype).reshape(r.shape)
    tape.backward()
    return {
        name: (t.grad if t.grad is not None else np.zeros_like(t.data))
        for name, t in tensors.items()
    }
