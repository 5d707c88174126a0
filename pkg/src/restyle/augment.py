"""Color-only perturbations used to synthesize training pairs.

Each perturbation is a pure per-pixel color map (parametric filter chain, a
bundled 3D LUT, or a LUT followed by a filter), so duplicated input colors stay
duplicated and image content is untouched. All randomness flows from explicit
seeds.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .imaging import Image
from .lut import Lut3D, apply_lut, parse_cube

REC709_LUMA = np.array([0.2126, 0.7152, 0.0722], dtype=np.float32)

GAIN_RANGE = (0.6, 1.4)
BIAS_RANGE = (-0.15, 0.15)
GAMMA_RANGE = (0.5, 2.0)
SATURATION_RANGE = (0.4, 1.6)
WHITE_BALANCE_RANGE = (0.8, 1.25)
CURVE_KNOTS = 5


@dataclass(frozen=True)
class FilterParams:
    """Parameters of the fixed filter chain; identity() leaves images unchanged."""

    gain: np.ndarray          # per-channel, [0.6, 1.4]
    bias: np.ndarray          # per-channel, [-0.15, 0.15]
    gamma: float              # [0.5, 2.0]
    saturation: float         # [0.4, 1.6]
    white_balance: np.ndarray # per-channel, [0.8, 1.25]
    curve_x: np.ndarray       # 5 strictly increasing knots on [0, 1]
    curve_y: np.ndarray       # 5 strictly increasing knots on [0, 1]

    def __post_init__(self):
        for name, val, (lo, hi) in (
            ("gain", self.gain, GAIN_RANGE),
            ("bias", self.bias, BIAS_RANGE),
            ("white_balance", self.white_balance, WHITE_BALANCE_RANGE),
        ):
            arr = np.asarray(val, dtype=np.float32)
            if arr.shape != (3,) or np.any(arr < lo) or np.any(arr > hi):
                raise ValueError(f"{name} must be 3 values in [{lo}, {hi}]")
            object.__setattr__(self, name, arr)
        if not (GAMMA_RANGE[0] <= self.gamma <= GAMMA_RANGE[1]):
            raise ValueError("gamma out of range")
        if not (SATURATION_RANGE[0] <= self.saturation <= SATURATION_RANGE[1]):
            raise ValueError("saturation out of range")
        for name in ("curve_x", "curve_y"):
            arr = np.asarray(getattr(self, name), dtype=np.float32)
            if arr.shape != (CURVE_KNOTS,) or np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"{name} must be {CURVE_KNOTS} knots in [0, 1]")
            if np.any(np.diff(arr) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, arr)

    @staticmethod
    def identity() -> "FilterParams":
        knots = np.linspace(0.0, 1.0, CURVE_KNOTS, dtype=np.float32)
        return FilterParams(
            gain=np.ones(3), bias=np.zeros(3), gamma=1.0, saturation=1.0,
            white_balance=np.ones(3), curve_x=knots, curve_y=knots.copy(),
        )


def _increasing_knots(rng: np.random.Generator) -> np.ndarray:
    """Five strictly increasing knots spanning [0, 1] with a guaranteed gap."""
    gaps = rng.uniform(0.05, 1.0, size=CURVE_KNOTS - 1)
    cum = np.concatenate([[0.0], np.cumsum(gaps)])
    return (cum / cum[-1]).astype(np.float32)


def random_filter(seed) -> FilterParams:
    """Draw FilterParams uniformly within their documented ranges."""
    rng = np.random.default_rng(seed)
    xs = _increasing_knots(rng)
    ys = _increasing_knots(rng)
    # pull the curve toward identity so tone shifts stay plausible
    ys = (0.6 * xs + 0.4 * ys).astype(np.float32)
    return FilterParams(
        gain=rng.uniform(*GAIN_RANGE, size=3).astype(np.float32),
        bias=rng.uniform(*BIAS_RANGE, size=3).astype(np.float32),
        gamma=float(rng.uniform(*GAMMA_RANGE)),
        saturation=float(rng.uniform(*SATURATION_RANGE)),
        white_balance=rng.uniform(*WHITE_BALANCE_RANGE, size=3).astype(np.float32),
        curve_x=xs,
        curve_y=ys,
    )


def apply_filter(image: Image, params: FilterParams) -> Image:
    """White balance, gain/bias, gamma, saturation, tone curve — clamped after each stage."""
    v = image.data
    v = np.clip(v * params.white_balance, 0.0, 1.0)
    v = np.clip(v * params.gain + params.bias, 0.0, 1.0)
    v = np.clip(v ** np.float32(params.gamma), 0.0, 1.0)
    # explicit per-channel sum: BLAS reductions can round differently by array
    # position, which would break the equal-color-in, equal-color-out guarantee
    luma = (v[..., 0] * REC709_LUMA[0] + v[..., 1] * REC709_LUMA[1]
            + v[..., 2] * REC709_LUMA[2])[..., None]
    v = np.clip(luma + params.saturation * (v - luma), 0.0, 1.0)
    v = np.interp(v, params.curve_x, params.curve_y).astype(np.float32)
    return Image(np.clip(v, 0.0, 1.0))


@functools.cache
def bundled_luts() -> tuple[Lut3D, ...]:
    """The cube files shipped with the package, parsed once."""
    root = resources.files(__package__) / "luts"
    luts = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".cube"):
            luts.append(parse_cube(entry.read_text()))
    if not luts:
        raise RuntimeError("no bundled .cube files found")
    return tuple(luts)


def random_perturbation(rng: np.random.Generator):
    """One color-only perturbation: a filter, a LUT, or a LUT then a filter."""
    kind = int(rng.integers(3))
    luts = bundled_luts()
    if kind == 0:
        params = random_filter(rng)
        return lambda img: apply_filter(img, params)
    if kind == 1:
        chosen = luts[int(rng.integers(len(luts)))]
        return lambda img: apply_lut(img, chosen)
    chosen = luts[int(rng.integers(len(luts)))]
    params = random_filter(rng)
    return lambda img: apply_filter(apply_lut(img, chosen), params)


def make_pair(image: Image, seed) -> tuple[Image, Image]:
    """Two independently perturbed variants of the same source, deterministic in seed."""
    rng = np.random.default_rng(seed)
    first = random_perturbation(rng)
    second = random_perturbation(rng)
    return first(image), second(image)
