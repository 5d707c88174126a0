"""The two-stage transfer API: normalize once, stylize as often as you like.

Normalization strips an image's color style into a cached, unclamped
intermediate; stylization maps that intermediate to any target style from a
k x k matrix alone. Switching among m styles therefore costs one encoder call
plus m cheap per-pixel passes, and video gets consistent colors by freezing
the matrices taken from the first frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import encode
from .imaging import Image, downsample
from .mapping import ColorMapMatrix, apply_color_map_tiled
from .model import Model
from .presets import Preset, ROLE_STYLIZING

DEFAULT_PATCH_SIZE = 512


class FingerprintMismatch(Exception):
    """A preset or cached intermediate belongs to a different set of projections."""


@dataclass(frozen=True)
class NormalizedImage:
    """Unclamped image in the normalized color space, bound to its projections."""

    data: np.ndarray
    k: int
    fingerprint: bytes

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def normalize(image: Image, model: Model,
              patch_size: int = DEFAULT_PATCH_SIZE) -> tuple[NormalizedImage, ColorMapMatrix, ColorMapMatrix]:
    """Map the image into the normalized space; returns (Z, d, r) for reuse."""
    thumb = downsample(image, model.config.thumbnail_size)
    d, r = encode(thumb, model.weights)
    z = apply_color_map_tiled(image, d, model.proj_n, patch_size, clamp=False)
    return NormalizedImage(z.data, model.k, model.fingerprint), d, r


def stylize(z: NormalizedImage, style: ColorMapMatrix | Preset, model: Model,
            patch_size: int = DEFAULT_PATCH_SIZE) -> Image:
    """Apply a stylizing matrix or preset to a cached normalized image."""
    if isinstance(style, Preset):
        if style.role != ROLE_STYLIZING:
            raise ValueError("preset does not hold a stylizing matrix")
        if style.fingerprint != model.fingerprint:
            raise FingerprintMismatch(
                f"preset fingerprint {style.fingerprint.hex()} does not match "
                f"model {model.fingerprint.hex()}"
            )
        matrix = style.matrix
    else:
        matrix = style
    if z.fingerprint != model.fingerprint:
        raise FingerprintMismatch(
            f"normalized image fingerprint {z.fingerprint.hex()} does not match "
            f"model {model.fingerprint.hex()}"
        )
    return apply_color_map_tiled(Image(z.data), matrix, model.proj_s, patch_size, clamp=True)


def transfer(content: Image, style: Image, model: Model,
             patch_size: int = DEFAULT_PATCH_SIZE) -> Image:
    """One-shot: normalize the content, stylize with the matrix taken from the style."""
    z, _, _ = normalize(content, model, patch_size)
    style_thumb = downsample(style, model.config.thumbnail_size)
    _, r_s = encode(style_thumb, model.weights)
    return stylize(z, r_s, model, patch_size)


def stylize_sequence(frames, style: Image, model: Model,
                     patch_size: int = DEFAULT_PATCH_SIZE) -> list[Image]:
    """Stylize every frame with matrices frozen from frame 0 and the style image."""
    frames = list(frames)
    if not frames:
        raise ValueError("frame sequence is empty")
    first_thumb = downsample(frames[0], model.config.thumbnail_size)
    d, _ = encode(first_thumb, model.weights)
    style_thumb = downsample(style, model.config.thumbnail_size)
    _, r = encode(style_thumb, model.weights)
    out = []
    for frame in frames:
        z = apply_color_map_tiled(frame, d, model.proj_n, patch_size, clamp=False)
        out.append(apply_color_map_tiled(z, r, model.proj_s, patch_size, clamp=True))
    return out
