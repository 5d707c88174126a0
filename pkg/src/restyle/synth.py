"""Deterministic synthetic images: gradients, blobs, and texture.

Used for the benchmark input and for generating desk-scale training corpora
without any external data. Everything derives from the seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imaging import Image, save_raster


def make_image(height: int, width: int | None = None, seed: int = 0,
               smooth: bool = False) -> Image:
    """Gradient + soft blobs, plus hard-edged shapes, texture, and grain.

    The hard edges give images the structural identity photographs have, so
    pixel distances between different images are geometry-dominated rather
    than palette-dominated. `smooth` skips the edges and grain and yields
    content that PNG-compresses like a typical photo thumbnail.
    """
    width = height if width is None else width
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, height, width)))
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float32)
    ys /= max(height - 1, 1)
    xs /= max(width - 1, 1)

    theta = rng.uniform(0, 2 * np.pi)
    ramp = (np.cos(theta) * xs + np.sin(theta) * ys)
    ramp = (ramp - ramp.min()) / max(float(np.ptp(ramp)), 1e-6)
    c0 = rng.uniform(0.05, 0.95, size=3).astype(np.float32)
    c1 = rng.uniform(0.05, 0.95, size=3).astype(np.float32)
    img = ramp[..., None] * c1 + (1 - ramp[..., None]) * c0

    for _ in range(int(rng.integers(2, 5))):
        cy, cx = rng.uniform(0, 1, size=2)
        radius = rng.uniform(0.1, 0.4)
        color = rng.uniform(0, 1, size=3).astype(np.float32)
        dist2 = (ys - cy) ** 2 + (xs - cx) ** 2
        mask = np.exp(-dist2 / (2 * radius**2)).astype(np.float32)[..., None]
        img = img * (1 - 0.8 * mask) + color * 0.8 * mask

    if smooth:
        return Image(np.clip(img, 0.0, 1.0))

    for _ in range(int(rng.integers(4, 9))):
        color = rng.uniform(0.08, 0.92, size=3).astype(np.float32)
        kind = int(rng.integers(3))
        if kind == 0:
            y0, x0 = rng.uniform(0, 0.8, size=2)
            hgt, wid = rng.uniform(0.1, 0.45, size=2)
            mask = (ys >= y0) & (ys < y0 + hgt) & (xs >= x0) & (xs < x0 + wid)
        elif kind == 1:
            cy, cx = rng.uniform(0.1, 0.9, size=2)
            radius = rng.uniform(0.08, 0.3)
            mask = (ys - cy) ** 2 + (xs - cx) ** 2 < radius**2
        else:
            freq = rng.uniform(3, 9)
            ang = rng.uniform(0, np.pi)
            phase = np.cos(ang) * xs + np.sin(ang) * ys
            mask = ((phase * freq) % 1.0) < rng.uniform(0.15, 0.4)
            side = rng.uniform(0.3, 0.7)
            mask &= (xs < side) if rng.integers(2) else (ys < side)
        img[mask] = 0.9 * color + 0.1 * img[mask]

    fy, fx = rng.uniform(1.5, 5.0, size=2)
    phase = rng.uniform(0, 2 * np.pi, size=3).astype(np.float32)
    wave = np.sin(2 * np.pi * (fy * ys + fx * xs))[..., None] * 0.5 + 0.5
    img = 0.9 * img + 0.1 * (wave * np.cos(phase) * 0.5 + 0.5)
    img += rng.normal(0, 0.01, size=img.shape).astype(np.float32)
    return Image(np.clip(img, 0.0, 1.0))


def make_corpus(directory, count: int, size: int = 64, seed: int = 0) -> list[Path]:
    """Write `count` PNGs into directory; returns the sorted paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        path = directory / f"img_{i:04d}.png"
        save_raster(make_image(size, size, seed=seed * 100003 + i), path)
        paths.append(path)
    return paths
