"""Patch-size sweep: wall time and peak kernel scratch for the tiled mapper.

Memory comes from the kernel's own allocation accounting (deterministic and
portable), not OS RSS. Timing is the median of several runs after a warmup.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import mapping
from .imaging import Image
from .mapping import ColorMapMatrix, ProjectionPair, apply_color_map_tiled

# tiles are processed sequentially; recorded in the CSV for comparability
TILE_WORKERS = 1


@dataclass(frozen=True)
class BenchRecord:
    patch_size: int
    pixels: int
    seconds: float
    peak_bytes: int

    def __post_init__(self):
        if self.seconds <= 0 or self.peak_bytes <= 0:
            raise ValueError("bench record must have positive time and memory")


def _random_map(k: int, seed: int) -> tuple[ColorMapMatrix, ProjectionPair]:
    rng = np.random.default_rng(seed)
    t = ColorMapMatrix(rng.normal(0, 0.3, size=(k, k)).astype(np.float32))
    proj = ProjectionPair(rng.normal(0, 0.3, size=(3, k)).astype(np.float32),
                          rng.normal(0, 0.3, size=(k, 3)).astype(np.float32))
    return t, proj


def bench_patch_sweep(image: Image, patch_sizes, repeats: int = 5,
                      k: int = 16, seed: int = 0) -> list[BenchRecord]:
    """Median-of-`repeats` timings of the tiled apply for each patch size.

    Runs are interleaved round-robin across patch sizes so that ambient load
    drift lands on every configuration equally instead of biasing whichever
    size happened to run last.
    """
    patch_sizes = list(patch_sizes)
    if len(patch_sizes) < 2:
        raise ValueError("need at least 2 patch sizes to sweep")
    t, proj = _random_map(k, seed)
    times: dict[int, list[float]] = {p: [] for p in patch_sizes}
    peaks: dict[int, int] = {}
    for patch in patch_sizes:  # warmup: page in scratch, prime caches
        apply_color_map_tiled(image, t, proj, patch)
    for _ in range(repeats):
        for patch in patch_sizes:
            mapping.meter.reset()
            start = time.perf_counter()
            apply_color_map_tiled(image, t, proj, patch)
            times[patch].append(time.perf_counter() - start)
            peaks[patch] = mapping.meter.peak
    return [
        BenchRecord(
            patch_size=patch,
            pixels=image.height * image.width,
            seconds=statistics.median(times[patch]),
            peak_bytes=peaks[patch],
        )
        for patch in patch_sizes
    ]


CSV_HEADER = "patch_size,pixels,seconds,peak_bytes"


def format_bench_csv(records) -> str:
    lines = [f"# tile_workers={TILE_WORKERS}", CSV_HEADER]
    for r in records:
        lines.append(f"{r.patch_size},{r.pixels},{r.seconds:.6f},{r.peak_bytes}")
    return "\n".join(lines) + "\n"
