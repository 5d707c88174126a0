"""Pixel-independent color mapping through a small image-adaptive matrix.

Every pixel row-vector x (1x3) is sent through y = x @ P @ T @ Q, where T is
a k x k matrix predicted per image and P (3xk) / Q (kx3) are shared projection
matrices. Because the map depends only on the pixel's own color, equal input
colors always produce equal output colors, and the image can be processed in
tiles of any size with bitwise-identical results.

The staged evaluation order (x@P, then @T, then @Q) is fixed: each stage is an
explicit left-to-right sum of rank-1 broadcasts, never a BLAS call, so the
per-pixel rounding sequence cannot depend on how many pixels share a call.
Rows are processed in fixed-size chunks purely for cache locality; chunking
does not alter any per-pixel arithmetic.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .imaging import Image, tile

# rows per inner block; keeps stage buffers cache-resident without changing results
_CHUNK_ROWS = 32768


@dataclass(frozen=True)
class ColorMapMatrix:
    """The k x k image-adaptive matrix, stored row-major."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"color map matrix must be square, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("color map matrix must be finite")
        object.__setattr__(self, "values", np.ascontiguousarray(arr))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @staticmethod
    def identity(k: int) -> "ColorMapMatrix":
        return ColorMapMatrix(np.eye(k, dtype=np.float32))


@dataclass(frozen=True)
class ProjectionPair:
    """Learnable P (3xk) and Q (kx3), shared by all images of one map instance."""

    p: np.ndarray
    q: np.ndarray
    role: str = "normalizing"

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.p, dtype=np.float32))
        q = np.ascontiguousarray(np.asarray(self.q, dtype=np.float32))
        if p.ndim != 2 or p.shape[0] != 3 or q.shape != (p.shape[1], 3):
            raise ValueError(f"projection shapes must be (3,k) and (k,3), got {p.shape} {q.shape}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise ValueError("projection matrices must be finite")
        if self.role not in ("normalizing", "stylizing"):
            raise ValueError(f"unknown role {self.role!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def k(self) -> int:
        return self.p.shape[1]

    @staticmethod
    def identity(k: int, role: str = "normalizing") -> "ProjectionPair":
        """P = [I3 | 0], Q = [I3 ; 0]: the pair under which the map is the identity.

        For k < 3 the identity cannot be represented; the truncated-identity
        pair (first k columns/rows) is the closest equivalent.
        """
        p = np.zeros((3, k), dtype=np.float32)
        q = np.zeros((k, 3), dtype=np.float32)
        m = min(3, k)
        p[:m, :m] = np.eye(m, dtype=np.float32)
        q[:m, :m] = np.eye(m, dtype=np.float32)
        return ProjectionPair(p, q, role)

    @staticmethod
    def identity_seeded(k: int, role: str, seed, scale: float = 0.25) -> "ProjectionPair":
        """P = [I3 | V], Q = [I3 ; 0] with random V: still exactly the identity
        map (P @ Q = I3, and the dormant rows of Q contribute exact zeros), but
        every embedding dimension receives gradient from the first step on.
        With P = [I3 | 0] the extra k-3 dimensions would stay frozen forever:
        their P columns and Q rows both start at zero, so all their gradients
        are products with zero and Adam never moves them.
        """
        pair = ProjectionPair.identity(k, role)
        if k > 3:
            rng = np.random.default_rng(seed)
            v = rng.normal(0.0, scale, size=(3, k - 3)).astype(np.float32)
            p = pair.p.copy()
            p[:, 3:] = v
            return ProjectionPair(p, pair.q, role)
        return pair


class WorkingSetMeter:
    """Tracks bytes of kernel scratch currently held and the peak since reset."""

    def __init__(self):
        self.current = 0
        self.peak = 0

    def reset(self):
        self.current = 0
        self.peak = 0

    def acquire(self, nbytes: int):
        self.current += nbytes
        if self.current > self.peak:
            self.peak = self.current

    def release(self, nbytes: int):
        self.current -= nbytes


#: process-wide scratch accounting for the mapping kernel
meter = WorkingSetMeter()


class _Arena(threading.local):
    """Reusable per-thread scratch so repeated applies don't re-fault fresh pages.

    Grows to the largest request seen and hands out float32 views; the meter
    still accounts every logical acquisition, so reported working-set peaks
    reflect what each call uses, not what the pool retains.
    """

    def __init__(self):
        self.block = np.empty(0, dtype=np.float32)

    def views(self, shapes):
        total = sum(int(np.prod(s)) for s in shapes)
        if self.block.size < total:
            self.block = np.empty(total, dtype=np.float32)
        out = []
        pos = 0
        for shape in shapes:
            count = int(np.prod(shape))
            out.append(self.block[pos : pos + count].reshape(shape))
            pos += count
        return out


# one arena per role: stage scratch and tile buffers have overlapping lifetimes
_stage_arena = _Arena()
_tile_arena = _Arena()


def _project_rows(x: np.ndarray, m: np.ndarray, out: np.ndarray, tmp: np.ndarray) -> None:
    """out = x @ m via an explicit left-to-right sum of rank-1 broadcasts."""
    np.multiply(x[:, 0:1], m[0], out=out)
    for i in range(1, m.shape[0]):
        np.multiply(x[:, i : i + 1], m[i], out=tmp)
        out += tmp


def _map_pixel_rows(x: np.ndarray, stages: list[np.ndarray], out: np.ndarray) -> np.ndarray:
    """Send (n, c) pixel rows through the staged matrices into `out`.

    Rows go through in fixed-size chunks whose stage buffers are reused, so
    the intermediate scratch stays cache-resident regardless of how many rows
    one call covers. Per-pixel arithmetic order never depends on n.
    """
    n = x.shape[0]
    widths = [m.shape[1] for m in stages]
    rows = min(n, _CHUNK_ROWS)
    inter_shapes = [(rows, w) for w in widths[:-1]]
    tmp_shape = (rows, max(widths))
    views = _stage_arena.views(inter_shapes + [tmp_shape])
    inter, tmp = views[:-1], views[-1]
    scratch_bytes = 4 * sum(int(np.prod(s)) for s in inter_shapes + [tmp_shape])
    meter.acquire(scratch_bytes)
    try:
        for s in range(0, n, _CHUNK_ROWS):
            e = min(s + _CHUNK_ROWS, n)
            src = x[s:e]
            for i, m in enumerate(stages):
                dst = out[s:e] if i == len(stages) - 1 else inter[i][: e - s]
                _project_rows(src, m, dst, tmp[: e - s, : m.shape[1]])
                src = dst
        return out
    finally:
        meter.release(scratch_bytes)


def _check_dims(t: ColorMapMatrix, proj: ProjectionPair):
    if t.k != proj.k:
        raise ValueError(f"dimension mismatch: T is {t.k}x{t.k}, projections are k={proj.k}")


def compose(t: ColorMapMatrix, proj: ProjectionPair) -> np.ndarray:
    """The effective 3x3 matrix P @ T @ Q (per-pixel map is linear, so this is exact
    up to float re-association; callers treating it as a fast path must tolerate ~1e-5)."""
    _check_dims(t, proj)
    return (proj.p @ t.values @ proj.q).astype(np.float32)


def apply_color_map(image: Image, t: ColorMapMatrix, proj: ProjectionPair,
                    clamp: bool = True, precomposed: bool = False) -> Image:
    """Map every pixel through x @ P @ T @ Q; clamp to [0,1] only on the export path."""
    _check_dims(t, proj)
    x = image.pixels
    if not x.flags.c_contiguous:
        x = np.ascontiguousarray(x)
    out = np.empty((x.shape[0], 3), dtype=np.float32)
    stages = [compose(t, proj)] if precomposed else [proj.p, t.values, proj.q]
    _map_pixel_rows(x, stages, out)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return Image(out.reshape(image.data.shape))


def apply_color_map_tiled(image: Image, t: ColorMapMatrix, proj: ProjectionPair,
                          patch_size: int, clamp: bool = True) -> Image:
    """Tile-by-tile apply_color_map: bitwise-equal output, scratch bounded by the patch."""
    _check_dims(t, proj)
    grid = tile(image, patch_size)
    out = np.empty_like(image.data)
    stages = [proj.p, t.values, proj.q]
    for r0, c0, th, tw in grid:
        n = th * tw
        piece_buf, mapped = _tile_arena.views([(th, tw, 3), (n, 3)])
        meter.acquire(piece_buf.nbytes + mapped.nbytes)
        try:
            np.copyto(piece_buf, image.data[r0 : r0 + th, c0 : c0 + tw])
            _map_pixel_rows(piece_buf.reshape(n, 3), stages, mapped)
            if clamp:
                np.clip(mapped, 0.0, 1.0, out=mapped)
            out[r0 : r0 + th, c0 : c0 + tw] = mapped.reshape(th, tw, 3)
        finally:
            meter.release(piece_buf.nbytes + mapped.nbytes)
    return Image(out)


def color_map_backward(image: Image, t: ColorMapMatrix, proj: ProjectionPair,
                       upstream: np.ndarray):
    """Adjoints of y = X @ P @ T @ Q for upstream G (h*w, 3) or (h, w, 3).

    Returns (dT, dP, dQ, dX) with dX shaped like the image data.
    """
    _check_dims(t, proj)
    g = np.asarray(upstream)
    if g.shape == image.data.shape:
        g = g.reshape(-1, 3)
    if g.shape != (image.height * image.width, 3):
        raise ValueError(f"upstream gradient shape {upstream.shape} does not match image")
    x = image.pixels
    p, tv, q = proj.p, t.values, proj.q
    xtg = x.T @ g                      # (3, 3), shared by dT and dP
    dt = p.T @ xtg @ q.T
    dp = xtg @ q.T @ tv.T
    dq = tv.T @ p.T @ xtg
    dx = (g @ q.T @ tv.T @ p.T).reshape(image.data.shape)
    return dt, dp, dq, dx
