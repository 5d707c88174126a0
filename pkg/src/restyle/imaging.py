"""Image representation, 8-bit PNG I/O, box-average thumbnails, and patch tiling.

Pixel data lives in float32 arrays of shape (height, width, 3) with channel
values in [0, 1]. Images are treated as immutable once constructed; tiles
reference disjoint regions, so tile-by-tile processing never needs locks.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError


class MalformedRasterError(Exception):
    """The file is not a decodable PNG container."""


class UnsupportedBitDepthError(Exception):
    """The PNG decodes, but not to an 8-bit RGB(A) raster."""


@dataclass(frozen=True)
class Image:
    """An h x w x 3 raster with unit-interval channel values, row-major."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image data must have shape (h, w, 3), got {arr.shape}")
        object.__setattr__(self, "data", np.ascontiguousarray(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def pixels(self) -> np.ndarray:
        """The (h*w, 3) row-major pixel matrix (a view when possible)."""
        return self.data.reshape(-1, 3)


# A Thumbnail is an Image whose height == width == the configured encoder
# input size; no separate class is needed, callers assert squareness.
Thumbnail = Image


@dataclass(frozen=True)
class TileGrid:
    """Row-major partition of an image into patches of at most patch_size."""

    patch_size: int
    height: int
    width: int
    tiles: tuple[tuple[int, int, int, int], ...] = field(default=())

    def __iter__(self):
        return iter(self.tiles)

    def __len__(self):
        return len(self.tiles)


def _decode(source, label: str) -> Image:
    try:
        with PILImage.open(source) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
                raise UnsupportedBitDepthError(f"{label}: unsupported bit depth (mode {mode})")
            if mode not in ("RGB", "RGBA"):
                # palette and grayscale PNGs are 8-bit; expand them
                im = im.convert("RGBA" if "A" in mode or mode == "P" else "RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except UnsupportedBitDepthError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedRasterError(f"{label}: not a valid PNG ({exc})") from exc
    if arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[:, :, :3]
    return Image(arr.astype(np.float32) / 255.0)


def load_raster(path) -> Image:
    """Load an 8-bit RGB(A) PNG as an Image; alpha is dropped, channels become c/255."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such file: {p}")
    return _decode(p, str(p))


def decode_png_bytes(data: bytes) -> Image:
    """Decode an in-memory PNG (same rules as load_raster)."""
    return _decode(io.BytesIO(data), "<bytes>")


def _quantize(image: Image) -> np.ndarray:
    clamped = np.clip(image.data, 0.0, 1.0)
    # values are non-negative after the clamp, so floor(x + 0.5) rounds half away from zero
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_raster(image: Image, path) -> None:
    """Write image as 8-bit RGB PNG; channels are clamped then rounded half away from zero."""
    PILImage.fromarray(_quantize(image), mode="RGB").save(Path(path), format="PNG")


def encode_png_bytes(image: Image) -> bytes:
    """PNG-encode to bytes with the same quantization as save_raster."""
    buf = io.BytesIO()
    PILImage.fromarray(_quantize(image), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _box_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) matrix of fractional box-filter coverage, rows summing to 1."""
    w = np.zeros((dst, src), dtype=np.float64)
    scale = src / dst
    for i in range(dst):
        start = i * scale
        end = (i + 1) * scale
        lo = int(np.floor(start))
        hi = min(int(np.ceil(end)), src)
        for s in range(lo, hi):
            cover = min(end, s + 1) - max(start, s)
            if cover > 0:
                w[i, s] = cover
        w[i] /= w[i].sum()
    return w


def downsample(image: Image, side: int) -> Thumbnail:
    """Area-average the image onto a side x side grid (exact fractional footprints)."""
    if side < 1:
        raise ValueError("side must be >= 1")
    wr = _box_weights(image.height, side)
    wc = _box_weights(image.width, side)
    src = image.data.astype(np.float64)
    out = np.einsum("rh,hwc,sw->rsc", wr, src, wc, optimize=True)
    return Image(out.astype(np.float32))


def tile(image: Image, patch_size: int) -> TileGrid:
    """Partition into a row-major grid; edge tiles keep the remainders."""
    if patch_size < 1:
        raise ValueError("patch_size must be >= 1")
    h, w = image.height, image.width
    tiles = []
    for r0 in range(0, h, patch_size):
        th = min(patch_size, h - r0)
        for c0 in range(0, w, patch_size):
            tw = min(patch_size, w - c0)
            tiles.append((r0, c0, th, tw))
    return TileGrid(patch_size=patch_size, height=h, width=w, tiles=tuple(tiles))


def assemble(grid: TileGrid, pieces) -> Image:
    """Reassemble tile arrays (in grid order) into a full image."""
    out = np.empty((grid.height, grid.width, 3), dtype=np.float32)
    for (r0, c0, th, tw), piece in zip(grid.tiles, pieces):
        out[r0 : r0 + th, c0 : c0 + tw] = piece
    return Image(out)
