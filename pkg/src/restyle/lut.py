"""Text .cube 3D LUT parsing, serialization, and trilinear application.

The cube convention: an optional TITLE, LUT_3D_SIZE N, optional DOMAIN_MIN /
DOMAIN_MAX, then N^3 whitespace-separated float triples with the red axis
varying fastest. Parse errors carry the 1-based line number they were found on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import Image

_MAX_SIZE = 256


class CubeParseError(Exception):
    """Base for cube-format errors; `line` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingSizeError(CubeParseError):
    pass


class EntryCountError(CubeParseError):
    pass


class TokenError(CubeParseError):
    pass


class SizeRangeError(CubeParseError):
    pass


@dataclass(frozen=True)
class Lut3D:
    """N^3 RGB lattice; table[b, g, r] holds the output color for that corner."""

    size: int
    table: np.ndarray
    domain_min: np.ndarray
    domain_max: np.ndarray
    title: str | None = None

    def __post_init__(self):
        n = self.size
        table = np.asarray(self.table, dtype=np.float32)
        if n < 2 or table.shape != (n, n, n, 3):
            raise ValueError(f"lut table must be ({n},{n},{n},3), got {table.shape}")
        if not np.all(np.isfinite(table)):
            raise ValueError("lut entries must be finite")
        object.__setattr__(self, "table", np.clip(table, 0.0, 1.0))
        object.__setattr__(self, "domain_min", np.asarray(self.domain_min, dtype=np.float32))
        object.__setattr__(self, "domain_max", np.asarray(self.domain_max, dtype=np.float32))

    @staticmethod
    def identity(size: int = 2) -> "Lut3D":
        axis = np.linspace(0.0, 1.0, size, dtype=np.float32)
        b, g, r = np.meshgrid(axis, axis, axis, indexing="ij")
        return Lut3D(size, np.stack([r, g, b], axis=-1), np.zeros(3), np.ones(3))


def parse_cube(text: str) -> Lut3D:
    """Parse cube text into a Lut3D; raises a CubeParseError subclass on bad input."""
    size = None
    size_line = 0
    title = None
    domain_min = np.zeros(3, dtype=np.float32)
    domain_max = np.ones(3, dtype=np.float32)
    entries: list[tuple[float, float, float]] = []
    last_data_line = 0

    def floats(parts, want, lineno):
        if len(parts) != want:
            raise TokenError(f"expected {want} values, got {len(parts)}", lineno)
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise TokenError(f"non-numeric token in {parts!r}", lineno) from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = line.split(None, 1)[0]
        if head[0].isalpha():
            if head == "LUT_3D_SIZE":
                vals = line.split()
                if len(vals) != 2 or not vals[1].lstrip("+-").isdigit():
                    raise TokenError(f"bad size declaration {line!r}", lineno)
                size = int(vals[1])
                size_line = lineno
                if size < 2 or size > _MAX_SIZE:
                    raise SizeRangeError(f"LUT_3D_SIZE {size} outside [2, {_MAX_SIZE}]", lineno)
            elif head == "TITLE":
                title = line.split(None, 1)[1].strip().strip('"') if " " in line else ""
            elif head == "DOMAIN_MIN":
                domain_min = np.asarray(floats(line.split()[1:], 3, lineno), dtype=np.float32)
            elif head == "DOMAIN_MAX":
                domain_max = np.asarray(floats(line.split()[1:], 3, lineno), dtype=np.float32)
            # other keyword lines (LUT_1D_SIZE etc.) are not data; ignore them
            continue
        vals = floats(line.split(), 3, lineno)
        entries.append(tuple(vals))
        last_data_line = lineno
        if size is not None and len(entries) > size**3:
            raise EntryCountError(f"more than {size**3} data triples", lineno)

    if size is None:
        raise MissingSizeError("missing LUT_3D_SIZE declaration", last_data_line or 1)
    if len(entries) != size**3:
        raise EntryCountError(
            f"expected {size**3} data triples, got {len(entries)}",
            last_data_line or size_line,
        )
    table = np.asarray(entries, dtype=np.float32).reshape(size, size, size, 3)
    return Lut3D(size, table, domain_min, domain_max, title)


def serialize_cube(lut: Lut3D) -> str:
    lines = []
    if lut.title:
        lines.append(f'TITLE "{lut.title}"')
    lines.append(f"LUT_3D_SIZE {lut.size}")
    lines.append("DOMAIN_MIN {:g} {:g} {:g}".format(*lut.domain_min))
    lines.append("DOMAIN_MAX {:g} {:g} {:g}".format(*lut.domain_max))
    flat = lut.table.reshape(-1, 3)
    for r, g, b in flat:
        lines.append(f"{r:.8f} {g:.8f} {b:.8f}")
    return "\n".join(lines) + "\n"


def apply_lut(image: Image, lut: Lut3D) -> Image:
    """Trilinear interpolation on the lattice; purely per-pixel."""
    n = lut.size
    span = np.maximum(lut.domain_max - lut.domain_min, 1e-12)
    t = np.clip((image.data - lut.domain_min) / span, 0.0, 1.0) * (n - 1)
    i0 = np.minimum(t.astype(np.int64), n - 2)
    f = (t - i0).astype(np.float32)
    r0, g0, b0 = i0[..., 0], i0[..., 1], i0[..., 2]
    fr, fg, fb = f[..., 0:1], f[..., 1:2], f[..., 2:3]
    tab = lut.table

    def corner(db, dg, dr):
        return tab[b0 + db, g0 + dg, r0 + dr]

    c00 = corner(0, 0, 0) * (1 - fr) + corner(0, 0, 1) * fr
    c01 = corner(0, 1, 0) * (1 - fr) + corner(0, 1, 1) * fr
    c10 = corner(1, 0, 0) * (1 - fr) + corner(1, 0, 1) * fr
    c11 = corner(1, 1, 0) * (1 - fr) + corner(1, 1, 1) * fr
    c0 = c00 * (1 - fg) + c01 * fg
    c1 = c10 * (1 - fg) + c11 * fg
    out = c0 * (1 - fb) + c1 * fb
    return Image(out)
