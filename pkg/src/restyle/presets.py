"""Reusable color-style presets: one k x k matrix plus binding metadata.

File format "NPRE", all little-endian:
  magic (4) | version u8 | role u8 ('n' or 's') | k u16 | fingerprint (8) |
  k*k float32 row-major | name length u16 | name UTF-8 | created u64 (unix s)
The fingerprint ties a preset to the projection matrices it was extracted
under; applying it elsewhere is meaningless and is rejected.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoder import encode
from .imaging import Image, downsample
from .mapping import ColorMapMatrix
from .model import Model

MAGIC = b"NPRE"
VERSION = 1

ROLE_NORMALIZING = "n"
ROLE_STYLIZING = "s"


class PresetFormatError(Exception):
    pass


@dataclass(frozen=True)
class Preset:
    role: str
    matrix: ColorMapMatrix
    name: str
    fingerprint: bytes
    created: int

    def __post_init__(self):
        if self.role not in (ROLE_NORMALIZING, ROLE_STYLIZING):
            raise ValueError(f"role must be 'n' or 's', got {self.role!r}")
        if len(self.fingerprint) != 8:
            raise ValueError("fingerprint must be 8 bytes")

    @property
    def k(self) -> int:
        return self.matrix.k


def extract_preset(style: Image, model: Model, name: str) -> Preset:
    """Downsample, encode, keep the stylizing head; the style image is never needed again."""
    thumb = downsample(style, model.config.thumbnail_size)
    _, r = encode(thumb, model.weights)
    return Preset(role=ROLE_STYLIZING, matrix=r, name=name,
                  fingerprint=model.fingerprint, created=int(time.time()))


def extract_normalizer(style: Image, model: Model, name: str) -> Preset:
    thumb = downsample(style, model.config.thumbnail_size)
    d, _ = encode(thumb, model.weights)
    return Preset(role=ROLE_NORMALIZING, matrix=d, name=name,
                  fingerprint=model.fingerprint, created=int(time.time()))


def encode_preset(preset: Preset) -> bytes:
    name_bytes = preset.name.encode("utf-8")
    if len(name_bytes) > 0xFFFF:
        raise ValueError("preset name too long")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BBH", VERSION, ord(preset.role), preset.k)
    out += preset.fingerprint
    out += np.ascontiguousarray(preset.matrix.values, dtype="<f4").tobytes()
    out += struct.pack("<H", len(name_bytes))
    out += name_bytes
    out += struct.pack("<Q", preset.created)
    return bytes(out)


def decode_preset(data: bytes) -> Preset:
    if len(data) < 4 or data[:4] != MAGIC:
        raise PresetFormatError("bad magic")
    if len(data) < 16:
        raise PresetFormatError("truncated header")
    version, role_byte, k = struct.unpack("<BBH", data[4:8])
    if version != VERSION:
        raise PresetFormatError(f"unsupported version {version}")
    role = chr(role_byte)
    fingerprint = data[8:16]
    pos = 16
    matrix_bytes = 4 * k * k
    if len(data) < pos + matrix_bytes + 2:
        raise PresetFormatError("truncated matrix payload")
    matrix = np.frombuffer(data[pos : pos + matrix_bytes], dtype="<f4").reshape(k, k).copy()
    pos += matrix_bytes
    (name_len,) = struct.unpack("<H", data[pos : pos + 2])
    pos += 2
    if len(data) < pos + name_len + 8:
        raise PresetFormatError("truncated name/timestamp")
    name = data[pos : pos + name_len].decode("utf-8")
    pos += name_len
    (created,) = struct.unpack("<Q", data[pos : pos + 8])
    pos += 8
    if pos != len(data):
        raise PresetFormatError(f"{len(data) - pos} trailing bytes")
    return Preset(role=role, matrix=ColorMapMatrix(matrix), name=name,
                  fingerprint=fingerprint, created=created)


def save_preset(preset: Preset, path) -> None:
    Path(path).write_bytes(encode_preset(preset))


def load_preset(path) -> Preset:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such preset: {path}")
    return decode_preset(path.read_bytes())
