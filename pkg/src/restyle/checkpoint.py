"""Binary checkpoint format ("NPCK"): bitwise-exact save/load of a training state.

Layout, all little-endian:
  magic "NPCK" | version u8 | k u16 | thumbnail_size u16 | n_stages u8 |
  widths u16 each | seed u64 | encoder + projection arrays | adam m arrays |
  adam v arrays | adam t u64 | step u64
Each array is a u32 element count followed by raw float32 data. Array order is
Model.trainable() order, so reading back reproduces the exact byte stream.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .autodiff import AdamState
from .encoder import EncoderConfig, EncoderWeights
from .mapping import ProjectionPair
from .model import Model

MAGIC = b"NPCK"
VERSION = 1


class CheckpointError(Exception):
    pass


@dataclass
class Checkpoint:
    model: Model
    opt: AdamState
    step: int

    @property
    def fingerprint(self) -> bytes:
        return self.model.fingerprint


def _write_array(out: bytearray, arr: np.ndarray):
    flat = np.ascontiguousarray(arr, dtype="<f4").reshape(-1)
    out += struct.pack("<I", flat.size)
    out += flat.tobytes()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated checkpoint")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, shape) -> np.ndarray:
        (count,) = self.unpack("<I")
        expected = int(np.prod(shape))
        if count != expected:
            raise CheckpointError(f"array length {count} does not match shape {shape}")
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4").reshape(shape).copy()


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    cfg = ckpt.model.config
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BHHB", VERSION, cfg.k, cfg.thumbnail_size, len(cfg.widths))
    for w in cfg.widths:
        out += struct.pack("<H", w)
    out += struct.pack("<Q", cfg.seed)
    arrays = [arr for _, arr in ckpt.model.trainable()]
    for arr in arrays:
        _write_array(out, arr)
    for m in ckpt.opt.m:
        _write_array(out, m)
    for v in ckpt.opt.v:
        _write_array(out, v)
    out += struct.pack("<QQ", ckpt.opt.t, ckpt.step)
    return bytes(out)


def decode_checkpoint(data: bytes) -> Checkpoint:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise CheckpointError("bad magic")
    version, k, thumb, n_stages = r.unpack("<BHHB")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    widths = tuple(r.unpack("<H")[0] for _ in range(n_stages))
    (seed,) = r.unpack("<Q")
    cfg = EncoderConfig(k=k, thumbnail_size=thumb, widths=widths, seed=seed)

    weights = EncoderWeights(config=cfg)
    c_in = 3
    for c_out in widths:
        weights.conv_w.append(r.array((c_out, c_in, 3, 3)))
        weights.conv_b.append(r.array((c_out,)))
        c_in = c_out
    k2 = k * k
    weights.head_d_w = r.array((c_in, k2))
    weights.head_d_b = r.array((k2,))
    weights.head_r_w = r.array((c_in, k2))
    weights.head_r_b = r.array((k2,))
    proj_n = ProjectionPair(r.array((3, k)), r.array((k, 3)), "normalizing")
    proj_s = ProjectionPair(r.array((3, k)), r.array((k, 3)), "stylizing")
    model = Model(weights, proj_n, proj_s)

    shapes = [arr.shape for _, arr in model.trainable()]
    opt = AdamState([np.zeros(s, dtype=np.float32) for s in shapes])
    opt.m = [r.array(s) for s in shapes]
    opt.v = [r.array(s) for s in shapes]
    t, step = r.unpack("<QQ")
    opt.t = t
    if r.pos != len(data):
        raise CheckpointError(f"{len(data) - r.pos} trailing bytes")
    return Checkpoint(model=model, opt=opt, step=step)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    """Atomic write: encode to a sibling temp file, then rename over the target."""
    path = Path(path)
    blob = encode_checkpoint(ckpt)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such checkpoint: {path}")
    return decode_checkpoint(path.read_bytes())
