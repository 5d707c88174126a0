#!/usr/bin/env python3
"""Generate the engine-side fixtures the webclient tests check against.

Everything is derived from a seeded, lightly perturbed model so the numeric
fixtures exercise non-identity mappings. Raw float images use a tiny "IMGF"
container (u32 h, u32 w, float32 LE data); quantized bytes use "IMGU".
Re-run after changing any wire format or the kernel; commit the outputs.
"""

import struct
import sys
from pathlib import Path

import numpy as np

from restyle.autodiff import AdamState
from restyle.checkpoint import Checkpoint, save_checkpoint
from restyle.encoder import EncoderConfig, encode
from restyle.imaging import Image, downsample, encode_png_bytes, save_raster
from restyle.mapping import apply_color_map
from restyle.model import Model
from restyle.pipeline import normalize, stylize
from restyle.presets import encode_preset, extract_preset
from restyle.service import params_body, projections_body
from restyle.synth import make_image

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures"


def write_imgf(path: Path, image: Image):
    blob = b"IMGF" + struct.pack("<II", image.height, image.width)
    blob += np.ascontiguousarray(image.data, dtype="<f4").tobytes()
    path.write_bytes(blob)


def write_imgu(path: Path, image: Image):
    quantized = np.floor(np.clip(image.data, 0, 1) * 255 + 0.5).astype(np.uint8)
    blob = b"IMGU" + struct.pack("<II", image.height, image.width)
    blob += quantized.tobytes()
    path.write_bytes(blob)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cfg = EncoderConfig(k=16, thumbnail_size=64, seed=11)
    model = Model.initialized(cfg)
    rng = np.random.default_rng(12)
    model.weights.head_d_w += rng.normal(0, 0.25, model.weights.head_d_w.shape).astype(np.float32)
    model.weights.head_r_w += rng.normal(0, 0.25, model.weights.head_r_w.shape).astype(np.float32)

    ckpt = Checkpoint(model, AdamState([a for _, a in model.trainable()]), step=0)
    save_checkpoint(ckpt, OUT / "model.npck")

    content = make_image(96, 128, seed=21)
    style = make_image(80, 80, seed=22)
    write_imgf(OUT / "content_raw.imgf", content)
    write_imgf(OUT / "style_raw.imgf", style)
    save_raster(content, OUT / "content.png")
    save_raster(style, OUT / "style.png")

    content_thumb = downsample(content, cfg.thumbnail_size)
    write_imgf(OUT / "content_thumb.imgf", content_thumb)
    (OUT / "content_thumb.png").write_bytes(encode_png_bytes(content_thumb))

    d, r = encode(content_thumb, model.weights)
    (OUT / "params.bin").write_bytes(params_body(model, d, r))
    (OUT / "projections.bin").write_bytes(projections_body(model))

    style_thumb = downsample(style, cfg.thumbnail_size)
    d_s, r_s = encode(style_thumb, model.weights)
    (OUT / "style_params.bin").write_bytes(params_body(model, d_s, r_s))
    preset = extract_preset(style, model, "fixture-style")
    (OUT / "preset.npre").write_bytes(encode_preset(preset))

    z = apply_color_map(content, d, model.proj_n, clamp=False)
    write_imgf(OUT / "normalized.imgf", Image(z.data))
    z_n, _, _ = normalize(content, model)
    styled = stylize(z_n, preset, model)
    write_imgu(OUT / "styled_expected.imgu", styled)

    print(f"wrote fixtures to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
