"""Command-line surface: train, transfer, normalize, presets, serve, bench.

Operational failures print one machine-readable JSON line to stderr and exit
1; argparse usage errors exit 2; success exits 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import bench_patch_sweep, format_bench_csv
from .checkpoint import load_checkpoint
from .imaging import Image, load_raster, save_raster
from .pipeline import normalize, stylize, transfer
from .presets import extract_preset, load_preset, save_preset
from .service import DEFAULT_THUMBNAIL_LIMIT, create_server
from .synth import make_image
from .training import TrainConfig, train


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="restyle",
                                     description="color style transfer engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="self-supervised training over a PNG directory")
    p_train.add_argument("--data", required=True, help="directory of training PNGs")
    p_train.add_argument("--checkpoint", required=True, help="output checkpoint path")
    p_train.add_argument("--log", help="per-step loss CSV path")
    p_train.add_argument("--steps", type=int, default=2000)
    p_train.add_argument("--lr", type=float, default=3e-4)
    p_train.add_argument("--lam", "--λ", dest="lam", type=float, default=10.0,
                         help="consistency loss weight")
    p_train.add_argument("--k", type=int, default=16)
    p_train.add_argument("--thumbnail-size", type=int, default=64)
    p_train.add_argument("--batch-size", type=int, default=8)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--quiet", action="store_true")

    p_tr = sub.add_parser("transfer", help="restyle a content image from a style image")
    p_tr.add_argument("--content", required=True)
    p_tr.add_argument("--style", required=True)
    p_tr.add_argument("--out", required=True)
    p_tr.add_argument("--checkpoint", required=True)
    p_tr.add_argument("--patch-size", type=int, default=512)

    p_norm = sub.add_parser("normalize", help="write the normalized-space preview of an image")
    p_norm.add_argument("--in", dest="input", required=True)
    p_norm.add_argument("--out", required=True)
    p_norm.add_argument("--checkpoint", required=True)
    p_norm.add_argument("--patch-size", type=int, default=512)

    p_pe = sub.add_parser("preset-extract", help="save a style image's matrix as a preset")
    p_pe.add_argument("--style", required=True)
    p_pe.add_argument("--out", required=True)
    p_pe.add_argument("--checkpoint", required=True)
    p_pe.add_argument("--name", default="")

    p_pa = sub.add_parser("preset-apply", help="apply a stored preset to an image")
    p_pa.add_argument("--preset", required=True)
    p_pa.add_argument("--in", dest="input", required=True)
    p_pa.add_argument("--out", required=True)
    p_pa.add_argument("--checkpoint", required=True)
    p_pa.add_argument("--patch-size", type=int, default=512)

    p_sv = sub.add_parser("serve", help="run the parameter server")
    p_sv.add_argument("--checkpoint")
    p_sv.add_argument("--host", default="127.0.0.1")
    p_sv.add_argument("--port", type=int, default=8080)
    p_sv.add_argument("--thumbnail-limit", type=int, default=DEFAULT_THUMBNAIL_LIMIT)

    p_b = sub.add_parser("bench", help="patch-size sweep on a synthetic image")
    p_b.add_argument("--sizes", required=True, help="comma-separated patch sizes")
    p_b.add_argument("--image", default="2048x2048", help="HxW or side of the synthetic input")
    p_b.add_argument("--out", help="CSV path (default: stdout)")
    p_b.add_argument("--repeats", type=int, default=5)
    p_b.add_argument("--k", type=int, default=16)
    p_b.add_argument("--seed", type=int, default=0)

    return parser


def _parse_image_size(text: str) -> tuple[int, int]:
    if "x" in text:
        h, w = text.lower().split("x", 1)
        return int(h), int(w)
    side = int(text)
    return side, side


def _load_image(path) -> Image:
    return load_raster(path)


def _run(args) -> int:
    if args.command == "train":
        config = TrainConfig(consistency_weight=args.lam, lr=args.lr,
                             batch_size=args.batch_size, steps=args.steps,
                             k=args.k, thumbnail_size=args.thumbnail_size,
                             seed=args.seed)
        progress = None
        if not args.quiet:
            def progress(report):
                if report.step % 100 == 0 or report.step == args.steps - 1:
                    print(f"step {report.step}: rec={report.l_rec:.5f} "
                          f"con={report.l_con:.5f} total={report.total:.5f}")
        train(config, args.data, checkpoint_path=args.checkpoint,
              log_path=args.log, progress=progress)
        return 0

    if args.command == "transfer":
        model = load_checkpoint(args.checkpoint).model
        out = transfer(_load_image(args.content), _load_image(args.style),
                       model, args.patch_size)
        save_raster(out, args.out)
        return 0

    if args.command == "normalize":
        model = load_checkpoint(args.checkpoint).model
        z, _, _ = normalize(_load_image(args.input), model, args.patch_size)
        save_raster(Image(z.data), args.out)
        return 0

    if args.command == "preset-extract":
        model = load_checkpoint(args.checkpoint).model
        name = args.name or Path(args.style).stem
        preset = extract_preset(_load_image(args.style), model, name)
        save_preset(preset, args.out)
        return 0

    if args.command == "preset-apply":
        model = load_checkpoint(args.checkpoint).model
        preset = load_preset(args.preset)
        z, _, _ = normalize(_load_image(args.input), model, args.patch_size)
        out = stylize(z, preset, model, args.patch_size)
        save_raster(out, args.out)
        return 0

    if args.command == "serve":
        model = load_checkpoint(args.checkpoint).model if args.checkpoint else None
        server = create_server(model, args.host, args.port, args.thumbnail_limit)
        host, port = server.server_address[:2]
        print(f"listening on http://{host}:{port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.server_close()
        return 0

    if args.command == "bench":
        patch_sizes = [int(s) for s in args.sizes.split(",") if s]
        h, w = _parse_image_size(args.image)
        image = make_image(h, w, seed=args.seed)
        records = bench_patch_sweep(image, patch_sizes, repeats=args.repeats,
                                    k=args.k, seed=args.seed)
        csv_text = format_bench_csv(records)
        if args.out:
            Path(args.out).write_text(csv_text)
        else:
            sys.stdout.write(csv_text)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except Exception as exc:  # noqa: BLE001 - single funnel for operational errors
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
