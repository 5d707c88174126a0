#!/usr/bin/env python3
"""Pilot runs that freeze the acceptance thresholds into tests/thresholds.json.

Runs the desk-scale training, the k sweep, and the patch-size sweep, prints
every measurement, and writes thresholds with comfortable margins. Re-run when
the training recipe changes; commit the resulting thresholds.json.
"""

import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import desksetup  # noqa: E402
from restyle.bench import bench_patch_sweep  # noqa: E402
from restyle.synth import make_image  # noqa: E402
from restyle.training import train  # noqa: E402


def desk_run():
    print("== desk-scale training ==")
    with tempfile.TemporaryDirectory() as tmp:
        desksetup.build_corpus(tmp)
        start = time.perf_counter()
        ckpt, reports = train(desksetup.DESK_CONFIG, tmp)
        wall = time.perf_counter() - start
    print(f"trained {desksetup.DESK_CONFIG.steps} steps in {wall/60:.1f} min")

    first, last = desksetup.smoothed([r.l_rec for r in reports])
    print(f"L_rec smoothed: first window {first:.5f} -> last window {last:.5f} "
          f"(ratio {last/first:.3f})")

    model = ckpt.model
    holdout = desksetup.holdout_images()
    self_err = desksetup.self_transfer_errors(model, holdout)
    print(f"self-transfer MAE: mean {self_err.mean():.5f} max {self_err.max():.5f}")

    l_con = desksetup.holdout_consistency(model, holdout)
    print(f"holdout consistency MSE: mean {l_con.mean():.6f} max {l_con.max():.6f}")

    frac = desksetup.anti_collapse_fraction(model)
    print(f"anti-collapse fraction: {frac:.2f}")

    return {
        "desk_minutes": round(wall / 60, 2),
        "l_rec_first": first,
        "l_rec_last": last,
        "self_transfer_mae_mean": float(self_err.mean()),
        "self_transfer_mae_max": float(self_err.max()),
        "holdout_consistency_max": float(l_con.max()),
        "anti_collapse_fraction": frac,
    }


def ablation_run():
    print("== k ablation ==")
    errors = {}
    with tempfile.TemporaryDirectory() as tmp:
        desksetup.build_corpus(tmp)
        for k in desksetup.ABLATION_KS:
            start = time.perf_counter()
            ckpt, _ = train(desksetup.ablation_config(k), tmp)
            err = desksetup.ablation_holdout_error(ckpt.model)
            print(f"k={k}: holdout rec error {err:.5f} "
                  f"({time.perf_counter()-start:.0f}s)")
            errors[k] = err
    return errors


def bench_run():
    print("== patch sweep on 2048^2 ==")
    image = make_image(2048, 2048, seed=0)
    sweeps = []
    for _ in range(2):
        records = bench_patch_sweep(image, [256, 512, 1024, 2048], repeats=7)
        for r in records:
            print(f"patch {r.patch_size}: {r.seconds:.3f}s peak {r.peak_bytes/1e6:.1f} MB")
        sweeps.append(records)
        print("--")
    return sweeps[-1]


def main():
    stats = desk_run()
    ablation = ablation_run()
    records = bench_run()

    margin = 1.6  # slack over the pilot's worst case; regressions still trip it
    thresholds = {
        "pilot": stats,
        "ablation_errors": {str(k): v for k, v in ablation.items()},
        "self_transfer_mae": round(stats["self_transfer_mae_max"] * margin, 5),
        "holdout_consistency_mse": round(stats["holdout_consistency_max"] * margin, 6),
        # "non-increasing within measurement noise": interleaved medians on this
        # hardware drift by a few percent run to run
        "bench_time_tolerance": 0.08,
        "bench_seconds": {str(r.patch_size): round(r.seconds, 4) for r in records},
    }
    desksetup.THRESHOLDS_PATH.write_text(json.dumps(thresholds, indent=2) + "\n")
    print(f"wrote {desksetup.THRESHOLDS_PATH}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
