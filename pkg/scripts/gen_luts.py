#!/usr/bin/env python3
"""Regenerate the bundled .cube files under src/restyle/luts/.

Each LUT samples a smooth closed-form color transform on a 9^3 lattice.
They stand in for a large external LUT collection during pair synthesis,
so the goal is variety of plausible looks, not any specific aesthetic.
"""

import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "restyle" / "luts"
N = 9
LUMA = np.array([0.2126, 0.7152, 0.0722])


def lattice():
    axis = np.linspace(0.0, 1.0, N)
    b, g, r = np.meshgrid(axis, axis, axis, indexing="ij")
    return np.stack([r, g, b], axis=-1).reshape(-1, 3)


def smoothstep(x):
    return x * x * (3 - 2 * x)


def saturate(rgb, s):
    y = (rgb @ LUMA)[:, None]
    return y + s * (rgb - y)


def warm(rgb):
    out = rgb * np.array([1.12, 1.0, 0.86])
    return out ** np.array([0.95, 1.0, 1.05])


def cool(rgb):
    out = rgb * np.array([0.88, 0.98, 1.14])
    return out ** np.array([1.06, 1.0, 0.94])


def faded(rgb):
    lifted = 0.08 + 0.84 * rgb
    return saturate(lifted, 0.75)


def punchy(rgb):
    return saturate(smoothstep(rgb), 1.25)


def sepia(rgb):
    m = np.array([
        [0.393, 0.349, 0.272],
        [0.769, 0.686, 0.534],
        [0.189, 0.168, 0.131],
    ])
    return 0.75 * (rgb @ m) + 0.25 * rgb


def night(rgb):
    dimmed = rgb ** 1.25 * np.array([0.85, 0.9, 1.1])
    return saturate(dimmed, 0.85)


LOOKS = {
    "warm": warm,
    "cool": cool,
    "faded": faded,
    "punchy": punchy,
    "sepia": sepia,
    "night": night,
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    src = lattice()
    for name, fn in LOOKS.items():
        out = np.clip(fn(src), 0.0, 1.0)
        lines = [f'TITLE "{name}"', f"LUT_3D_SIZE {N}",
                 "DOMAIN_MIN 0 0 0", "DOMAIN_MAX 1 1 1"]
        lines += [f"{r:.6f} {g:.6f} {b:.6f}" for r, g, b in out]
        (OUT / f"{name}.cube").write_text("\n".join(lines) + "\n")
        print(f"wrote {name}.cube ({N}^3)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
