"""Shared test utilities: finite differences, tolerance checks, scalar oracles."""

from __future__ import annotations

import numpy as np


def central_difference(f, arr: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    """Numerical gradient of scalar f() w.r.t. every element of arr (mutated in place)."""
    grad = np.zeros(arr.shape, dtype=np.float64)
    flat = arr.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f()
        flat[i] = orig - eps
        fm = f()
        flat[i] = orig
        grad.reshape(-1)[i] = (fp - fm) / (2.0 * eps)
    return grad


def assert_gradients_close(analytic, numeric, rtol=1e-3, atol=1e-6, label=""):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    err = np.abs(analytic - numeric)
    bound = atol + rtol * np.maximum(np.abs(analytic), np.abs(numeric))
    worst = (err - bound).max()
    assert np.all(err <= bound), (
        f"gradient mismatch{(' for ' + label) if label else ''}: "
        f"worst excess {worst:.3e}, max abs err {err.max():.3e}"
    )


def box_average_oracle(data: np.ndarray, side: int) -> np.ndarray:
    """Naive per-destination-pixel fractional box average (float64 loops)."""
    h, w, _ = data.shape
    out = np.zeros((side, side, 3), dtype=np.float64)
    for i in range(side):
        r0, r1 = i * h / side, (i + 1) * h / side
        for j in range(side):
            c0, c1 = j * w / side, (j + 1) * w / side
            acc = np.zeros(3)
            area = 0.0
            for r in range(int(np.floor(r0)), int(np.ceil(r1))):
                rc = min(r1, r + 1) - max(r0, r)
                if rc <= 0:
                    continue
                for c in range(int(np.floor(c0)), int(np.ceil(c1))):
                    cc = min(c1, c + 1) - max(c0, c)
                    if cc <= 0:
                        continue
                    acc += data[r, c].astype(np.float64) * (rc * cc)
                    area += rc * cc
            out[i, j] = acc / area
    return out


def color_map_oracle(pixels: np.ndarray, p: np.ndarray, t: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Triple-loop scalar evaluation of y = x @ P @ T @ Q per pixel, in float64."""
    n = pixels.shape[0]
    k = p.shape[1]
    out = np.zeros((n, 3), dtype=np.float64)
    for row in range(n):
        e1 = [sum(float(pixels[row, c]) * float(p[c, a]) for c in range(3)) for a in range(k)]
        e2 = [sum(e1[a] * float(t[a, b]) for a in range(k)) for b in range(k)]
        for c in range(3):
            out[row, c] = sum(e2[b] * float(q[b, c]) for b in range(k))
    return out


def primitive_gradient_battery(seed: int = 0):
    """Finite-difference checks for every differentiable tensor primitive."""
    from restyle import autodiff as ad
    from restyle.autodiff import Tape, Tensor

    rng = np.random.default_rng(seed)

    def check(build, arrays, rtol=1e-3, label=""):
        tape = Tape()
        tensors = [Tensor(a, True, np.float64) for a in arrays]
        out = build(tensors, tape)
        w = rng.normal(size=out.data.shape)
        out.grad = w.copy()
        tape.backward()

        def scalar():
            return float((build([Tensor(a) for a in arrays], None).data * w).sum())

        for t, arr in zip(tensors, arrays):
            assert_gradients_close(t.grad, central_difference(scalar, arr),
                                   rtol=rtol, label=label)

    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    check(lambda t, tape: ad.matmul(t[0], t[1], tape), [a, b], rtol=1e-6, label="matmul")

    x = rng.normal(size=(2, 7, 6))
    kernel = rng.normal(size=(3, 2, 3, 3)) * 0.4
    bias = rng.normal(size=3)
    check(lambda t, tape: ad.conv2d(t[0], t[1], t[2], tape), [x, kernel, bias],
          label="conv2d")

    v = rng.normal(size=(5, 4)) + 0.05
    check(lambda t, tape: ad.relu(t[0], tape), [v], label="relu")
    check(lambda t, tape: ad.mean_abs(t[0], tape), [v], label="mean_abs")
    check(lambda t, tape: ad.mean_square(t[0], tape), [v], label="mean_square")

    pool_in = rng.normal(size=(3, 4, 4))
    check(lambda t, tape: ad.global_avg_pool(t[0], tape), [pool_in], label="global_avg_pool")

    lx, lw, lb = rng.normal(size=5), rng.normal(size=(5, 3)), rng.normal(size=3)
    check(lambda t, tape: ad.linear(t[0], t[1], t[2], tape), [lx, lw, lb], label="linear")


def color_map_gradient_battery(seed: int = 0):
    """Finite-difference check of the closed-form kernel adjoints."""
    from restyle.imaging import Image
    from restyle.mapping import ColorMapMatrix, ProjectionPair, color_map_backward

    rng = np.random.default_rng(seed)
    img = Image(rng.uniform(0, 1, size=(3, 3, 3)).astype(np.float32))
    t = ColorMapMatrix(rng.normal(0, 0.4, size=(4, 4)).astype(np.float32))
    proj = ProjectionPair(rng.normal(0, 0.4, size=(3, 4)).astype(np.float32),
                          rng.normal(0, 0.4, size=(4, 3)).astype(np.float32))
    upstream = rng.normal(size=(9, 3))
    dt, dp, dq, dx = color_map_backward(img, t, proj, upstream)
    x64 = img.pixels.astype(np.float64)

    def forward():
        return float(((x64 @ proj.p @ t.values @ proj.q) * upstream).sum())

    assert_gradients_close(dt, central_difference(forward, t.values), rtol=1e-3, label="dT")
    assert_gradients_close(dp, central_difference(forward, proj.p), rtol=1e-3, label="dP")
    assert_gradients_close(dq, central_difference(forward, proj.q), rtol=1e-3, label="dQ")
    assert_gradients_close(dx, central_difference(forward, x64).reshape(img.data.shape),
                           rtol=1e-3, label="dX")


def end_to_end_gradient_check(seed: int = 30):
    """Gradient of the full training objective (k=2, 8x8, float64) vs finite differences."""
    from restyle import autodiff as ad
    from restyle import encoder as enc
    from restyle.augment import make_pair
    from restyle.autodiff import Tape, Tensor
    from restyle.imaging import downsample
    from restyle.model import Model
    from restyle.synth import make_image
    from restyle.training import TrainConfig

    config = TrainConfig(k=2, thumbnail_size=8, widths=(4, 8), batch_size=1,
                         consistency_weight=10.0, seed=0)
    cfg = config.encoder_config()
    model = Model.initialized(cfg)
    rng = np.random.default_rng(seed)
    model.weights.head_d_w += rng.normal(0, 0.2, model.weights.head_d_w.shape).astype(np.float32)
    model.weights.head_r_w += rng.normal(0, 0.2, model.weights.head_r_w.shape).astype(np.float32)

    image = make_image(8, 8, seed=seed + 1)
    sample_i, sample_j = make_pair(image, seed + 2)
    thumbs = [np.ascontiguousarray(downsample(s, 8).data.transpose(2, 0, 1)).astype(np.float64)
              for s in (sample_i, sample_j)]
    pixels = [s.pixels.astype(np.float64) for s in (sample_i, sample_j)]
    params64 = {name: arr.astype(np.float64) for name, arr in model.trainable()}

    def build_loss(tape):
        tensors = {n: Tensor(a, tape is not None, np.float64) for n, a in params64.items()}
        zs, rs = [], []
        for idx in range(2):
            d_flat, r_flat = enc.forward(Tensor(thumbs[idx]), tensors, cfg, tape)
            d = ad.reshape(d_flat, (2, 2), tape)
            rs.append(ad.reshape(r_flat, (2, 2), tape))
            x = Tensor(pixels[idx])
            z = ad.matmul(ad.matmul(ad.matmul(x, tensors["proj_n.p"], tape), d, tape),
                          tensors["proj_n.q"], tape)
            zs.append(z)
        y_i = ad.matmul(ad.matmul(ad.matmul(zs[1], tensors["proj_s.p"], tape), rs[0], tape),
                        tensors["proj_s.q"], tape)
        y_j = ad.matmul(ad.matmul(ad.matmul(zs[0], tensors["proj_s.p"], tape), rs[1], tape),
                        tensors["proj_s.q"], tape)
        l_rec = ad.add(ad.mean_abs(ad.sub(y_i, Tensor(pixels[0]), tape), tape),
                       ad.mean_abs(ad.sub(y_j, Tensor(pixels[1]), tape), tape), tape)
        l_con = ad.mean_square(ad.sub(zs[0], zs[1], tape), tape)
        return ad.add(l_rec, ad.scale(l_con, 10.0, tape), tape), tensors

    tape = Tape()
    total, tensors = build_loss(tape)
    tape.backward(total)

    def loss_value():
        value, _ = build_loss(None)
        return float(value.data)

    for name, arr in params64.items():
        numeric = central_difference(loss_value, arr)
        analytic = tensors[name].grad
        if analytic is None:
            analytic = np.zeros_like(arr)
        assert_gradients_close(analytic, numeric, rtol=1e-3, atol=1e-7, label=name)


def trilinear_oracle(lut, rgb) -> np.ndarray:
    """Scalar 8-corner interpolation for one color; mirrors the cube axis order."""
    n = lut.size
    span = np.maximum(lut.domain_max.astype(np.float64) - lut.domain_min.astype(np.float64), 1e-12)
    t = np.clip((np.asarray(rgb, dtype=np.float64) - lut.domain_min) / span, 0.0, 1.0) * (n - 1)
    i0 = np.minimum(t.astype(int), n - 2)
    f = t - i0
    out = np.zeros(3, dtype=np.float64)
    for db in (0, 1):
        wb = f[2] if db else 1 - f[2]
        for dg in (0, 1):
            wg = f[1] if dg else 1 - f[1]
            for dr in (0, 1):
                wr = f[0] if dr else 1 - f[0]
                corner = lut.table[i0[2] + db, i0[1] + dg, i0[0] + dr].astype(np.float64)
                out += wb * wg * wr * corner
    return out
