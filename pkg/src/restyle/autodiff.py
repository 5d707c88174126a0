"""Minimal dense tensors with a reverse-mode gradient tape.

Just enough machinery for the thumbnail encoder and the color-map kernel:
matmul, 3x3/stride-2 convolution, relu, global average pooling, affine maps,
elementwise arithmetic, and the reductions the training losses need.

All training math runs in float32; float64 exists for finite-difference
verification. Recording and backward are single-threaded, and adjoints are
accumulated in reverse execution order, so replaying the same tape with the
same inputs is bitwise deterministic.
"""

from __future__ import annotations

import numpy as np


class Tensor:
    """A dense array plus its accumulated adjoint."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def add_grad(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"


class Tape:
    """Ordered record of executed ops, replayed once, in reverse, by backward()."""

    def __init__(self):
        self._records = []

    def record(self, backward_fn):
        self._records.append(backward_fn)

    def backward(self, loss: Tensor | None = None):
        """Replay adjoints in reverse execution order.

        With a scalar loss, seeds its gradient to 1 first; with None, replays
        from whatever output gradients the caller has already set.
        """
        if loss is not None:
            if loss.data.size != 1:
                raise ValueError("backward() expects a scalar loss")
            loss.grad = np.ones_like(loss.data)
        for fn in reversed(self._records):
            fn()

    def __len__(self):
        return len(self._records)


def _needs(*tensors) -> bool:
    return any(t.requires_grad for t in tensors)


def _result(data, tape, inputs, backward_fn):
    out = Tensor(data, requires_grad=_needs(*inputs))
    if tape is not None and out.requires_grad:
        fn = backward_fn(out)

        def guarded():
            # ops whose output never received a gradient contribute nothing
            if out.grad is not None:
                fn()

        tape.record(guarded)
    return out


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"add: shape mismatch {a.shape} vs {b.shape}")

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad)
            if b.requires_grad:
                b.add_grad(out.grad)
        return fn

    return _result(a.data + b.data, tape, (a, b), bw)


def sub(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"sub: shape mismatch {a.shape} vs {b.shape}")

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad)
            if b.requires_grad:
                b.add_grad(-out.grad)
        return fn

    return _result(a.data - b.data, tape, (a, b), bw)


def scale(a: Tensor, s: float, tape: Tape | None = None) -> Tensor:
    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad * s)
        return fn

    return _result(a.data * s, tape, (a,), bw)


def shift(a: Tensor, c: float, tape: Tape | None = None) -> Tensor:
    """Add a constant to every element."""

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad)
        return fn

    return _result(a.data + c, tape, (a,), bw)


def matmul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def bw(out):
        def fn():
            g = out.grad
            if a.requires_grad:
                a.add_grad(g @ b.data.T)
            if b.requires_grad:
                b.add_grad(a.data.T @ g)
        return fn

    return _result(a.data @ b.data, tape, (a, b), bw)


def relu(a: Tensor, tape: Tape | None = None) -> Tensor:
    mask = a.data > 0

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad * mask)
        return fn

    return _result(np.where(mask, a.data, 0), tape, (a,), bw)


def reshape(a: Tensor, shape, tape: Tape | None = None) -> Tensor:
    old = a.shape

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(out.grad.reshape(old))
        return fn

    return _result(a.data.reshape(shape), tape, (a,), bw)


def global_avg_pool(a: Tensor, tape: Tape | None = None) -> Tensor:
    """(c, h, w) -> (c,) spatial mean per channel."""
    if a.data.ndim != 3:
        raise ValueError(f"global_avg_pool expects (c, h, w), got {a.shape}")
    c, h, w = a.shape
    n = h * w

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(np.broadcast_to(out.grad[:, None, None] / n, a.shape).astype(a.dtype))
        return fn

    return _result(a.data.mean(axis=(1, 2)), tape, (a,), bw)


def linear(x: Tensor, w: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """x (n,) times w (n, m) plus b (m,)."""
    if x.data.ndim != 1 or w.data.ndim != 2 or x.shape[0] != w.shape[0] or b.shape != (w.shape[1],):
        raise ValueError(f"linear: incompatible shapes x{x.shape} w{w.shape} b{b.shape}")

    def bw(out):
        def fn():
            g = out.grad
            if x.requires_grad:
                x.add_grad(w.data @ g)
            if w.requires_grad:
                w.add_grad(np.outer(x.data, g))
            if b.requires_grad:
                b.add_grad(g)
        return fn

    return _result(x.data @ w.data + b.data, tape, (x, w, b), bw)


def _im2col(x: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Unfold a zero-padded (c, h+2, w+2) input into (c*9, out_h*out_w) columns."""
    c = x.shape[0]
    cols = np.empty((c, 9, out_h, out_w), dtype=x.dtype)
    for i in range(3):
        for j in range(3):
            cols[:, 3 * i + j] = x[:, i : i + 2 * out_h : 2, j : j + 2 * out_w : 2]
    return cols.reshape(c * 9, out_h * out_w)


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor, tape: Tape | None = None) -> Tensor:
    """3x3 cross-correlation, stride 2, zero pad 1: (c_in, h, w) -> (c_out, ceil(h/2), ceil(w/2))."""
    if x.data.ndim != 3 or kernel.data.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise ValueError(f"conv2d: bad shapes x{x.shape} kernel{kernel.shape}")
    c_in, h, w = x.shape
    c_out = kernel.shape[0]
    if kernel.shape[1] != c_in or bias.shape != (c_out,):
        raise ValueError(f"conv2d: kernel/bias mismatch kernel{kernel.shape} bias{bias.shape}")
    out_h = (h + 1) // 2
    out_w = (w + 1) // 2
    padded = np.zeros((c_in, h + 2, w + 2), dtype=x.dtype)
    padded[:, 1 : 1 + h, 1 : 1 + w] = x.data
    cols = _im2col(padded, out_h, out_w)
    kmat = kernel.data.reshape(c_out, c_in * 9)
    out = (kmat @ cols + bias.data[:, None]).reshape(c_out, out_h, out_w)

    def bw(out_t):
        def fn():
            g = out_t.grad.reshape(c_out, out_h * out_w)
            if bias.requires_grad:
                bias.add_grad(g.sum(axis=1))
            if kernel.requires_grad:
                kernel.add_grad((g @ cols.T).reshape(kernel.shape))
            if x.requires_grad:
                gcols = (kmat.T @ g).reshape(c_in, 9, out_h, out_w)
                gpad = np.zeros_like(padded)
                for i in range(3):
                    for j in range(3):
                        gpad[:, i : i + 2 * out_h : 2, j : j + 2 * out_w : 2] += gcols[:, 3 * i + j]
                x.add_grad(gpad[:, 1 : 1 + h, 1 : 1 + w])
        return fn

    return _result(out, tape, (x, kernel, bias), bw)


def mean_abs(a: Tensor, tape: Tape | None = None) -> Tensor:
    """Mean absolute value over all elements (subgradient 0 at 0)."""
    n = a.data.size
    sign = np.sign(a.data)

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(sign * (out.grad / n))
        return fn

    return _result(np.abs(a.data).mean(), tape, (a,), bw)


def mean_square(a: Tensor, tape: Tape | None = None) -> Tensor:
    """Mean of squared elements over all elements."""
    n = a.data.size

    def bw(out):
        def fn():
            if a.requires_grad:
                a.add_grad(a.data * (2.0 * out.grad / n))
        return fn

    return _result((a.data * a.data).mean(), tape, (a,), bw)


class AdamState:
    """First/second moment buffers plus the step counter, one slot per parameter."""

    def __init__(self, params):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0


def adam_step(params, grads, state: AdamState, lr: float = 3e-4,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """One in-place Adam update with bias correction; returns the advanced state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("adam_step: params/grads/state length mismatch")
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValueError(f"adam_step: shape mismatch at slot {i}: {p.shape} vs {g.shape}")
        m = state.m[i]
        v = state.v[i]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        p -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype)
    return state
