"""Central finite-difference verification of analytic gradients.

Max pooling and ReLU are piecewise-linear: a finite-difference step that
crosses an argmax switch or a sign change measures a one-sided slope and
is meaningless.  Layer-level checks therefore precondition inputs to keep
a margin around those kinks; end-to-end checks detect crossings via the
network's kink signature and skip affected coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network


def rel_error(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return np.abs(a - b) / scale


def separate_relu_kinks(x: np.ndarray, margin: float) -> np.ndarray:
    """Push values whose magnitude is below ``margin`` away from zero."""
    out = x.copy()
    small = np.abs(out) < margin
    out[small] = np.where(out[small] >= 0, margin, -margin)
    return out


def separate_pool_ties(x: np.ndarray, gap: float) -> np.ndarray:
    """Give each 2x2 window a unique maximum with margin ``gap``."""
    out = x.copy()
    B, C, H, W = out.shape
    H2, W2 = H // 2, W // 2
    win = out[:, :, : 2 * H2, : 2 * W2].reshape(B, C, H2, 2, W2, 2)
    win = np.ascontiguousarray(win.transpose(0, 1, 2, 4, 3, 5)).reshape(B, C, H2, W2, 4)
    srt = np.sort(win, axis=-1)
    needs = (srt[..., 3] - srt[..., 2]) < gap
    idx = win.argmax(axis=-1)
    bump = np.zeros_like(win)
    np.put_along_axis(bump, idx[..., None], (2 * gap) * needs[..., None], axis=-1)
    win = win + bump
    back = win.reshape(B, C, H2, W2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(B, C, 2 * H2, 2 * W2)
    out[:, :, : 2 * H2, : 2 * W2] = back
    return out


@dataclass
class CheckReport:
    max_rel_err: float
    n_checked: int
    n_skipped: int

    def ok(self, tol: float) -> bool:
        return self.n_checked > 0 and self.max_rel_err < tol


def check_layer(layer, x: np.ndarray, rng: np.random.Generator,
                h: float = 1e-3) -> CheckReport:
    """Finite-difference check of one layer against a random projection loss.

    L = sum(out * R) for fixed R, so dL/dout = R and the layer's backward
    pass supplies dL/dx and parameter gradients directly.
    """
    x = x.astype(np.float64)
    out0 = layer.forward(x, train=True)
    R = rng.standard_normal(out0.shape)

    for p in layer.params():
        p.grad[...] = 0.0
    layer.forward(x, train=True)
    dx = layer.backward(R.copy())
    analytic = {("__input__",): dx.copy()}
    for p in layer.params():
        analytic[(p.name,)] = p.grad.copy()

    worst, checked, skipped = 0.0, 0, 0

    def loss_at(xv) -> float:
        return float((layer.forward(xv, train=True) * R).sum())

    flat_x = x.reshape(-1)
    num_dx = np.zeros_like(flat_x)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        lp = loss_at(x)
        flat_x[i] = orig - h
        lm = loss_at(x)
        flat_x[i] = orig
        num_dx[i] = (lp - lm) / (2 * h)
    err = rel_error(analytic[("__input__",)].reshape(-1), num_dx)
    worst = max(worst, float(err.max()))
    checked += num_dx.size

    for p in layer.params():
        flat = p.value.reshape(-1)
        num = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp = loss_at(x)
            flat[i] = orig - h
            lm = loss_at(x)
            flat[i] = orig
            num[i] = (lp - lm) / (2 * h)
        err = rel_error(analytic[(p.name,)].reshape(-1), num)
        worst = max(worst, float(err.max()))
        checked += num.size
    return CheckReport(worst, checked, skipped)


def check_network(net: Network, x: np.ndarray, targets: np.ndarray, loss_fn,
                  h: float = 1e-3, weights: np.ndarray | None = None,
                  max_coords_per_param: int | None = None,
                  rng: np.random.Generator | None = None) -> CheckReport:
    """End-to-end parameter-gradient check through the full loss.

    Coordinates whose +-h perturbation flips a pooling argmax or a ReLU
    sign are skipped (the loss is not differentiable across those points).
    """
    rng = rng or np.random.default_rng(0)
    x = x.astype(net.dtype)
    net.set_dropout_frozen(True)

    def loss_only() -> float:
        out = net.forward(x, train=True)
        if weights is None:
            loss, _ = loss_fn(out, targets)
        else:
            loss, _ = loss_fn(out, targets, weights)
        return loss

    out = net.forward(x, train=True)
    if weights is None:
        _, grad = loss_fn(out, targets)
    else:
        _, grad = loss_fn(out, targets, weights)
    base_sig = net.kink_signature()
    net.zero_grads()
    net.backward(grad)
    analytic = {p.name: p.grad.copy() for p in net.params()}

    worst, checked, skipped = 0.0, 0, 0
    for p in net.params():
        flat = p.value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords_per_param is not None and flat.size > max_coords_per_param:
            coords = rng.choice(flat.size, size=max_coords_per_param, replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            lp = loss_only()
            sig_p = net.kink_signature()
            flat[i] = orig - h
            lm = loss_only()
            sig_m = net.kink_signature()
            flat[i] = orig
            if sig_p != base_sig or sig_m != base_sig:
                skipped += 1
                continue
            num = (lp - lm) / (2 * h)
            worst = max(worst, float(rel_error(np.array(analytic[p.name].reshape(-1)[i]),
                                               np.array(num))))
            checked += 1
    net.set_dropout_frozen(False)
    return CheckReport(worst, checked, skipped)
