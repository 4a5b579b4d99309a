"""Shared helpers for the test suite."""

import numpy as np


def finite_difference_gradients(loss_fn, params: dict, step: float = 1e-6) -> dict:
    """Central-difference gradients of ``loss_fn()`` for every entry of every
    array in ``params``; the arrays are perturbed in place and restored."""
    grads = {}
    for key, arr in params.items():
        arr = np.asarray(arr)
        g = np.zeros_like(arr, dtype=np.float64)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index if arr.ndim else ...
            old = float(arr[ix]) if arr.ndim else float(arr)
            arr[ix] = old + step
            f_plus = loss_fn()
            arr[ix] = old - step
            f_minus = loss_fn()
            arr[ix] = old
            if arr.ndim:
                g[ix] = (f_plus - f_minus) / (2.0 * step)
            else:
                g[...] = (f_plus - f_minus) / (2.0 * step)
        grads[key] = g
    return grads


def max_relative_gradient_error(analytic: dict, numeric: dict, floor: float = 1e-8) -> float:
    """max over parameters of |analytic - numeric| / (|analytic| + floor)."""
    worst = 0.0
    for key, num in numeric.items():
        ana = np.asarray(analytic[key], dtype=np.float64)
        rel = np.abs(ana - num) / (np.abs(ana) + floor)
        worst = max(worst, float(rel.max()))
    return worst
