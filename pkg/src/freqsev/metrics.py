"""Evaluation metrics: MAE/RMSE, grid errors, ordered Lorenz curve, Gini.

The ordered Lorenz curve compares two premium schedules.  With base
premiums B_i, competing premiums P_i and realized losses L_i, policies are
sorted by the relative premium R_i = P_i / B_i; the curve plots the
cumulative share of the charged (base) premium against the cumulative loss
share at every distinct R.  The Gini index is twice the area between the
curve and the 45-degree line, positive when the curve bows below it, i.e.
when the competing premiums spot policies whose base premium overstates or
understates the risk.  When the base premiums already track expected
losses record by record, no reordering separates the two axes, so every
competing model scores near zero against a well-calibrated base.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["mae", "rmse", "unit_grid", "grid_error", "LorenzCurve", "ordered_lorenz", "gini_index"]


def _paired(pred, actual) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape or pred.size == 0:
        raise ValueError(f"prediction and actual shapes differ or are empty: {pred.shape} vs {actual.shape}")
    return pred, actual


def mae(pred, actual) -> float:
    pred, actual = _paired(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def rmse(pred, actual) -> float:
    pred, actual = _paired(pred, actual)
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def unit_grid(step: float = 0.1) -> np.ndarray:
    """All points of {0, step, ..., 1}^2 as an (k^2, 2) array."""
    axis = np.round(np.arange(0.0, 1.0 + step / 2, step), 12)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def grid_error(est_log_fn, true_log_fn, grid: np.ndarray | None = None) -> tuple[float, float]:
    """(MAE, RMSE) between exp(est) and exp(true) over a covariate grid."""
    if grid is None:
        grid = unit_grid()
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    est = np.exp(np.asarray(est_log_fn(grid), dtype=np.float64))
    true = np.exp(np.asarray(true_log_fn(grid), dtype=np.float64))
    return mae(est, true), rmse(est, true)


@dataclass(frozen=True)
class LorenzCurve:
    """Points on the ordered Lorenz curve from (0, 0) to (1, 1)."""

    premium_share: np.ndarray
    loss_share: np.ndarray

    def __post_init__(self):
        p, l = self.premium_share, self.loss_share
        if p.shape != l.shape or p.ndim != 1 or len(p) < 2:
            raise ValueError("curve needs matching 1-d share arrays with at least two points")


def ordered_lorenz(base_scores, competing_scores, losses) -> LorenzCurve:
    """Ordered Lorenz curve of the competing scores against the base.

    Policies tied on the relative premium are merged into one curve step,
    which makes the curve invariant to the input order.
    """
    b = np.asarray(base_scores, dtype=np.float64)
    p = np.asarray(competing_scores, dtype=np.float64)
    l = np.asarray(losses, dtype=np.float64)
    if not (b.shape == p.shape == l.shape) or b.ndim != 1 or b.size == 0:
        raise ValueError("scores and losses must be equal-length nonempty vectors")
    if np.any(b <= 0):
        raise ValueError("base scores must be positive")
    r = p / b
    order = np.argsort(r, kind="stable")
    r_sorted = r[order]
    # group ties on R into single steps
    boundaries = np.nonzero(np.diff(r_sorted))[0]
    ends = np.append(boundaries, len(r_sorted) - 1)
    cum_b = np.cumsum(b[order])[ends]
    cum_l = np.cumsum(l[order])[ends]
    premium_share = np.concatenate([[0.0], cum_b / cum_b[-1]])
    loss_share = np.concatenate([[0.0], cum_l / cum_l[-1]])
    premium_share[-1] = 1.0
    loss_share[-1] = 1.0
    return LorenzCurve(premium_share=premium_share, loss_share=loss_share)


def gini_index(curve: LorenzCurve) -> float:
    """Twice the area between the curve and the line of equality.

    Trapezoidal integration over the curve points; positive when the curve
    lies below the diagonal.
    """
    x = curve.premium_share
    y = curve.loss_share
    auc = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
    return 1.0 - 2.0 * auc
