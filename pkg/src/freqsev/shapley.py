"""Shapley-value attribution for trained mean functions.

The coalition value of a feature subset is the interventional expectation
over a background sample: features inside the subset take their values
from the record being explained, the rest come from the background record,
and the model outputs are averaged over the background.  Exact attribution
enumerates all 2^p coalitions of the p feature groups and applies the
weighted-subset formula

    phi_i = sum over S not containing i of
            |S|! (p - |S| - 1)! / p! * (v(S + i) - v(S)),

so the base value v(empty) plus all attributions reproduces the model
output exactly.  One-hot blocks are attributed as a single group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Attribution", "shapley_exact", "shapley_sampled", "global_importance"]

MAX_EXACT_GROUPS = 20
_MASKS_PER_BATCH = 2048


@dataclass(frozen=True)
class Attribution:
    """Base value, per-group attributions and the explained output."""

    base_value: float
    values: np.ndarray
    model_output: float
    std_errors: np.ndarray | None = None


def _normalize_groups(groups, n_features: int) -> list[np.ndarray]:
    if groups is None:
        return [np.asarray([j]) for j in range(n_features)]
    out = []
    seen: set[int] = set()
    for g in groups:
        idx = np.atleast_1d(np.asarray(g, dtype=np.int64))
        if np.any(idx < 0) or np.any(idx >= n_features):
            raise ValueError(f"feature group {g} is out of range for {n_features} features")
        if seen & set(idx.tolist()):
            raise ValueError("feature groups must be disjoint")
        seen.update(idx.tolist())
        out.append(idx)
    if not out:
        raise ValueError("need at least one feature group")
    return out


def _prepare(x, background, groups):
    x = np.asarray(x, dtype=np.float64).ravel()
    background = np.asarray(background, dtype=np.float64)
    if background.ndim != 2 or background.shape[0] == 0:
        raise ValueError("background must be a nonempty (records, features) array")
    if background.shape[1] != x.size:
        raise ValueError("background feature count does not match the record")
    return x, background, _normalize_groups(groups, x.size)


def _coalition_values(value_fn, x, background, groups) -> np.ndarray:
    """v(S) for every coalition bitmask, batching model calls."""
    p = len(groups)
    n_bg = background.shape[0]
    v = np.empty(2**p)
    for start in range(0, 2**p, _MASKS_PER_BATCH):
        masks = range(start, min(start + _MASKS_PER_BATCH, 2**p))
        stacked = np.repeat(background, len(masks), axis=0).reshape(n_bg, len(masks), -1)
        for j, mask in enumerate(masks):
            for i in range(p):
                if mask >> i & 1:
                    stacked[:, j, groups[i]] = x[groups[i]]
        outputs = np.asarray(value_fn(stacked.reshape(n_bg * len(masks), -1)))
        v[list(masks)] = outputs.reshape(n_bg, len(masks)).mean(axis=0)
    return v


def shapley_exact(value_fn, x, background, groups=None) -> Attribution:
    """Exact Shapley attribution by full coalition enumeration.

    ``value_fn`` maps a (records, features) matrix to outputs; ``x`` is the
    record to explain and ``background`` the reference sample.  Limited to
    20 groups; use :func:`shapley_sampled` beyond that.
    """
    x, background, groups = _prepare(x, background, groups)
    p = len(groups)
    if p > MAX_EXACT_GROUPS:
        raise ValueError(
            f"{p} feature groups need 2^{p} coalitions; use shapley_sampled for large p"
        )
    v = _coalition_values(value_fn, x, background, groups)
    fact = [math.factorial(k) for k in range(p + 1)]
    weight = [fact[s] * fact[p - s - 1] / fact[p] for s in range(p)]
    phi = np.zeros(p)
    for mask in range(2**p):
        size = mask.bit_count()
        if size == p:
            continue
        w = weight[size]
        for i in range(p):
            if not mask >> i & 1:
                phi[i] += w * (v[mask | (1 << i)] - v[mask])
    output = float(np.asarray(value_fn(x[None, :]))[0])
    return Attribution(base_value=float(v[0]), values=phi, model_output=output)


def shapley_sampled(
    value_fn, x, background, groups=None, n_permutations: int = 200, seed=0
) -> Attribution:
    """Permutation-sampling estimate of the Shapley attributions.

    Each random permutation contributes one marginal-contribution sample
    per group; the estimate is unbiased and deterministic under the seed.
    Standard errors are the per-group sample standard error of the mean.
    """
    if n_permutations < 100:
        raise ValueError(f"need at least 100 permutations, got {n_permutations}")
    x, background, groups = _prepare(x, background, groups)
    p = len(groups)
    rng = np.random.default_rng(seed)
    base = float(np.asarray(value_fn(background)).mean())
    samples = np.empty((n_permutations, p))
    for k in range(n_permutations):
        perm = rng.permutation(p)
        z = background.copy()
        prev = base
        for i in perm:
            z[:, groups[i]] = x[groups[i]]
            cur = float(np.asarray(value_fn(z)).mean())
            samples[k, i] = cur - prev
            prev = cur
    phi = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(n_permutations)
    output = float(np.asarray(value_fn(x[None, :]))[0])
    return Attribution(base_value=base, values=phi, model_output=output, std_errors=se)


def global_importance(attributions: list[Attribution]) -> np.ndarray:
    """Mean absolute attribution per feature group across records."""
    if not attributions:
        raise ValueError("need at least one attribution")
    stacked = np.stack([a.values for a in attributions])
    return np.mean(np.abs(stacked), axis=0)
