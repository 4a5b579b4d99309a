"""First-order optimizers and learning-rate schedules.

Optimizers update parameter dictionaries in place.  Gradients are expected
to be already averaged over the mini-batch; no extra 1/b scaling happens
here.  AMSGrad follows the original formulation: no bias correction and a
per-coordinate running maximum of the second moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Sgd", "Adam", "make_optimizer", "StepDecay", "PlateauDecay", "ConstantLr"]


def _check_finite(grads: dict[str, np.ndarray]) -> None:
    for key, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for parameter '{key}'")


class Sgd:
    """Plain stochastic gradient descent: w <- w - lr * g."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float | None = None):
        _check_finite(grads)
        lr = self.learning_rate if lr is None else lr
        for key, g in grads.items():
            params[key] -= lr * g


class Adam:
    """Adam, optionally in its AMSGrad variant.

    Plain Adam applies the usual bias correction.  With ``amsgrad=True``
    the update is m/(sqrt(max-v) + eps) without bias correction, and the
    running maximum ``vhat`` is nondecreasing per coordinate.
    """

    def __init__(
        self,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        amsgrad: bool = False,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.amsgrad = amsgrad
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.vhat: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float | None = None):
        _check_finite(grads)
        lr = self.learning_rate if lr is None else lr
        self.step_count += 1
        for key, g in grads.items():
            if key not in self.m:
                self.m[key] = np.zeros_like(g, dtype=np.float64)
                self.v[key] = np.zeros_like(g, dtype=np.float64)
                if self.amsgrad:
                    self.vhat[key] = np.zeros_like(g, dtype=np.float64)
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            if self.amsgrad:
                np.maximum(self.vhat[key], v, out=self.vhat[key])
                params[key] -= lr * m / (np.sqrt(self.vhat[key]) + self.eps)
            else:
                m_hat = m / (1.0 - self.beta1**self.step_count)
                v_hat = v / (1.0 - self.beta2**self.step_count)
                params[key] -= lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: str, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    kind = kind.lower()
    if kind == "sgd":
        return Sgd(learning_rate)
    if kind == "adam":
        return Adam(learning_rate, beta1, beta2, eps, amsgrad=False)
    if kind == "amsgrad":
        return Adam(learning_rate, beta1, beta2, eps, amsgrad=True)
    raise ValueError(f"unknown optimizer '{kind}' (expected sgd, adam or amsgrad)")


@dataclass(frozen=True)
class ConstantLr:
    initial_lr: float

    def lr_for_epoch(self, epoch: int) -> float:
        return self.initial_lr


@dataclass(frozen=True)
class StepDecay:
    """Learning rate initial * factor^(epoch // every)."""

    initial_lr: float
    factor: float = 0.9
    every: int = 5

    def lr_for_epoch(self, epoch: int) -> float:
        if epoch < 0:
            raise ValueError("epoch must be non-negative")
        return self.initial_lr * self.factor ** (epoch // self.every)


@dataclass
class PlateauDecay:
    """Decay the learning rate when the monitored loss stops improving.

    After ``patience`` consecutive epochs without improvement over the best
    loss seen so far, the rate is multiplied by ``factor`` (and training is
    asked to stop when ``early_stop`` is set).  Call :meth:`observe` once
    per epoch with the monitored loss; it returns True when training should
    terminate.
    """

    initial_lr: float
    factor: float = 0.5
    patience: int = 5
    early_stop: bool = False
    lr: float = field(init=False)
    best: float = field(init=False, default=np.inf)
    bad_epochs: int = field(init=False, default=0)

    def __post_init__(self):
        self.lr = self.initial_lr

    def lr_for_epoch(self, epoch: int) -> float:
        return self.lr

    def observe(self, loss: float) -> bool:
        if loss < self.best:
            self.best = loss
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        if self.bad_epochs >= self.patience:
            self.lr *= self.factor
            self.bad_epochs = 0
            return self.early_stop
        return False
