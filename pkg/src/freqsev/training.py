"""Likelihood objectives and joint estimation of networks and scalars.

The frequency objective is the mean negative log-likelihood of the claim
counts with mean t * exp(F(x)); for the zero-inflated family the
structural-zero probability pi = sigmoid(raw_pi) trains jointly with the
network, and the count-zero branch uses log(pi + (1-pi) exp(-lam)) in
log-sum-exp form.

The severity objective is the mean negative log-likelihood of the average
severity given the claim count, with mean exp(S(x) + gamma n) and
effective dispersion phi / n; it is fitted on the records with at least
one claim, and gamma plus phi = raw_phi^2 train jointly with the network.

Baselines use the same trainers with zero hidden layers (affine predictor
with intercept); the independent variant freezes gamma at 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import digamma, gammaln

from . import moments
from .data import Dataset, DataSchema, PreprocMeta
from .families import Gamma, InverseGaussian, Normal, Poisson, ZeroInflatedPoisson
from .network import (
    EVAL_MODE,
    ForwardMode,
    MlpParams,
    mlp_backward,
    mlp_forward,
    mlp_init,
    transform_positive,
    transform_positive_grad,
    transform_unit,
    transform_unit_grad,
)
from .optim import ConstantLr, PlateauDecay, StepDecay, make_optimizer

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "FitResult",
    "TrainingDiverged",
    "FrequencySeverityModel",
    "Predictions",
    "frequency_nll_and_grads",
    "severity_nll_and_grads",
    "fit_frequency",
    "fit_severity",
    "fit_model",
    "fit_glm",
    "fit_dglm",
    "predict",
]

COUNT_KINDS = ("poisson", "zip")
SEVERITY_KINDS = ("gamma", "inverse_gaussian", "normal")


class TrainingDiverged(ArithmeticError):
    """Loss became non-finite; carries the history collected so far."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one network fit."""

    hidden_dims: tuple[int, ...] = (25, 25)
    epochs: int = 50
    batch_size: int = 512
    optimizer: str = "amsgrad"
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr_schedule: str = "step"  # "constant" | "step" | "plateau"
    lr_decay_factor: float = 0.9
    lr_decay_every: int = 5
    plateau_patience: int = 5
    plateau_factor: float = 0.5
    early_stop: bool = False
    dropout_rate: float = 0.0
    batch_norm: bool = False
    validation_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.lr_schedule not in ("constant", "step", "plateau"):
            raise ValueError(f"unknown lr schedule '{self.lr_schedule}'")

    def make_schedule(self):
        if self.lr_schedule == "step":
            return StepDecay(self.learning_rate, self.lr_decay_factor, self.lr_decay_every)
        if self.lr_schedule == "plateau":
            return PlateauDecay(
                self.learning_rate, self.plateau_factor, self.plateau_patience, self.early_stop
            )
        return ConstantLr(self.learning_rate)

    @classmethod
    def benchmark_frequency(cls, seed: int = 0) -> "TrainConfig":
        """Frequency config for the synthetic benchmark: 2x25 net, AMSGrad,
        lr 0.01 decaying by 0.9 every 5 epochs, batch 512, 50 epochs."""
        return cls(
            hidden_dims=(25, 25),
            epochs=50,
            batch_size=512,
            optimizer="amsgrad",
            learning_rate=0.01,
            lr_schedule="step",
            lr_decay_factor=0.9,
            lr_decay_every=5,
            seed=seed,
        )

    @classmethod
    def benchmark_severity(cls, seed: int = 0) -> "TrainConfig":
        """Severity config for the synthetic benchmark: 2x25 net, AMSGrad,
        lr 0.02, 50 epochs.

        The severity fit sees only the claim records (roughly 57% of the
        data) and its per-record scores scale with the claim count, so it
        uses half the frequency batch (mirroring the halved severity batch
        of the reference real-data setup) and a 0.8 decay so the endgame
        anneals; with the frequency settings verbatim the fit oscillates
        near the optimum and its grid error roughly doubles.
        """
        return cls(
            hidden_dims=(25, 25),
            epochs=50,
            batch_size=256,
            optimizer="amsgrad",
            learning_rate=0.02,
            lr_schedule="step",
            lr_decay_factor=0.8,
            lr_decay_every=5,
            seed=seed,
        )


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    lr: float
    val_loss: float | None = None
    pi: float | None = None
    gamma: float | None = None
    phi: float | None = None


@dataclass
class FitResult:
    net: MlpParams
    history: list[EpochRecord]


def _finite_or_raise(losses: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(losses)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise FloatingPointError(f"{what} loss is non-finite at batch record {idx}")


def frequency_nll_and_grads(
    net: MlpParams,
    x: np.ndarray,
    n: np.ndarray,
    t: np.ndarray,
    count_kind: str = "zip",
    mode: ForwardMode = EVAL_MODE,
    rng: np.random.Generator | None = None,
    want_grads: bool = True,
):
    """Mean count NLL over a batch and its exact gradients.

    Returns (loss, grads) where grads covers every trainable array of the
    network including ``raw_pi`` for the zero-inflated family.
    """
    if len(n) == 0:
        raise ValueError("batch must be nonempty")
    if np.any(t <= 0):
        raise ValueError("exposures must be positive")
    f_out, cache = mlp_forward(net, x, mode, rng)
    lam = t * np.exp(f_out)
    m = len(n)
    if count_kind == "poisson":
        losses = lam - n * np.log(lam) + gammaln(n + 1.0)
        _finite_or_raise(losses, "frequency")
        if not want_grads:
            return float(losses.mean()), None
        d_f = (lam - n) / m
        grads = mlp_backward(net, cache, d_f)
    elif count_kind == "zip":
        raw = float(net.aux["raw_pi"])
        pi = float(transform_unit(raw))
        log_pi = -np.logaddexp(0.0, -raw)
        log_1mpi = -np.logaddexp(0.0, raw)
        zero = n == 0
        log_p0 = np.logaddexp(log_pi, log_1mpi - lam)
        losses = np.where(
            zero,
            -log_p0,
            -(log_1mpi - lam + n * np.log(lam) - gammaln(n + 1.0)),
        )
        _finite_or_raise(losses, "frequency")
        if not want_grads:
            return float(losses.mean()), None
        p0 = np.exp(log_p0)
        # d loss / d F: lam (1-pi) e^{-lam} / p0 on zeros, lam - n otherwise
        w = np.exp(log_1mpi - lam - log_p0)
        d_f = np.where(zero, lam * w, lam - n) / m
        grads = mlp_backward(net, cache, d_f)
        d_pi = transform_unit_grad(raw)
        d_raw = np.where(zero, -(1.0 - np.exp(-lam)) / p0 * d_pi, pi)
        grads["raw_pi"] = grads["raw_pi"] + d_raw.mean()
    else:
        raise ValueError(f"unsupported count family for training: '{count_kind}'")
    return float(losses.mean()), grads


def severity_nll_and_grads(
    net: MlpParams,
    x: np.ndarray,
    n: np.ndarray,
    ybar: np.ndarray,
    severity_kind: str = "gamma",
    mode: ForwardMode = EVAL_MODE,
    rng: np.random.Generator | None = None,
    want_grads: bool = True,
):
    """Mean severity NLL over a batch of positive-count records.

    Gradients cover the network, the dependence coefficient ``gamma`` and
    the dispersion root ``raw_phi`` (phi = raw_phi^2).
    """
    if len(n) == 0:
        raise ValueError("batch must be nonempty")
    if np.any(n <= 0):
        raise ValueError("severity batches require records with positive claim counts")
    s_out, cache = mlp_forward(net, x, mode, rng)
    gamma = float(net.aux["gamma"])
    raw_phi = float(net.aux["raw_phi"])
    phi = float(transform_positive(raw_phi))
    if phi <= 0:
        raise FloatingPointError("dispersion collapsed to zero during training")
    nf = n.astype(np.float64)
    eta = s_out + gamma * nf
    mu = np.exp(eta)
    m = len(n)

    if severity_kind == "gamma":
        if np.any(ybar <= 0):
            raise ValueError("Gamma severity requires positive average severities")
        nu = nf / phi
        log_y = np.log(ybar)
        losses = -nu * np.log(nu) + nu * eta + gammaln(nu) - (nu - 1.0) * log_y + nu * ybar / mu
        _finite_or_raise(losses, "severity")
        if not want_grads:
            return float(losses.mean()), None
        d_eta = nu * (1.0 - ybar / mu)
        d_nu = -np.log(nu) - 1.0 + eta + digamma(nu) - log_y + ybar / mu
        d_phi = d_nu * (-nf / phi**2)
    elif severity_kind == "normal":
        disp = phi / nf
        losses = 0.5 * np.log(2.0 * np.pi * disp) + (ybar - mu) ** 2 / (2.0 * disp)
        _finite_or_raise(losses, "severity")
        if not want_grads:
            return float(losses.mean()), None
        d_eta = -(ybar - mu) * mu / disp
        d_phi = (0.5 / disp - (ybar - mu) ** 2 / (2.0 * disp**2)) / nf
    elif severity_kind == "inverse_gaussian":
        if np.any(ybar <= 0):
            raise ValueError("inverse Gaussian severity requires positive average severities")
        disp = phi / nf
        losses = 0.5 * np.log(2.0 * np.pi * ybar**3 * disp) + (ybar - mu) ** 2 / (
            2.0 * disp * mu**2 * ybar
        )
        _finite_or_raise(losses, "severity")
        if not want_grads:
            return float(losses.mean()), None
        d_eta = -(ybar - mu) / (disp * mu**2)
        d_phi = (0.5 / disp - (ybar - mu) ** 2 / (2.0 * disp**2 * mu**2 * ybar)) / nf
    else:
        raise ValueError(f"unsupported severity family for training: '{severity_kind}'")

    grads = mlp_backward(net, cache, d_eta / m)
    grads["gamma"] = grads["gamma"] + (d_eta * nf).mean()
    grads["raw_phi"] = grads["raw_phi"] + d_phi.mean() * transform_positive_grad(raw_phi)
    return float(losses.mean()), grads


def _run_training(
    net: MlpParams,
    arrays: tuple[np.ndarray, ...],
    batch_fn,
    config: TrainConfig,
    seed_seq: np.random.SeedSequence,
    frozen: tuple[str, ...],
    record_extras,
) -> list[EpochRecord]:
    """Shared mini-batch loop: shuffled epochs, schedule, divergence guard."""
    shuffle_seed, dropout_seed, val_seed = seed_seq.spawn(3)
    shuffle_rng = np.random.default_rng(shuffle_seed)
    dropout_rng = np.random.default_rng(dropout_seed)
    m_total = len(arrays[0])

    train_idx = np.arange(m_total)
    val_idx = None
    if config.validation_fraction > 0.0:
        perm = np.random.default_rng(val_seed).permutation(m_total)
        n_val = min(max(int(round(m_total * config.validation_fraction)), 1), m_total - 1)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
    m = len(train_idx)

    mode = ForwardMode(
        training=True, dropout_rate=config.dropout_rate, batch_norm=config.batch_norm
    )
    eval_mode = ForwardMode(batch_norm=config.batch_norm)
    optimizer = make_optimizer(
        config.optimizer, config.learning_rate, config.beta1, config.beta2, config.eps
    )
    schedule = config.make_schedule()
    trainable = net.trainable()
    history: list[EpochRecord] = []

    for epoch in range(config.epochs):
        lr = schedule.lr_for_epoch(epoch)
        perm = shuffle_rng.permutation(m)
        batch_losses = []
        for start in range(0, m, config.batch_size):
            idx = train_idx[perm[start : start + config.batch_size]]
            batch = tuple(a[idx] for a in arrays)
            try:
                loss, grads = batch_fn(net, batch, mode, dropout_rng, True)
            except FloatingPointError as err:
                raise TrainingDiverged(str(err), history) from err
            for name in frozen:
                grads.pop(name, None)
            try:
                optimizer.step(trainable, grads, lr)
            except FloatingPointError as err:
                raise TrainingDiverged(str(err), history) from err
            batch_losses.append(loss)
        epoch_loss = float(np.mean(batch_losses))
        val_loss = None
        if val_idx is not None:
            batch = tuple(a[val_idx] for a in arrays)
            val_loss, _ = batch_fn(net, batch, eval_mode, None, False)
        history.append(
            EpochRecord(
                epoch=epoch, loss=epoch_loss, lr=lr, val_loss=val_loss, **record_extras(net)
            )
        )
        monitored = epoch_loss if val_loss is None else val_loss
        if isinstance(schedule, PlateauDecay) and schedule.observe(monitored):
            break
    return history


def fit_frequency(dataset: Dataset, config: TrainConfig, count_kind: str = "zip") -> FitResult:
    """Fit the claim-count network (and pi for the zero-inflated family).

    The output bias starts at the null-model rate log(sum n / sum t), so
    the first iterations see means on the data's scale regardless of how
    the counts are scaled.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if count_kind not in COUNT_KINDS:
        raise ValueError(f"unsupported count family for training: '{count_kind}'")
    seed_seq = np.random.SeedSequence(config.seed)
    init_seed, loop_seed = seed_seq.spawn(2)
    dims = [dataset.x.shape[1], *config.hidden_dims, 1]
    aux = ("raw_pi",) if count_kind == "zip" else ()
    net = mlp_init(dims, init_seed, aux=aux, batch_norm=config.batch_norm)
    if dataset.n.sum() > 0:
        net.biases[-1][0] = np.log(dataset.n.sum() / dataset.t.sum())

    def batch_fn(net_, batch, mode, rng, want_grads):
        xb, nb, tb = batch
        return frequency_nll_and_grads(net_, xb, nb, tb, count_kind, mode, rng, want_grads)

    def extras(net_):
        pi = float(transform_unit(float(net_.aux["raw_pi"]))) if "raw_pi" in net_.aux else None
        return {"pi": pi}

    history = _run_training(
        net,
        (dataset.x, dataset.n, dataset.t),
        batch_fn,
        config,
        loop_seed,
        frozen=(),
        record_extras=extras,
    )
    return FitResult(net=net, history=history)


def fit_severity(
    dataset: Dataset,
    config: TrainConfig,
    dependent: bool = True,
    severity_kind: str = "gamma",
) -> FitResult:
    """Fit the average-severity network on records with claims.

    With ``dependent=False`` the dependence coefficient stays frozen at 0,
    which is the independent two-part model.

    The output bias starts at the null-model level log(mean ybar).  Raw
    claim amounts sit many log-units above a zero-initialized network, and
    the likelihood is much steeper below the data than above it, so an
    uncentered start overshoots and the adaptive optimizer's step floor
    then cannot bring it back.
    """
    claims = dataset.claims_only()
    if len(claims) == 0:
        raise ValueError("no records with positive claim counts")
    if severity_kind not in SEVERITY_KINDS:
        raise ValueError(f"unsupported severity family for training: '{severity_kind}'")
    seed_seq = np.random.SeedSequence(config.seed)
    init_seed, loop_seed = seed_seq.spawn(2)
    dims = [claims.x.shape[1], *config.hidden_dims, 1]
    net = mlp_init(dims, init_seed, aux=("gamma", "raw_phi"), batch_norm=config.batch_norm)
    net.biases[-1][0] = np.log(claims.ybar.mean())

    def batch_fn(net_, batch, mode, rng, want_grads):
        xb, nb, yb = batch
        return severity_nll_and_grads(net_, xb, nb, yb, severity_kind, mode, rng, want_grads)

    def extras(net_):
        return {
            "gamma": float(net_.aux["gamma"]),
            "phi": float(transform_positive(float(net_.aux["raw_phi"]))),
        }

    history = _run_training(
        net,
        (claims.x, claims.n, claims.ybar),
        batch_fn,
        config,
        loop_seed,
        frozen=() if dependent else ("gamma",),
        record_extras=extras,
    )
    return FitResult(net=net, history=history)


@dataclass
class FrequencySeverityModel:
    """Trained two-part model with distribution scalars and preprocessing."""

    freq_net: MlpParams
    sev_net: MlpParams
    count_kind: str
    severity_kind: str
    schema: DataSchema | None = None
    preproc: PreprocMeta | None = None
    freq_history: list[EpochRecord] = field(default_factory=list)
    sev_history: list[EpochRecord] = field(default_factory=list)

    @property
    def pi(self) -> float | None:
        if "raw_pi" in self.freq_net.aux:
            return float(transform_unit(float(self.freq_net.aux["raw_pi"])))
        return None

    @property
    def gamma(self) -> float:
        return float(self.sev_net.aux["gamma"])

    @property
    def phi(self) -> float:
        return float(transform_positive(float(self.sev_net.aux["raw_phi"])))

    def count_family(self):
        if self.count_kind == "zip":
            return ZeroInflatedPoisson(self.pi)
        if self.count_kind == "poisson":
            return Poisson()
        raise ValueError(f"unknown count family '{self.count_kind}'")

    def severity_family(self):
        cls = {"gamma": Gamma, "inverse_gaussian": InverseGaussian, "normal": Normal}.get(
            self.severity_kind
        )
        if cls is None:
            raise ValueError(f"unknown severity family '{self.severity_kind}'")
        return cls(dispersion=self.phi)

    def log_frequency(self, x) -> np.ndarray:
        """F(x), the log of the unit-exposure claim-count mean."""
        mode = ForwardMode(batch_norm=self.freq_net.has_batch_norm)
        return mlp_forward(self.freq_net, x, mode)[0]

    def log_severity(self, x) -> np.ndarray:
        """S(x), the log severity level before the claim-count shift."""
        mode = ForwardMode(batch_norm=self.sev_net.has_batch_norm)
        return mlp_forward(self.sev_net, x, mode)[0]


@dataclass
class Predictions:
    lam: np.ndarray
    mu: np.ndarray | None
    agg_mean: np.ndarray
    agg_var: np.ndarray


def predict(model: FrequencySeverityModel, x, t, n=None) -> Predictions:
    """Per-record frequency mean, severity mean and aggregate moments.

    lam = t exp(F(x)); mu = exp(S(x) + gamma n) when counts are supplied;
    the aggregate moments use the closed forms with the fitted scalars.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.freq_net.layer_dims[0]:
        raise ValueError(
            f"input has {x.shape[1]} features, model expects {model.freq_net.layer_dims[0]}"
        )
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), (x.shape[0],))
    if np.any(t <= 0):
        raise ValueError("exposures must be positive")
    f_out = np.atleast_1d(model.log_frequency(x))
    s_out = np.atleast_1d(model.log_severity(x))
    lam = t * np.exp(f_out)
    mu = None
    if n is not None:
        n = np.broadcast_to(np.asarray(n, dtype=np.float64), (x.shape[0],))
        mu = np.exp(s_out + model.gamma * n)
    count = model.count_family()
    severity = model.severity_family()
    agg_mean = np.atleast_1d(moments.aggregate_mean(count, lam, s_out, model.gamma))
    agg_var = np.atleast_1d(moments.aggregate_variance(count, lam, severity, s_out, model.gamma))
    return Predictions(lam=lam, mu=mu, agg_mean=agg_mean, agg_var=agg_var)


def fit_model(
    dataset: Dataset,
    freq_config: TrainConfig,
    sev_config: TrainConfig,
    count_kind: str = "zip",
    severity_kind: str = "gamma",
    dependent: bool = True,
    schema: DataSchema | None = None,
    preproc: PreprocMeta | None = None,
) -> FrequencySeverityModel:
    """Fit frequency then severity and assemble the model artifact."""
    freq = fit_frequency(dataset, freq_config, count_kind)
    sev = fit_severity(dataset, sev_config, dependent, severity_kind)
    return FrequencySeverityModel(
        freq_net=freq.net,
        sev_net=sev.net,
        count_kind=count_kind,
        severity_kind=severity_kind,
        schema=schema,
        preproc=preproc,
        freq_history=freq.history,
        sev_history=sev.history,
    )


def _linear_config(config: TrainConfig) -> TrainConfig:
    return replace(config, hidden_dims=(), dropout_rate=0.0, batch_norm=False)


def fit_glm(dataset: Dataset, freq_config: TrainConfig, sev_config: TrainConfig, **kwargs) -> FrequencySeverityModel:
    """Linear independent baseline: affine predictors, gamma frozen at 0."""
    return fit_model(
        dataset,
        _linear_config(freq_config),
        _linear_config(sev_config),
        dependent=False,
        **kwargs,
    )


def fit_dglm(dataset: Dataset, freq_config: TrainConfig, sev_config: TrainConfig, **kwargs) -> FrequencySeverityModel:
    """Linear dependent baseline: affine predictors, gamma trained."""
    return fit_model(
        dataset,
        _linear_config(freq_config),
        _linear_config(sev_config),
        dependent=True,
        **kwargs,
    )
