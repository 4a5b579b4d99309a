"""Feed-forward network engine: forward pass, exact backprop, He init.

Networks are plain containers of numpy arrays.  A network with layer
dimensions [N0, ..., N_{L+1}] applies, per hidden layer, an affine map
followed by (optional) batch normalization, the ELU activation and
(optional, training only) inverted dropout; the output layer is affine
with no activation, so the scalar output is a log-mean.

Auxiliary trainable scalars (the raw zero-inflation logit, the raw
dispersion root and the dependence coefficient) live next to the matrix
stack in ``aux`` as 0-d arrays so one optimizer can update everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

__all__ = [
    "ForwardMode",
    "MlpParams",
    "EVAL_MODE",
    "elu",
    "elu_grad",
    "transform_unit",
    "transform_unit_grad",
    "transform_positive",
    "transform_positive_grad",
    "mlp_init",
    "mlp_forward",
    "mlp_backward",
    "params_to_dict",
    "params_from_dict",
]

BN_EPS = 1e-5
BN_MOMENTUM = 0.9

# Raw zero-inflation parameter starts with sigmoid(raw) uniform on this range.
PI_INIT_LOW = np.exp(-2.0)
PI_INIT_HIGH = np.exp(-1.0)


def elu(z):
    """ELU activation: z for z > 0, exp(z) - 1 for z <= 0."""
    z = np.asarray(z, dtype=np.float64)
    return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))


def elu_grad(z):
    z = np.asarray(z, dtype=np.float64)
    return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))


def transform_unit(raw):
    """Map an unconstrained scalar to (0, 1) via the logistic function."""
    return expit(raw)


def transform_unit_grad(raw):
    s = expit(raw)
    return s * (1.0 - s)


def transform_positive(raw):
    """Map an unconstrained scalar to a non-negative value via squaring."""
    return np.square(raw)


def transform_positive_grad(raw):
    return 2.0 * np.asarray(raw, dtype=np.float64)


@dataclass(frozen=True)
class ForwardMode:
    training: bool = False
    dropout_rate: float = 0.0
    batch_norm: bool = False

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout rate must lie in [0, 1), got {self.dropout_rate}")


EVAL_MODE = ForwardMode()


@dataclass
class MlpParams:
    """Weights, biases and auxiliary scalars of one feed-forward network.

    weights[l] has shape (dims[l+1], dims[l]); biases[l] has shape
    (dims[l+1],).  Batch-norm state (learned scale/shift plus running
    statistics, one pair per hidden layer) is present only when the network
    was created with batch normalization enabled.
    """

    layer_dims: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    aux: dict[str, np.ndarray] = field(default_factory=dict)
    bn_scale: list[np.ndarray] | None = None
    bn_shift: list[np.ndarray] | None = None
    bn_running_mean: list[np.ndarray] | None = None
    bn_running_var: list[np.ndarray] | None = None

    @property
    def n_hidden(self) -> int:
        return len(self.layer_dims) - 2

    @property
    def has_batch_norm(self) -> bool:
        return self.bn_scale is not None

    def parameter_count(self) -> int:
        """Number of weight and bias entries, sum of N_{l-1} N_l + N_l."""
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def trainable(self) -> dict[str, np.ndarray]:
        """All trainable arrays keyed by name (running stats excluded)."""
        out: dict[str, np.ndarray] = {}
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"W{l}"] = w
            out[f"b{l}"] = b
        if self.has_batch_norm:
            for l in range(self.n_hidden):
                out[f"bn_scale{l}"] = self.bn_scale[l]
                out[f"bn_shift{l}"] = self.bn_shift[l]
        out.update(self.aux)
        return out

    def copy(self) -> "MlpParams":
        return MlpParams(
            layer_dims=list(self.layer_dims),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            aux={k: v.copy() for k, v in self.aux.items()},
            bn_scale=None if self.bn_scale is None else [a.copy() for a in self.bn_scale],
            bn_shift=None if self.bn_shift is None else [a.copy() for a in self.bn_shift],
            bn_running_mean=None
            if self.bn_running_mean is None
            else [a.copy() for a in self.bn_running_mean],
            bn_running_var=None
            if self.bn_running_var is None
            else [a.copy() for a in self.bn_running_var],
        )


def mlp_init(
    layer_dims: list[int],
    seed,
    aux: tuple[str, ...] = (),
    batch_norm: bool = False,
) -> MlpParams:
    """He-initialized network: W ~ Normal(0, 2 / fan_in), zero biases.

    ``aux`` names the auxiliary scalars to create.  ``raw_pi`` is drawn so
    that sigmoid(raw_pi) is uniform on [exp(-2), exp(-1)]; ``raw_phi``
    starts at 1 (dispersion 1) and ``gamma`` at 0 (independence).
    """
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError(f"layer dims need at least [input, output] with positive sizes, got {layer_dims}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    aux_arrays: dict[str, np.ndarray] = {}
    for name in aux:
        if name == "raw_pi":
            pi0 = rng.uniform(PI_INIT_LOW, PI_INIT_HIGH)
            aux_arrays[name] = np.asarray(np.log(pi0 / (1.0 - pi0)))
        elif name == "raw_phi":
            aux_arrays[name] = np.asarray(1.0)
        elif name == "gamma":
            aux_arrays[name] = np.asarray(0.0)
        else:
            raise ValueError(f"unknown auxiliary scalar '{name}'")
    n_hidden = len(dims) - 2
    bn = batch_norm and n_hidden > 0
    return MlpParams(
        layer_dims=dims,
        weights=weights,
        biases=biases,
        aux=aux_arrays,
        bn_scale=[np.ones(dims[l + 1]) for l in range(n_hidden)] if bn else None,
        bn_shift=[np.zeros(dims[l + 1]) for l in range(n_hidden)] if bn else None,
        bn_running_mean=[np.zeros(dims[l + 1]) for l in range(n_hidden)] if bn else None,
        bn_running_var=[np.ones(dims[l + 1]) for l in range(n_hidden)] if bn else None,
    )


def mlp_forward(
    params: MlpParams,
    x,
    mode: ForwardMode = EVAL_MODE,
    rng: np.random.Generator | None = None,
):
    """Run the network on a record or a batch.

    Accepts x of shape (N0,) or (m, N0) and returns a scalar or an (m,)
    vector plus the cache needed by :func:`mlp_backward`.  In training mode
    with batch normalization, running statistics are updated in place.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.ndim != 2 or a.shape[1] != params.layer_dims[0]:
        raise ValueError(
            f"input has {a.shape[-1] if a.ndim else 0} features, network expects {params.layer_dims[0]}"
        )
    use_bn = mode.batch_norm and params.has_batch_norm
    dropout = mode.training and mode.dropout_rate > 0.0
    if dropout and rng is None:
        raise ValueError("training-mode dropout needs an rng")

    layers = []
    for l in range(params.n_hidden):
        z = a @ params.weights[l].T + params.biases[l]
        layer = {"a_prev": a, "z": z}
        if use_bn:
            if mode.training:
                mean = z.mean(axis=0)
                var = z.var(axis=0)
                params.bn_running_mean[l] *= BN_MOMENTUM
                params.bn_running_mean[l] += (1.0 - BN_MOMENTUM) * mean
                params.bn_running_var[l] *= BN_MOMENTUM
                params.bn_running_var[l] += (1.0 - BN_MOMENTUM) * var
            else:
                mean = params.bn_running_mean[l]
                var = params.bn_running_var[l]
            inv_std = 1.0 / np.sqrt(var + BN_EPS)
            z_hat = (z - mean) * inv_std
            act_in = params.bn_scale[l] * z_hat + params.bn_shift[l]
            layer.update(z_hat=z_hat, inv_std=inv_std, batch_stats=mode.training)
        else:
            act_in = z
        layer["act_in"] = act_in
        h = elu(act_in)
        if dropout:
            keep = rng.random(h.shape) >= mode.dropout_rate
            scale = 1.0 / (1.0 - mode.dropout_rate)
            h = h * keep * scale
            layer["drop_mask"] = keep * scale
        a = h
        layers.append(layer)

    out = a @ params.weights[-1].T + params.biases[-1]
    cache = {"layers": layers, "a_last": a, "single": single, "use_bn": use_bn, "m": a.shape[0]}
    out = out[:, 0]
    return (out[0] if single else out), cache


def mlp_backward(params: MlpParams, cache, upstream) -> dict[str, np.ndarray]:
    """Exact gradients of sum_i upstream_i * output_i for every trainable array.

    ``upstream`` is d(loss)/d(output) per record, matching the forward
    batch.  Auxiliary scalars do not enter the forward map, so their
    entries are zero; loss functions add their own contributions.
    """
    u = np.asarray(upstream, dtype=np.float64)
    if cache["single"]:
        u = u.reshape(1)
    if u.shape != (cache["m"],):
        raise ValueError(f"upstream shape {u.shape} does not match batch of {cache['m']}")
    grads: dict[str, np.ndarray] = {}
    L = params.n_hidden

    dz = u[:, None]
    grads[f"W{L}"] = dz.T @ cache["a_last"]
    grads[f"b{L}"] = dz.sum(axis=0)
    da = dz @ params.weights[-1]

    for l in range(L - 1, -1, -1):
        layer = cache["layers"][l]
        dh = da
        if "drop_mask" in layer:
            dh = dh * layer["drop_mask"]
        dact = elu_grad(layer["act_in"]) * dh
        if cache["use_bn"]:
            z_hat = layer["z_hat"]
            inv_std = layer["inv_std"]
            grads[f"bn_scale{l}"] = (dact * z_hat).sum(axis=0)
            grads[f"bn_shift{l}"] = dact.sum(axis=0)
            dz_hat = dact * params.bn_scale[l]
            if layer["batch_stats"]:
                m = dz_hat.shape[0]
                dz = (
                    inv_std
                    / m
                    * (
                        m * dz_hat
                        - dz_hat.sum(axis=0)
                        - z_hat * (dz_hat * z_hat).sum(axis=0)
                    )
                )
            else:
                dz = dz_hat * inv_std
        else:
            dz = dact
        grads[f"W{l}"] = dz.T @ layer["a_prev"]
        grads[f"b{l}"] = dz.sum(axis=0)
        da = dz @ params.weights[l]

    for name, value in params.aux.items():
        grads[name] = np.zeros_like(value)
    return grads


def params_to_dict(params: MlpParams) -> dict:
    """JSON-ready representation; row-major nested lists, exact floats."""
    out = {
        "layer_dims": list(params.layer_dims),
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "aux": {k: float(v) for k, v in params.aux.items()},
    }
    if params.has_batch_norm:
        out["batch_norm"] = {
            "scale": [a.tolist() for a in params.bn_scale],
            "shift": [a.tolist() for a in params.bn_shift],
            "running_mean": [a.tolist() for a in params.bn_running_mean],
            "running_var": [a.tolist() for a in params.bn_running_var],
        }
    else:
        out["batch_norm"] = None
    return out


def params_from_dict(d: dict) -> MlpParams:
    bn = d.get("batch_norm")
    return MlpParams(
        layer_dims=[int(v) for v in d["layer_dims"]],
        weights=[np.asarray(w, dtype=np.float64) for w in d["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in d["biases"]],
        aux={k: np.asarray(float(v)) for k, v in d["aux"].items()},
        bn_scale=None if bn is None else [np.asarray(a, dtype=np.float64) for a in bn["scale"]],
        bn_shift=None if bn is None else [np.asarray(a, dtype=np.float64) for a in bn["shift"]],
        bn_running_mean=None
        if bn is None
        else [np.asarray(a, dtype=np.float64) for a in bn["running_mean"]],
        bn_running_var=None
        if bn is None
        else [np.asarray(a, dtype=np.float64) for a in bn["running_var"]],
    )
