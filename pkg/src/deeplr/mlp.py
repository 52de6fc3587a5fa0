"""Dense feedforward networks with hand-written reverse-mode gradients.

Parameters live in one flat float64 vector. ``MlpSpec.layers`` describes
where each weight matrix and bias sits inside it. A network has one branch,
or two independent branches (mean and variance) that share only the input.
"""

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NumericError

HIDDEN_ACTIVATIONS = ("elu", "relu", "tanh")
OUTPUT_ACTIVATIONS = ("linear", "sigmoid", "raw_variance")


class Layer(NamedTuple):
    branch: int
    depth: int
    fan_in: int
    fan_out: int
    w_slice: slice
    b_slice: slice
    activation: str
    l2: float


@dataclass(frozen=True)
class MlpSpec:
    """Architecture of a (possibly two-branch) multilayer perceptron.

    ``branches`` holds the layer widths of each branch, *including* the output
    layer, e.g. ``((40, 30, 20, 1), (5, 2, 1))``. ``l2`` is either a single
    constant for every layer or one constant per layer in flattened order
    (branch 0 first).
    """

    input_dim: int
    branches: tuple
    hidden_activation: str = "elu"
    output_activations: tuple = ("linear",)
    l2: object = 0.0

    def __post_init__(self):
        branches = tuple(tuple(int(w) for w in b) for b in self.branches)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "output_activations", tuple(self.output_activations))
        if isinstance(self.l2, (list, tuple)):
            object.__setattr__(self, "l2", tuple(float(v) for v in self.l2))
        else:
            object.__setattr__(self, "l2", float(self.l2))
        if self.input_dim < 1:
            raise DomainError("input_dim must be >= 1")
        if len(branches) not in (1, 2) or any(len(b) == 0 for b in branches):
            raise DomainError("need one or two nonempty branches")
        if any(w < 1 for b in branches for w in b):
            raise DomainError("all layer widths must be >= 1")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise DomainError(f"unknown hidden activation {self.hidden_activation!r}")
        if len(self.output_activations) != len(branches):
            raise DomainError("one output activation per branch is required")
        if any(a not in OUTPUT_ACTIVATIONS for a in self.output_activations):
            raise DomainError(f"unknown output activation in {self.output_activations}")
        if len(branches) == 2 and self.output_activations[1] != "raw_variance":
            raise DomainError("the two-branch form is reserved for mean/variance networks")
        n_layers = sum(len(b) for b in branches)
        l2 = self.l2 if isinstance(self.l2, tuple) else (self.l2,) * n_layers
        if len(l2) != n_layers or any(v < 0 for v in l2):
            raise DomainError("l2 must be nonnegative, one value or one per layer")

    @cached_property
    def layers(self):
        l2 = self.l2 if isinstance(self.l2, tuple) else None
        out, offset, k = [], 0, 0
        for bi, widths in enumerate(self.branches):
            fan_in = self.input_dim
            for depth, fan_out in enumerate(widths):
                last = depth == len(widths) - 1
                w_slice = slice(offset, offset + fan_in * fan_out)
                offset = w_slice.stop
                b_slice = slice(offset, offset + fan_out)
                offset = b_slice.stop
                act = self.output_activations[bi] if last else self.hidden_activation
                out.append(Layer(bi, depth, fan_in, fan_out, w_slice, b_slice, act,
                                 l2[k] if l2 else self.l2))
                fan_in = fan_out
                k += 1
        return tuple(out)

    @property
    def n_params(self):
        return self.layers[-1].b_slice.stop

    def branch_mask(self, branch):
        """Boolean mask over the flat parameter vector selecting one branch."""
        mask = np.zeros(self.n_params, dtype=bool)
        for layer in self.layers:
            if layer.branch == branch:
                mask[layer.w_slice] = True
                mask[layer.b_slice] = True
        return mask

    def to_dict(self):
        d = asdict(self)
        d["branches"] = [list(b) for b in self.branches]
        d["output_activations"] = list(self.output_activations)
        d["l2"] = list(self.l2) if isinstance(self.l2, tuple) else self.l2
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            input_dim=d["input_dim"],
            branches=tuple(tuple(b) for b in d["branches"]),
            hidden_activation=d.get("hidden_activation", "elu"),
            output_activations=tuple(d.get("output_activations", ("linear",))),
            l2=d.get("l2", 0.0),
        )


def weights(params, layer):
    return params[layer.w_slice].reshape(layer.fan_in, layer.fan_out)


def init_params(spec: MlpSpec, seed: int) -> np.ndarray:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    params = np.zeros(spec.n_params)
    for layer in spec.layers:
        limit = np.sqrt(6.0 / (layer.fan_in + layer.fan_out))
        params[layer.w_slice] = rng.uniform(-limit, limit, size=layer.fan_in * layer.fan_out)
    return params


def elu(z):
    return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))


def sigmoid(z):
    # split form avoids overflow in exp for large |z|
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _activate(name, z):
    if name == "elu":
        return elu(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return sigmoid(z)
    return z


def _activation_grad(name, z, a):
    if name == "elu":
        return np.where(z > 0, 1.0, a + 1.0)
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    if name == "sigmoid":
        return a * (1.0 - a)
    return None


def _as_batch(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1) if spec.input_dim > 1 or x.size == 1 else x.reshape(-1, 1)
    if x.shape[1] != spec.input_dim:
        raise DomainError(f"expected {spec.input_dim} input features, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("network input contains non-finite values")
    return x


def _forward_cache(spec, params, x):
    outputs = [None] * len(spec.branches)
    cache = []
    h = None
    for k, layer in enumerate(spec.layers):
        if layer.depth == 0:
            h = x
        with np.errstate(over="ignore", invalid="ignore"):
            z = h @ weights(params, layer) + params[layer.b_slice]
            a = _activate(layer.activation, z)
        if not np.all(np.isfinite(a)):
            raise NumericError(f"non-finite activation in layer {k}", layer=k)
        cache.append((h, z, a))
        h = a
        if layer.depth == len(spec.branches[layer.branch]) - 1:
            outputs[layer.branch] = a
    return tuple(outputs), cache


def forward(spec: MlpSpec, params: np.ndarray, x) -> tuple:
    """Raw per-branch outputs, each of shape ``(n, width)``.

    ``x`` may be a single input vector or an ``(n, input_dim)`` batch.
    """
    outputs, _ = _forward_cache(spec, params, _as_batch(spec, x))
    return outputs


def l2_penalty(spec, params):
    return sum(layer.l2 * float(np.dot(params[layer.w_slice], params[layer.w_slice]))
               for layer in spec.layers if layer.l2)


def loss_and_grad(spec: MlpSpec, params: np.ndarray, batch, head):
    """Weighted mean negative log-likelihood plus L2 on weight matrices, and its gradient.

    Parameters
    ----------
    batch : WeightedDataset
        Examples with loss weights; the data term is ``sum(w * nll) / sum(w)``.
    head : Head
        Distribution head turning raw outputs into a per-example NLL.

    Returns
    -------
    loss : float
    grad : ndarray, same layout as ``params``
    """
    if len(batch) == 0:
        raise DomainError("empty batch")
    total_w = float(batch.w.sum())
    if total_w <= 0:
        raise DomainError("batch has zero total weight")
    x = _as_batch(spec, batch.x)
    outputs, cache = _forward_cache(spec, params, x)
    nll, d_out = head.nll_and_grad(outputs, batch.y)
    scale = batch.w / total_w
    loss = float(np.dot(scale, nll)) + l2_penalty(spec, params)
    if not np.isfinite(loss):
        raise NumericError("non-finite loss", layer=len(spec.layers) - 1)

    grad = np.zeros_like(params)
    upstream = [scale[:, None] * d for d in d_out]
    delta = None
    for k in range(len(spec.layers) - 1, -1, -1):
        layer = spec.layers[k]
        h, z, a = cache[k]
        if layer.depth == len(spec.branches[layer.branch]) - 1:
            delta = upstream[layer.branch]
        dz = _activation_grad(layer.activation, z, a)
        if dz is not None:
            delta = delta * dz
        W = weights(params, layer)
        gW = h.T @ delta
        if layer.l2:
            gW = gW + 2.0 * layer.l2 * W
        grad[layer.w_slice] = gW.reshape(-1)
        grad[layer.b_slice] = delta.sum(axis=0)
        if layer.depth > 0:
            delta = delta @ W.T
        if not np.all(np.isfinite(delta)):
            raise NumericError(f"non-finite gradient in layer {k}", layer=k)
    return loss, grad


def save_checkpoint(path, spec, params, meta=None):
    """Write spec and parameters as one JSON text document.

    Parameter values are written with 17 significant digits so that reading
    them back reproduces every float bit for bit.
    """
    params = np.asarray(params, dtype=np.float64)
    head = json.dumps({"spec": spec.to_dict(), "meta": meta or {}}, sort_keys=True)
    values = ", ".join(format(float(v), ".17g") for v in params)
    with open(path, "w") as fh:
        fh.write(head[:-1] + ', "params": [' + values + "]}\n")


def load_checkpoint(path):
    with open(path) as fh:
        doc = json.load(fh)
    spec = MlpSpec.from_dict(doc["spec"])
    params = np.array(doc["params"], dtype=np.float64)
    if params.shape != (spec.n_params,):
        raise DomainError(f"checkpoint holds {params.size} values, spec needs {spec.n_params}")
    return spec, params, doc.get("meta", {})
