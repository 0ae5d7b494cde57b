"""Dense feed-forward network trained by per-sample gradient descent.

Every non-input layer computes ``net = W @ prev_out + b`` and
``out = activation(clamp(net))``. The loss for one sample is the summed
squared error ``sum(0.5 * (target - out)**2)``.

Backpropagation follows the chain rule layer by layer:

    delta_L = -(target - out_L) * f'(net_L)
    delta_l = (W_{l+1}.T @ delta_{l+1}) * f'(net_l)
    dE/dW_l = outer(delta_l, out_{l-1}),   dE/db_l = delta_l
"""

from __future__ import annotations

import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .activation import ActivationSpec, Kind, activate, evaluate_with_slope
from .errors import TrainingError

__all__ = [
    "Network",
    "ForwardTrace",
    "Gradients",
    "TrainConfig",
    "init_network",
    "forward",
    "predict_outputs",
    "loss",
    "one_hot",
    "backward",
    "sgd_step",
    "train",
    "format_network",
    "parse_network",
    "save_network",
    "load_network",
]

log = logging.getLogger(__name__)

TARGET_LOW = 0.01
TARGET_HIGH = 0.99
FORMAT_HEADER = "SBAFNET 1"

DerivativeFn = Callable[[np.ndarray, ActivationSpec], np.ndarray]


@dataclass
class Network:
    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: ActivationSpec = field(default_factory=ActivationSpec)

    def __post_init__(self):
        self.layer_sizes = [int(n) for n in self.layer_sizes]
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("need one weight matrix and one bias vector per non-input layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if w.shape != shape:
                raise ValueError(f"layer {i + 1}: weight shape {w.shape}, expected {shape}")
            if b.shape != (shape[0],):
                raise ValueError(f"layer {i + 1}: bias shape {b.shape}, expected {(shape[0],)}")

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Network":
        return Network(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )

    def is_finite(self) -> bool:
        return _all_finite(self.weights, self.biases)


def _all_finite(*groups) -> bool:
    # one scalar sum per array is far cheaper than isfinite().all() on tiny
    # arrays; a sum overflowing to inf is reported as non-finite too
    return math.isfinite(sum(float(a.sum()) for group in groups for a in group))


@dataclass
class ForwardTrace:
    """Intermediate values of one forward pass, indexed by non-input layer."""

    inputs: np.ndarray
    nets: list[np.ndarray]
    outs: list[np.ndarray]
    slopes: list[np.ndarray]
    activation: ActivationSpec

    @property
    def clamped(self) -> list[np.ndarray]:
        """Net inputs after the domain clamp (identical to ``nets`` unless SBAF)."""
        return [_clamp(z, self.activation) for z in self.nets]

    @property
    def output(self) -> np.ndarray:
        return self.outs[-1]

    def layer_input(self, layer: int) -> np.ndarray:
        return self.inputs if layer == 0 else self.outs[layer - 1]


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def is_finite(self) -> bool:
        return _all_finite(self.weights, self.biases)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 500
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"learning_rate must be a positive finite number, got {self.learning_rate}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError(f"epochs must be a positive integer, got {self.epochs}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def init_network(layer_sizes: Sequence[int], activation: ActivationSpec | None = None, seed: int = 0) -> Network:
    """Weights i.i.d. uniform on [-0.5, 0.5]; every bias 0.5.

    The 0.5 bias puts typical net inputs for normalised features near the
    middle of SBAF's domain.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ValueError("a network needs at least an input and an output layer")
    if any(int(n) != n or n < 1 for n in sizes):
        raise ValueError(f"layer sizes must be positive integers, got {sizes}")
    rng = np.random.default_rng(seed)
    weights = [rng.uniform(-0.5, 0.5, size=(n_out, n_in)) for n_in, n_out in zip(sizes[:-1], sizes[1:])]
    biases = [np.full(n_out, 0.5) for n_out in sizes[1:]]
    return Network(sizes, weights, biases, activation or ActivationSpec())


def _clamp(net: np.ndarray, spec: ActivationSpec) -> np.ndarray:
    if spec.kind is Kind.SBAF:
        return np.clip(net, spec.lower, spec.upper)
    return net


def forward(net: Network, x) -> ForwardTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n_inputs,):
        raise ValueError(f"input has shape {x.shape}, network expects ({net.n_inputs},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    return _forward(net, x)


def _forward(net: Network, x: np.ndarray) -> ForwardTrace:
    spec = net.activation
    nets, outs, slopes = [], [], []
    prev = x
    for w, b in zip(net.weights, net.biases):
        z = w @ prev + b
        prev, d = evaluate_with_slope(z, spec)
        nets.append(z)
        outs.append(prev)
        slopes.append(d)
    return ForwardTrace(x, nets, outs, slopes, spec)


def predict_outputs(net: Network, features) -> np.ndarray:
    """Output activations for every row of ``features``."""
    features = np.asarray(features, dtype=np.float64)
    prev = features.T
    spec = net.activation
    for w, b in zip(net.weights, net.biases):
        prev = activate(_clamp(w @ prev + b[:, None], spec), spec)
    return np.asarray(prev).T


def loss(outputs, targets) -> float:
    outputs = np.asarray(outputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if outputs.shape != targets.shape:
        raise ValueError(f"outputs {outputs.shape} and targets {targets.shape} differ in shape")
    return float(0.5 * np.sum((targets - outputs) ** 2))


def one_hot(labels, n_classes: int, low: float = TARGET_LOW, high: float = TARGET_HIGH) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.intp)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    out = np.full((labels.size, n_classes), low)
    out[np.arange(labels.size), labels] = high
    return out


def backward(
    net: Network,
    trace: ForwardTrace,
    targets,
    derivative_fn: DerivativeFn | None = None,
) -> Gradients:
    """Gradients of the squared-error loss for one sample.

    ``derivative_fn`` replaces the activation derivative; it exists for
    diagnostics such as running a gradient check against a wrong sign.
    """
    targets = np.asarray(targets, dtype=np.float64)
    n_layers = len(net.weights)
    if len(trace.nets) != n_layers or trace.inputs.shape != (net.n_inputs,):
        raise ValueError("trace does not match the network's layer structure")
    if targets.shape != (net.n_outputs,):
        raise ValueError(f"targets have shape {targets.shape}, network outputs ({net.n_outputs},)")
    spec = net.activation
    if derivative_fn is None:
        slopes = trace.slopes
    else:
        # evaluated on the raw net so saturated units report zero
        slopes = [np.asarray(derivative_fn(z, spec)) for z in trace.nets]

    delta = -(targets - trace.outs[-1]) * slopes[-1]
    grad_w: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    grad_b: list[np.ndarray] = [None] * n_layers  # type: ignore[list-item]
    for layer in range(n_layers - 1, -1, -1):
        grad_w[layer] = np.outer(delta, trace.layer_input(layer))
        grad_b[layer] = delta
        if layer:
            delta = (net.weights[layer].T @ delta) * slopes[layer - 1]
    return Gradients(grad_w, grad_b)


def sgd_step(net: Network, grads: Gradients, learning_rate: float) -> Network:
    """In-place update ``p <- p - learning_rate * dE/dp``; returns ``net``."""
    if not learning_rate > 0:
        raise ValueError(f"learning_rate must be positive, got {learning_rate}")
    _check_grad_shapes(net, grads)
    if not grads.is_finite():
        raise TrainingError("non-finite gradient")
    for w, g in zip(net.weights, grads.weights):
        w -= learning_rate * g
    for b, g in zip(net.biases, grads.biases):
        b -= learning_rate * g
    if not net.is_finite():
        raise TrainingError("parameter became non-finite after update")
    return net


def _check_grad_shapes(net: Network, grads: Gradients) -> None:
    if len(grads.weights) != len(net.weights) or any(
        g.shape != w.shape for g, w in zip(grads.weights + grads.biases, net.weights + net.biases)
    ):
        raise ValueError("gradient shapes do not match the network")


def train(net: Network, features, labels, cfg: TrainConfig) -> tuple[Network, list[float]]:
    """Online gradient descent: one update per sample, ``cfg.epochs`` passes.

    ``net`` is updated in place and also returned with the per-epoch mean
    loss (each sample's loss measured just before its own update).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("training needs a non-empty 2-D feature matrix")
    if features.shape[1] != net.n_inputs:
        raise ValueError(f"features have {features.shape[1]} columns, network expects {net.n_inputs}")
    targets = one_hot(labels, net.n_outputs)
    if targets.shape[0] != features.shape[0]:
        raise ValueError("features and labels differ in length")

    rng = np.random.default_rng(cfg.seed)
    n = features.shape[0]
    history: list[float] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else range(n)
        total = 0.0
        for i in order:
            trace = _forward(net, features[i])
            sample_loss = loss(trace.output, targets[i])
            if not math.isfinite(sample_loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, sample {i}")
            total += sample_loss
            try:
                sgd_step(net, backward(net, trace, targets[i]), cfg.learning_rate)
            except TrainingError as exc:
                raise TrainingError(f"{exc} at epoch {epoch}, sample {i}") from exc
        history.append(total / n)
        if epoch == 1 or epoch % 100 == 0 or epoch == cfg.epochs:
            log.debug("epoch %d mean loss %.6g", epoch, history[-1])
    return net, history


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def format_network(net: Network) -> str:
    """Text form: header, layer sizes, activation, then W rows and b per layer."""
    spec = net.activation
    lines = [
        FORMAT_HEADER,
        "layers: " + " ".join(str(n) for n in net.layer_sizes),
        "activation: " + " ".join([spec.kind.value, _fmt(spec.k), _fmt(spec.alpha), _fmt(spec.clamp_margin)]),
    ]
    for w, b in zip(net.weights, net.biases):
        lines.extend(" ".join(_fmt(v) for v in row) for row in w)
        lines.append(" ".join(_fmt(v) for v in b))
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> Network:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError(f"not a model file: expected header {FORMAT_HEADER!r}")
    if len(lines) < 3 or not lines[1].startswith("layers:") or not lines[2].startswith("activation:"):
        raise ValueError("model file is missing the layers/activation lines")
    sizes = [int(tok) for tok in lines[1][len("layers:"):].split()]
    kind, k, alpha, eps = lines[2][len("activation:"):].split()
    spec = ActivationSpec(Kind(kind), float(k), float(alpha), float(eps))

    rows = iter(lines[3:])
    weights, biases = [], []
    try:
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            w = np.array([[float(v) for v in next(rows).split()] for _ in range(n_out)])
            b = np.array([float(v) for v in next(rows).split()])
            if w.shape != (n_out, n_in) or b.shape != (n_out,):
                raise ValueError(f"layer {len(weights) + 1} has the wrong number of values")
            weights.append(w)
            biases.append(b)
    except StopIteration:
        raise ValueError("model file ended early") from None
    if next(rows, None) is not None:
        raise ValueError("trailing data after the last layer")
    return Network(sizes, weights, biases, spec)


def save_network(net: Network, path: str | os.PathLike) -> None:
    with io.open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_network(net))


def load_network(path: str | os.PathLike) -> Network:
    with io.open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())
