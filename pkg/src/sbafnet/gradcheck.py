"""Central finite-difference oracle for activation derivatives and network gradients.

``check_network`` perturbs every weight and bias by +-h and recomputes the
loss with its own forward pass, carried out in extended precision
(``numpy.longdouble``). Float64 cancellation in ``loss(p + h) - loss(p - h)``
would otherwise leave ~1e-10 absolute noise, which exceeds a 1e-6 relative
tolerance on gradients of order 1e-5 and smaller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .activation import ActivationSpec, Kind
from .errors import OracleError
from .network import DerivativeFn, Network, backward, forward, init_network, one_hot

__all__ = [
    "DEFAULT_STEP",
    "REL_GUARD",
    "GradCheckRecord",
    "GradCheckReport",
    "fd_scalar",
    "fd_second",
    "relative_error",
    "check_network",
    "random_instance",
]

DEFAULT_STEP = 1e-6
REL_GUARD = 1e-8

_LD = np.longdouble


def fd_scalar(f: Callable[[float], float], x: float, h: float = DEFAULT_STEP) -> float:
    """Central difference ``(f(x + h) - f(x - h)) / (2h)``."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    hi, lo = f(x + h), f(x - h)
    if not (math.isfinite(hi) and math.isfinite(lo)):
        raise OracleError(f"non-finite function value near x={x!r}")
    return (hi - lo) / (2.0 * h)


def fd_second(f: Callable[[float], float], x: float, h: float = 1e-4) -> float:
    """Second central difference ``(f(x + h) - 2 f(x) + f(x - h)) / h**2``."""
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    vals = f(x + h), f(x), f(x - h)
    if not all(math.isfinite(v) for v in vals):
        raise OracleError(f"non-finite function value near x={x!r}")
    return (vals[0] - 2.0 * vals[1] + vals[2]) / (h * h)


def relative_error(a: float, b: float, guard: float = REL_GUARD) -> float:
    return abs(a - b) / max(abs(a), abs(b), guard)


@dataclass
class GradCheckRecord:
    param: str
    analytic: float
    numeric: float
    rel_error: float
    straddles_clamp: bool = False


@dataclass
class GradCheckReport:
    records: list[GradCheckRecord]
    h: float
    max_rel_error: float = field(init=False)

    def __post_init__(self):
        # records whose +-h probes land on different sides of a clamp kink
        # are listed but cannot be judged by a central difference
        errs = [r.rel_error for r in self.records if not r.straddles_clamp]
        self.max_rel_error = max(errs, default=0.0)

    @property
    def straddled(self) -> list[str]:
        return [r.param for r in self.records if r.straddles_clamp]

    def to_tsv(self) -> str:
        lines = ["param\tanalytic\tnumeric\trel_error"]
        for r in self.records:
            lines.append(f"{r.param}\t{r.analytic:.17g}\t{r.numeric:.17g}\t{r.rel_error:.6e}")
        return "\n".join(lines) + "\n"


def _activation_ext(z, spec: ActivationSpec):
    """Activation values and kink-side masks, in extended precision."""
    if spec.kind is Kind.SBAF:
        lo, hi = _LD(spec.clamp_margin), _LD(1) - _LD(spec.clamp_margin)
        u = np.clip(z, lo, hi)
        a = _LD(spec.alpha)
        y = _LD(1) / (_LD(1) + _LD(spec.k) * u**a * (_LD(1) - u) ** (_LD(1) - a))
        side = np.where(z < lo, -1, np.where(z > hi, 1, 0))
        return y, side
    if spec.kind is Kind.SIGMOID:
        return _LD(1) / (_LD(1) + np.exp(-z)), np.zeros(z.shape, dtype=int)
    return np.maximum(z, _LD(0)), (z > 0).astype(int)


def _loss_ext(weights, biases, spec, x, t):
    prev = x
    sides = []
    for w, b in zip(weights, biases):
        prev, side = _activation_ext(w @ prev + b, spec)
        sides.append(side)
    return _LD(0.5) * np.sum((t - prev) ** 2), sides


def check_network(
    net: Network,
    x,
    targets,
    h: float = DEFAULT_STEP,
    derivative_fn: DerivativeFn | None = None,
) -> GradCheckReport:
    """Compare ``backward`` against central differences of the loss, per parameter.

    ``derivative_fn`` is handed to ``backward`` unchanged, so a deliberately
    wrong derivative can be checked too.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    grads = backward(net, forward(net, x), t, derivative_fn=derivative_fn)

    spec = net.activation
    w_ext = [w.astype(_LD) for w in net.weights]
    b_ext = [b.astype(_LD) for b in net.biases]
    x_ext, t_ext, h_ext = x.astype(_LD), t.astype(_LD), _LD(h)

    records = []
    for layer in range(len(net.weights)):
        for name, params, analytic in (
            (f"W{layer + 1}", w_ext[layer], grads.weights[layer]),
            (f"b{layer + 1}", b_ext[layer], grads.biases[layer]),
        ):
            for idx in np.ndindex(params.shape):
                orig = params[idx]
                params[idx] = orig + h_ext
                up, sides_up = _loss_ext(w_ext, b_ext, spec, x_ext, t_ext)
                params[idx] = orig - h_ext
                down, sides_down = _loss_ext(w_ext, b_ext, spec, x_ext, t_ext)
                params[idx] = orig
                if not (np.isfinite(up) and np.isfinite(down)):
                    raise OracleError(f"non-finite loss while perturbing {name}{list(idx)}")
                numeric = float((up - down) / (2 * h_ext))
                a = float(analytic[idx])
                straddle = any(np.any(s1 != s2) for s1, s2 in zip(sides_up, sides_down))
                label = f"{name}[{','.join(str(i) for i in idx)}]"
                records.append(GradCheckRecord(label, a, numeric, relative_error(a, numeric), straddle))
    return GradCheckReport(records, h)


def random_instance(layer_sizes, seed: int, activation: ActivationSpec | None = None):
    """A freshly initialised network plus one random input and one-hot target.

    The network comes from ``init_network(layer_sizes, activation, seed)``;
    the input (uniform on [0.01, 0.99]) and the target class are drawn from
    a separate stream keyed on the same seed.
    """
    net = init_network(layer_sizes, activation, seed=seed)
    rng = np.random.default_rng([seed, 1])
    x = rng.uniform(0.01, 0.99, net.n_inputs)
    target = one_hot([rng.integers(net.n_outputs)], net.n_outputs)[0]
    return net, x, target
