"""SBAF and baseline activations with their derivatives.

SBAF is

    y = 1 / (1 + k * x**alpha * (1 - x)**(1 - alpha))

and is defined for ``0 < x < 1``. Net inputs of a dense layer routinely leave
that interval, so every SBAF evaluation first clamps its argument into
``[eps, 1 - eps]``. Outside the clamp interval the function is flat, and the
derivatives are reported as zero (the same saturation behaviour as sigmoid
tails).

All functions accept Python floats or numpy arrays and work elementwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Kind",
    "ActivationSpec",
    "clamp_domain",
    "kernel",
    "sbaf",
    "sbaf_derivative",
    "sbaf_derivative_flipped",
    "sbaf_second_derivative",
    "sbaf_floor",
    "baseline_activation",
    "baseline_derivative",
    "activate",
    "derivative",
]


class Kind(str, enum.Enum):
    SBAF = "sbaf"
    SIGMOID = "sigmoid"
    RELU = "relu"


@dataclass(frozen=True)
class ActivationSpec:
    """Which activation to use, plus the SBAF hyperparameters.

    ``k``, ``alpha`` and ``clamp_margin`` are validated and stored for every
    kind but only read when ``kind`` is SBAF.
    """

    kind: Kind = Kind.SBAF
    k: float = 1.0
    alpha: float = 0.5
    clamp_margin: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for name in ("k", "alpha", "clamp_margin"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 < self.clamp_margin < 0.5:
            raise ValueError(f"clamp_margin must lie in (0, 0.5), got {self.clamp_margin}")

    @property
    def lower(self) -> float:
        return self.clamp_margin

    @property
    def upper(self) -> float:
        return 1.0 - self.clamp_margin


def _check_finite(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("activation input must be finite")
    return x


def _require_sbaf(spec):
    if spec.kind is not Kind.SBAF:
        raise ValueError(f"expected an SBAF spec, got {spec.kind.value}")


def _out(x, result):
    # keep scalars scalar
    return float(result) if np.ndim(x) == 0 else result


def clamp_domain(x, spec: ActivationSpec):
    """Clamp ``x`` into ``[eps, 1 - eps]``; identity inside that interval."""
    _require_sbaf(spec)
    arr = _check_finite(x)
    return _out(x, np.clip(arr, spec.lower, spec.upper))


def kernel(x, spec: ActivationSpec):
    """The denominator term ``k * u**alpha * (1 - u)**(1 - alpha)`` at the clamped input."""
    u = np.asarray(clamp_domain(x, spec))
    return _out(x, spec.k * u**spec.alpha * (1.0 - u) ** (1.0 - spec.alpha))


def sbaf(x, spec: ActivationSpec):
    g = np.asarray(kernel(x, spec))
    return _out(x, 1.0 / (1.0 + g))


def sbaf_floor(spec: ActivationSpec) -> float:
    """Smallest SBAF value, attained at ``x = alpha``.

    With the clamp in place the infimum over the clamped domain is the value
    at the clamped alpha; for alpha in ``[eps, 1 - eps]`` that is the
    unconstrained minimum ``1 / (1 + k * alpha**alpha * (1 - alpha)**(1 - alpha))``.
    """
    _require_sbaf(spec)
    return float(sbaf(spec.alpha, spec))


def _saturated(arr, spec):
    return (arr < spec.lower) | (arr > spec.upper)


def sbaf_derivative(x, spec: ActivationSpec):
    """dy/dx = y(1 - y)(u - alpha) / (u(1 - u)) at the clamped input ``u``.

    Zero wherever ``x`` falls outside the clamp interval.
    """
    arr = _check_finite(x)
    u = np.asarray(clamp_domain(arr, spec))
    y = np.asarray(sbaf(u, spec))
    d = y * (1.0 - y) * (u - spec.alpha) / (u * (1.0 - u))
    return _out(x, np.where(_saturated(arr, spec), 0.0, d))


def sbaf_derivative_flipped(x, spec: ActivationSpec):
    """SBAF derivative with the numerator written as ``(alpha - u)``.

    This is the negation of the true derivative. It is kept only so gradient
    checks can show the mismatch.
    """
    return _out(x, -np.asarray(sbaf_derivative(x, spec)))


def sbaf_second_derivative(x, spec: ActivationSpec):
    """Second derivative of SBAF at the clamped input; zero when saturated.

    With s = y(1 - y), d = u - alpha and p = u(1 - u):

        y'' = s * ((1 - 2y) d**2 + p - d(1 - 2u)) / p**2

    which reduces to s / p at the stationary point u = alpha.
    """
    arr = _check_finite(x)
    u = np.asarray(clamp_domain(arr, spec))
    y = np.asarray(sbaf(u, spec))
    s = y * (1.0 - y)
    d = u - spec.alpha
    p = u * (1.0 - u)
    dd = s * ((1.0 - 2.0 * y) * d * d + p - d * (1.0 - 2.0 * u)) / (p * p)
    return _out(x, np.where(_saturated(arr, spec), 0.0, dd))


def baseline_activation(x, spec: ActivationSpec):
    """Sigmoid ``1 / (1 + exp(-x))`` or ReLU ``max(0, x)``."""
    arr = _check_finite(x)
    if spec.kind is Kind.SIGMOID:
        # split by sign so exp never overflows
        e = np.exp(-np.abs(arr))
        y = np.where(arr >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    elif spec.kind is Kind.RELU:
        y = np.maximum(arr, 0.0)
    else:
        raise ValueError(f"expected a baseline spec, got {spec.kind.value}")
    return _out(x, y)


def baseline_derivative(x, spec: ActivationSpec):
    """Sigmoid y(1 - y); ReLU 1 for x > 0 and 0 otherwise (including x = 0)."""
    arr = _check_finite(x)
    if spec.kind is Kind.SIGMOID:
        y = np.asarray(baseline_activation(arr, spec))
        d = y * (1.0 - y)
    elif spec.kind is Kind.RELU:
        d = (arr > 0).astype(np.float64)
    else:
        raise ValueError(f"expected a baseline spec, got {spec.kind.value}")
    return _out(x, d)


def activate(x, spec: ActivationSpec):
    """Evaluate whichever activation ``spec`` names."""
    if spec.kind is Kind.SBAF:
        return sbaf(x, spec)
    return baseline_activation(x, spec)


def derivative(x, spec: ActivationSpec):
    if spec.kind is Kind.SBAF:
        return sbaf_derivative(x, spec)
    return baseline_derivative(x, spec)


def evaluate_with_slope(z: np.ndarray, spec: ActivationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Activation value and derivative for a float64 array of net inputs.

    Unvalidated fast path for the training loop; same results as
    ``activate`` and ``derivative``.
    """
    if spec.kind is Kind.SBAF:
        lo, hi = spec.lower, spec.upper
        u = np.minimum(np.maximum(z, lo), hi)
        v = 1.0 - u
        y = 1.0 / (1.0 + spec.k * u**spec.alpha * v ** (1.0 - spec.alpha))
        d = y * (1.0 - y) * (u - spec.alpha) / (u * v)
        d[(z < lo) | (z > hi)] = 0.0
        return y, d
    if spec.kind is Kind.SIGMOID:
        y = np.asarray(baseline_activation(z, spec))
        return y, y * (1.0 - y)
    return np.maximum(z, 0.0), (z > 0).astype(np.float64)
