"""Piecewise-linear stand-in for the SBAF kernel term.

The kernel ``g(x) = k * x**alpha * (1 - x)**(1 - alpha)`` is replaced by its
chord interpolant over uniform breakpoints on ``[eps, 1 - eps]``, and the
activation becomes ``1 / (1 + g_hat(x))``. Evaluation then needs one
multiply-add per input instead of two fractional powers. With a single
segment the kernel is a first-order polynomial over the whole domain.

g is concave for alpha in [0, 1], so each chord lies below it and the
approximate activation is never smaller than the exact one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .activation import ActivationSpec, Kind, kernel, sbaf
from .errors import DomainError

__all__ = ["PiecewiseKernel", "build_kernel", "eval_approx", "measure_error", "benchmark"]


@dataclass(frozen=True, eq=False)
class PiecewiseKernel:
    spec: ActivationSpec
    n_segments: int
    breakpoints: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray

    @property
    def segments(self) -> list[tuple[float, float, float, float]]:
        """(x_start, x_end, slope, intercept) for every segment, left to right."""
        b = self.breakpoints
        return [
            (float(b[i]), float(b[i + 1]), float(self.slopes[i]), float(self.intercepts[i]))
            for i in range(self.n_segments)
        ]

    def kernel_values(self, x):
        """Interpolated kernel at ``x`` (clamped into the breakpoint range)."""
        lo = self.breakpoints[0]
        hi = self.breakpoints[-1]
        u = np.clip(np.asarray(x, dtype=np.float64), lo, hi)
        width = (hi - lo) / self.n_segments
        idx = np.minimum(((u - lo) / width).astype(np.intp), self.n_segments - 1)
        return self.slopes[idx] * u + self.intercepts[idx]


def build_kernel(spec: ActivationSpec, n_segments: int) -> PiecewiseKernel:
    if spec.kind is not Kind.SBAF:
        raise ValueError("piecewise kernels approximate SBAF only")
    if int(n_segments) != n_segments or n_segments < 1:
        raise ValueError(f"n_segments must be a positive integer, got {n_segments!r}")
    n_segments = int(n_segments)
    b = np.linspace(spec.lower, spec.upper, n_segments + 1)
    g = np.asarray(kernel(b, spec))
    slopes = np.diff(g) / np.diff(b)
    intercepts = g[:-1] - slopes * b[:-1]
    for arr in (b, slopes, intercepts):
        arr.setflags(write=False)
    return PiecewiseKernel(spec, n_segments, b, slopes, intercepts)


def eval_approx(pk: PiecewiseKernel, x):
    """Approximate SBAF: ``1 / (1 + g_hat(x))``. No fractional powers involved."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("activation input must be finite")
    y = 1.0 / (1.0 + pk.kernel_values(arr))
    return float(y) if np.ndim(x) == 0 else y


def measure_error(pk: PiecewiseKernel, n_grid: int) -> tuple[float, float]:
    """Max |y_hat - y| and max |g_hat - g| over ``n_grid`` uniform points of the domain."""
    if n_grid < 2:
        raise ValueError(f"n_grid must be >= 2, got {n_grid}")
    grid = np.linspace(pk.spec.lower, pk.spec.upper, int(n_grid))
    err_y = np.max(np.abs(eval_approx(pk, grid) - sbaf(grid, pk.spec)))
    err_g = np.max(np.abs(pk.kernel_values(grid) - kernel(grid, pk.spec)))
    return float(err_y), float(err_g)


def _ns_per_eval(fn, x, repeats):
    best = None
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn(x)
        dt = time.perf_counter_ns() - t0
        best = dt if best is None else min(best, dt)
    return best / x.size


def benchmark(spec: ActivationSpec, segments, n_grid: int, repeats: int = 5):
    """Rows of (segments, max_err_g, max_err_y, ns_exact, ns_approx).

    Timings are best-of-``repeats`` wall clock over a vectorised pass on the
    grid and vary from run to run.
    """
    grid = np.linspace(spec.lower, spec.upper, int(n_grid))
    ns_exact = _ns_per_eval(lambda v: sbaf(v, spec), grid, repeats)
    rows = []
    for n in segments:
        pk = build_kernel(spec, n)
        err_y, err_g = measure_error(pk, n_grid)
        ns_approx = _ns_per_eval(lambda v: eval_approx(pk, v), grid, repeats)
        rows.append((int(n), err_g, err_y, ns_exact, ns_approx))
    return rows
