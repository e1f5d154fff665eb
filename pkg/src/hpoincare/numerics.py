"""Shared numerical kernels.

Adaptive Gauss-Legendre quadrature on finite and semi-infinite intervals
(semi-infinite integrals are evaluated in the log coordinate t = ln s),
bracketed inversion of monotone functions, and log-spaced grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(ValueError):
    """The target value is not enclosed by the supplied bracket."""


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the best estimate found."""

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 4000
    tail_decay_exponent: float | None = None

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class GridSpec:
    s_min: float
    s_max: float
    points: int = 4096

    def __post_init__(self):
        if not (self.s_min > 0):
            raise ValueError("s_min must be positive")
        if not (self.s_max > self.s_min):
            raise ValueError("s_max must exceed s_min")
        if self.points < 2:
            raise ValueError("need at least two grid points")


def log_grid(spec: GridSpec) -> np.ndarray:
    """Log-uniform nodes covering [s_min, s_max] (constant node ratio)."""
    return np.geomspace(spec.s_min, spec.s_max, spec.points)


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(order):
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GAUSS_CACHE[order]


def _vectorize(f):
    def fv(x):
        x = np.asarray(x, dtype=float)
        y = f(x)
        y = np.asarray(y, dtype=float)
        if y.shape != x.shape:
            y = np.array([f(xi) for xi in x.ravel()], dtype=float).reshape(x.shape)
        return y

    return fv


def _panel(fv, a, b):
    """Return (fine estimate, error estimate) on [a, b] from a G16/G32 pair."""
    est = []
    for order in (16, 32):
        x, w = _gauss(order)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        vals = fv(mid + half * x)
        if np.any(np.isnan(vals)):
            bad = (mid + half * x)[np.isnan(vals)][0]
            raise QuadratureError(f"integrand returned NaN at {bad!r}")
        est.append(half * float(np.dot(w, vals)))
    return est[1], abs(est[1] - est[0])


def _adaptive(fv, a, b, cfg, budget):
    """Adaptive bisection with a G16/G32 error estimate on each panel."""
    rough, _ = _panel(fv, a, b)
    scale = max(abs(rough), cfg.abs_tol)
    stack = [(a, b)]
    total = 0.0
    err_total = 0.0
    while stack:
        lo, hi = stack.pop()
        est, err = _panel(fv, lo, hi)
        width_frac = (hi - lo) / (b - a)
        tol = max(cfg.abs_tol, cfg.rel_tol * scale) * max(width_frac, 1e-3)
        if err <= tol or (hi - lo) < 1e-14 * (abs(lo) + abs(hi) + 1.0):
            total += est
            err_total += err
            scale = max(scale, abs(total))
            continue
        budget[0] -= 1
        if budget[0] <= 0:
            raise QuadratureError(
                "quadrature did not converge within max_subdivisions",
                estimate=total + est,
                error_bound=err_total + err,
            )
        mid = 0.5 * (lo + hi)
        stack.append((lo, mid))
        stack.append((mid, hi))
    return total, err_total


def _finite(fv, a, b, cfg, breakpoints, budget):
    cuts = sorted({a, b} | {float(c) for c in breakpoints if a < c < b})
    total = 0.0
    err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if lo > 0 and hi / lo > 20.0:
            # wide log-scale span: integrate in t = ln s, in panels of width <= 15
            tlo, thi = np.log(lo), np.log(hi)
            g = lambda t: fv(np.exp(t)) * np.exp(t)
            edges = np.linspace(tlo, thi, max(2, int(np.ceil((thi - tlo) / 15.0)) + 1))
            for u, v in zip(edges[:-1], edges[1:]):
                part, e = _adaptive(g, u, v, cfg, budget)
                total += part
                err += e
        else:
            part, e = _adaptive(fv, lo, hi, cfg, budget)
            total += part
            err += e
    return total, err


def integrate(f, a, b, cfg: QuadratureConfig = DEFAULT_QUADRATURE,
              breakpoints=(), tail_decay: float | None = None) -> float:
    """Integrate f over [a, b]; b may be np.inf given a power-law tail bound.

    The semi-infinite case extends the truncation point until the declared
    power-law majorant bounds the remainder below tolerance.
    """
    if not (a < b):
        raise ValueError("need a < b")
    fv = _vectorize(f)
    budget = [cfg.max_subdivisions]
    if np.isinf(b):
        decay = tail_decay if tail_decay is not None else cfg.tail_decay_exponent
        if decay is None or decay <= 1:
            raise ValueError("semi-infinite integral needs tail decay exponent > 1")
        bks = [float(c) for c in breakpoints if np.isfinite(c)]
        B = max([2.0 * abs(a), 1.0] + [2.0 * c for c in bks if c > a])
        B = max(B, a + 1.0)
        total, err = _finite(fv, a, B, cfg, bks, budget)
        for _ in range(300):
            bound = abs(float(fv(np.array([B]))[0])) * B / (decay - 1.0)
            if bound <= max(cfg.abs_tol, cfg.rel_tol * abs(total)):
                break
            part, e = _finite(fv, B, 8.0 * B, cfg, (), budget)
            total += part
            err += e
            B *= 8.0
        else:
            raise QuadratureError("tail truncation did not converge",
                                  estimate=total, error_bound=err)
        return total
    total, err = _finite(fv, a, b, cfg, breakpoints, budget)
    return total


def batched_gauss(fn, a, b, order: int = 16) -> np.ndarray:
    """Fixed-order Gauss-Legendre integrals of fn over many intervals [a_i, b_i].

    fn must be vectorized; all intervals are evaluated in one call.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = _gauss(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals * w[None, :]).sum(axis=1)


def invert_monotone(g, y: float, bracket, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Solve g(x) = y for strictly increasing g on the given bracket."""
    lo, hi = bracket
    if not (lo < hi):
        raise BracketError("bracket must satisfy lo < hi")
    glo, ghi = g(lo), g(hi)
    if not (glo <= y <= ghi):
        raise BracketError(f"target {y} outside [g(lo), g(hi)] = [{glo}, {ghi}]")
    if glo == y:
        return lo
    if ghi == y:
        return hi
    x = brentq(lambda s: g(s) - y, lo, hi, xtol=1e-15 * (1.0 + abs(hi)), rtol=8.9e-16)
    resid = abs(g(x) - y)
    if resid > max(cfg.abs_tol, cfg.rel_tol * abs(y)) * 10.0:
        raise QuadratureError("monotone inversion did not reach tolerance", estimate=x,
                              error_bound=resid)
    return float(x)
