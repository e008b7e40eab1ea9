"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate
from scipy.special import gammaln, xlog1py, xlogy


def check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def binomial_log_pmf(n: int, p: float) -> np.ndarray:
    """Log-probabilities of w = 0..n successes in n Bernoulli(p) trials.

    Built from log-gamma terms so that n in the tens of thousands neither
    overflows the binomial coefficient nor underflows p**w before the sum.
    Impossible outcomes (p in {0, 1}) get -inf.
    """
    w = np.arange(n + 1, dtype=float)
    log_coef = gammaln(n + 1.0) - gammaln(w + 1.0) - gammaln(n - w + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if p == 0.0:
            tail = np.where(w == 0, 0.0, -np.inf)
        elif p == 1.0:
            tail = np.where(w == n, 0.0, -np.inf)
        else:
            tail = w * math.log(p) + (n - w) * math.log1p(-p)
    return log_coef + tail


def binomial_pmf(n: int, p: float) -> np.ndarray:
    return np.exp(binomial_log_pmf(n, p))


def weighted_log_sum(weights: np.ndarray, logs: np.ndarray) -> float:
    """sum(weights * logs) with the 0 * log(0) = 0 convention."""
    mask = weights > 0
    return float(np.sum(weights[mask] * logs[mask]))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(1024)


def fixed_quad(func, a: float, b: float) -> float:
    """1024-node Gauss-Legendre rule on [a, b]; func must accept arrays."""
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    return float(0.5 * (b - a) * np.sum(_GL_WEIGHTS * func(x)))


def integrate_1d(func, a: float, b: float, points=(), epsabs: float = 1e-12) -> float:
    """Adaptive Gauss-Kronrod integral of func over [a, b].

    Falls back to piecewise fixed Gauss-Legendre between the breakpoints
    when QUADPACK reports it could not reach the tolerance.
    """
    inner = sorted(x for x in points if a < x < b)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                lambda x: float(np.ravel(func(np.array([x])))[0]),
                a,
                b,
                points=inner or None,
                epsabs=epsabs,
                epsrel=1e-12,
                limit=max(200, 4 * len(inner) + 50),
            )
            return float(value)
        except integrate.IntegrationWarning:
            pass
    edges = [a, *inner, b]
    return sum(fixed_quad(func, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))


def binomial_pmf_grid(n: int, p) -> np.ndarray:
    """Matrix of P(w; n, p) with one row per entry of p and columns w = 0..n."""
    p = np.atleast_1d(np.asarray(p, dtype=float))[:, None]
    w = np.arange(n + 1, dtype=float)[None, :]
    log_coef = gammaln(n + 1.0) - gammaln(w + 1.0) - gammaln(n - w + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(log_coef + xlogy(w, p) + xlog1py(n - w, -p))
    return np.nan_to_num(out, nan=0.0)
