"""Optimal betting across M identical independent games played at once.

With a fraction f staked on each game and w of the M games won, wealth is
multiplied by 1 + (2w - M) f. Losing all M games at once has probability
(1-p)^M > 0, so any p < 1 keeps the total stake M f below one.

The exact optimum is found by root finding on dG/df. Two closed-form
approximations cover the unsaturated (M f << 1) and saturated
(1 - M f << 1) regimes and are joined at their intersection p_c(M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._numerics import binomial_pmf, check_probability, weighted_log_sum

METHODS = ("exact", "closed_form", "unsaturated", "saturated", "piecewise")

# log of the smallest uninvested fraction the solver will represent
_LOG_U_FLOOR = -700.0


class NoIntersectionError(ValueError):
    """The two approximations do not cross inside (1/2, 1)."""


@dataclass(frozen=True)
class PortfolioSolution:
    p: float
    M: int
    f_star: float
    growth: float
    method: str
    uninvested: float | None = None

    @property
    def total_invested(self) -> float:
        return self.M * self.f_star

    def __post_init__(self):
        if self.uninvested is None:
            object.__setattr__(self, "uninvested", 1.0 - self.M * self.f_star)


def _check_m(M: int) -> int:
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    return int(M)


def multi_growth(p: float, M: int, f: float) -> float:
    """Growth rate sum_w P(w; M, p) ln[1 + (2w - M) f] for stake f per game."""
    p = check_probability(p)
    M = _check_m(M)
    f = float(f)
    if f < 0:
        raise ValueError(f"f must be nonnegative, got {f}")
    if M * f >= 1.0 and p < 1.0:
        raise ValueError(
            f"total stake M*f = {M * f} >= 1 risks ruin when p < 1 (p={p})"
        )
    w = np.arange(M + 1)
    factors = 1.0 + (2 * w - M) * f
    with np.errstate(divide="ignore"):
        logs = np.log(factors)
    return weighted_log_sum(binomial_pmf(M, p), logs)


def _growth_from_uninvested(weights: np.ndarray, M: int, u: float) -> float:
    # 1 + (2w - M) f rewritten with u = 1 - M f keeps precision as u -> 0
    w = np.arange(M + 1)
    with np.errstate(divide="ignore"):
        logs = np.log((2.0 * w / M) * (1.0 - u) + u)
    return weighted_log_sum(weights, logs)


def condition_residual(p: float, M: int, f: float, uninvested: float | None = None) -> float:
    """sum_w P(w) / [1 + (2w - M) f] - 1; zero at the optimum.

    Pass the uninvested fraction 1 - M f when known; near saturation it
    carries digits that f alone cannot.
    """
    w = np.arange(M + 1)
    u = 1.0 - M * f if uninvested is None else uninvested
    factors = (2.0 * w / M) * (1.0 - u) + u
    return float(np.sum(binomial_pmf(M, p) / factors) - 1.0)


def solve_exact(p: float, M: int) -> PortfolioSolution:
    """Numerically optimal stake per game.

    The first-order condition is solved in terms of the uninvested
    fraction u = 1 - M f, bracketed on log u. Near saturation this keeps
    f* accurate even when 1/M - f* is below double-precision spacing.
    """
    p = check_probability(p)
    M = _check_m(M)
    if p <= 0.5:
        return PortfolioSolution(p, M, 0.0, 0.0, "exact", uninvested=1.0)
    weights = binomial_pmf(M, p)
    if p == 1.0:
        return PortfolioSolution(p, M, 1.0 / M, math.log(2.0), "exact", uninvested=0.0)

    w = np.arange(M + 1)
    gain = 2.0 * w / M
    slope = (2 * w - M).astype(float)

    def dgrowth(log_u: float) -> float:
        u = math.exp(log_u)
        return float(np.sum(weights * slope / (gain * (1.0 - u) + u)))

    if dgrowth(_LOG_U_FLOOR) > 0:
        u = 0.0
    else:
        log_u = brentq(dgrowth, _LOG_U_FLOOR, 0.0, xtol=1e-14, rtol=1e-15, maxiter=500)
        u = math.exp(log_u)
    f_star = (1.0 - u) / M
    return PortfolioSolution(
        p, M, f_star, _growth_from_uninvested(weights, M, u), "exact", uninvested=u
    )


def closed_form(p: float, M: int) -> PortfolioSolution:
    """Closed-form optimum, available for M = 1 and M = 2 only."""
    p = check_probability(p)
    M = _check_m(M)
    edge = 2.0 * p - 1.0
    if M == 1:
        f = max(edge, 0.0)
    elif M == 2:
        f = max(edge / (4.0 * p * p - 4.0 * p + 2.0), 0.0)
    else:
        raise ValueError(f"closed form is only available for M in {{1, 2}}, got M={M}")
    return _solution(p, M, f, "closed_form")


def _solution(p: float, M: int, f: float, method: str, uninvested: float | None = None) -> PortfolioSolution:
    f = min(max(f, 0.0), 1.0 / M)
    u = 1.0 - M * f if uninvested is None else min(max(uninvested, 0.0), 1.0)
    if u <= 0.0 and p < 1.0:
        growth = -math.inf
    else:
        growth = _growth_from_uninvested(binomial_pmf(M, p), M, u)
    return PortfolioSolution(p, M, f, growth, method, uninvested=u)


def unsaturated_fraction(p: float, M: int) -> float:
    edge = 2.0 * p - 1.0
    return edge / (M * edge * edge + 4.0 * p * (1.0 - p))


def saturated_fraction(p: float, M: int) -> float:
    edge = 2.0 * np.asarray(p, dtype=float) - 1.0
    if np.any(edge <= 0.0):
        raise ValueError(f"saturated approximation is singular for p <= 1/2, got p={p}")
    out = (1.0 - 2.0 * p * (1.0 - p) ** M / edge) / M
    return float(out) if out.ndim == 0 else out


def approx_unsaturated(p: float, M: int) -> PortfolioSolution:
    """Small-stake approximation from a second-order expansion of the condition."""
    p = check_probability(p)
    M = _check_m(M)
    if p < 0.5:
        return _solution(p, M, 0.0, "unsaturated")
    return _solution(p, M, unsaturated_fraction(p, M), "unsaturated")


def approx_saturated(p: float, M: int) -> PortfolioSolution:
    """Near-full-investment approximation, clamped below at zero."""
    p = check_probability(p)
    M = _check_m(M)
    f = saturated_fraction(p, M)
    if f <= 0.0:
        return _solution(p, M, 0.0, "saturated")
    # the uninvested share in closed form keeps digits lost in 1 - M f
    u = 2.0 * p * (1.0 - p) ** M / (2.0 * p - 1.0)
    return _solution(p, M, f, "saturated", uninvested=u)


def _crossover_grid() -> np.ndarray:
    # dense near both ends: p_c -> 1/2 for large M, and the curves meet at p = 1
    eps = np.logspace(-6, math.log10(0.5 - 1e-6), 1500)
    return np.unique(np.concatenate([0.5 + eps, 1.0 - eps]))


_GRID = _crossover_grid()


def crossover_pc(M: int) -> float:
    """Largest p in (1/2, 1) where the two approximations intersect.

    Raises NoIntersectionError when their difference keeps one sign, which
    happens for M = 1 (the curves only touch at p = 1).
    """
    M = _check_m(M)

    def diff(p):
        return unsaturated_fraction(p, M) - saturated_fraction(p, M)

    values = diff(_GRID)
    # near p = 1 the curves agree to O((1-p)^3) and the sign is rounding noise
    keep = np.abs(values) > 1e-13
    grid, sign = _GRID[keep], np.sign(values[keep])
    changes = np.nonzero(sign[1:] * sign[:-1] < 0)[0]
    if changes.size == 0:
        raise NoIntersectionError(f"no intersection of the approximations for M={M}")
    i = changes[-1]
    return float(brentq(diff, grid[i], grid[i + 1], xtol=1e-13, rtol=1e-15))


def piecewise_approx(p: float, M: int) -> PortfolioSolution:
    """Unsaturated branch for p <= p_c(M), saturated branch above."""
    p = check_probability(p)
    M = _check_m(M)
    try:
        pc = crossover_pc(M)
    except NoIntersectionError:
        pc = 1.0
    if p <= pc:
        sol = approx_unsaturated(p, M)
    else:
        sol = approx_saturated(p, M)
    return PortfolioSolution(p, M, sol.f_star, sol.growth, "piecewise", sol.uninvested)


def solve(p: float, M: int, method: str = "exact") -> PortfolioSolution:
    solvers = {
        "exact": solve_exact,
        "closed_form": closed_form,
        "unsaturated": approx_unsaturated,
        "saturated": approx_saturated,
        "piecewise": piecewise_approx,
    }
    try:
        return solvers[method](p, M)
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
