"""Betting on a game whose winning probability is only known from history.

The bettor sees w wins in the last L outcomes. Under a uniform prior the
posterior over p has mean (w + 1)/(L + 2), and since the log-optimal
stake under an uncertain p is 2<p> - 1, the bet becomes

    f(w, L) = (2w - L) / (L + 2)

floored at zero when short selling is not allowed ("clamped"), or kept
signed. The growth of such a bettor lags the Kelly growth roughly by
1/(2L), so weakly favourable games need very long memories.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.special import gammaln, xlog1py, xlogy

from ._numerics import binomial_pmf, binomial_pmf_grid, check_probability, integrate_1d
from .kelly_core import kelly_compounded_return, kelly_growth, kelly_growth_analytic


class OutOfRegimeWarning(UserWarning):
    """Approximation evaluated where its accuracy is not guaranteed."""


class MemoryCapExceeded(RuntimeError):
    """No profitable memory length was found below the scan cap."""


# --------------------------------------------------------------------- priors


@dataclass(frozen=True)
class PriorSpec:
    """Belief over the winning probability before any outcome is seen.

    Use the constructors: ``uniform()``, ``truncated_uniform(lo, hi)``,
    ``tabulated(grid, density)`` and ``discrete(points, weights)``.
    """

    kind: str
    lo: float = 0.0
    hi: float = 1.0
    grid: tuple = ()
    values: tuple = ()

    @classmethod
    def uniform(cls) -> "PriorSpec":
        return cls("uniform")

    @classmethod
    def truncated_uniform(cls, lo: float, hi: float) -> "PriorSpec":
        lo, hi = check_probability(lo, "lo"), check_probability(hi, "hi")
        if hi <= lo:
            raise ValueError(f"empty support [{lo}, {hi}] cannot be normalized")
        return cls("truncated_uniform", lo=lo, hi=hi)

    @classmethod
    def tabulated(cls, grid, density) -> "PriorSpec":
        """Piecewise-linear density through (grid, density), renormalized."""
        grid = np.asarray(grid, dtype=float)
        density = np.asarray(density, dtype=float)
        if grid.ndim != 1 or grid.shape != density.shape or grid.size < 2:
            raise ValueError("grid and density must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > 1:
            raise ValueError("grid must be strictly increasing inside [0, 1]")
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise ValueError("density must be finite and nonnegative")
        total = float(trapezoid(density, grid))
        if total <= 0:
            raise ValueError("density integrates to zero and cannot be normalized")
        return cls(
            "tabulated",
            lo=float(grid[0]),
            hi=float(grid[-1]),
            grid=tuple(grid),
            values=tuple(density / total),
        )

    @classmethod
    def discrete(cls, points, weights) -> "PriorSpec":
        """Finite set of candidate probabilities; a single point is a point mass."""
        points = np.atleast_1d(np.asarray(points, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if points.shape != weights.shape:
            raise ValueError("points and weights must have equal length")
        if np.any((points < 0) | (points > 1)):
            raise ValueError("points must lie in [0, 1]")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be nonnegative with a positive sum")
        return cls(
            "discrete", grid=tuple(points), values=tuple(weights / weights.sum())
        )

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    def pdf(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "uniform":
            return np.where((p >= 0) & (p <= 1), 1.0, 0.0)
        if self.kind == "truncated_uniform":
            return np.where((p >= self.lo) & (p <= self.hi), 1.0 / (self.hi - self.lo), 0.0)
        if self.kind == "tabulated":
            return np.interp(p, self.grid, self.values, left=0.0, right=0.0)
        raise TypeError("a discrete prior has no density")

    @property
    def breakpoints(self) -> list[float]:
        if self.kind == "tabulated" and len(self.grid) <= 200:
            return list(self.grid)
        return [self.lo, self.hi]

    def expect(self, func, extra_points=()) -> float:
        """Integral of pdf(p) * func(p) over [0, 1] (a weighted sum if discrete)."""
        if self.is_discrete:
            pts = np.asarray(self.grid)
            return float(np.sum(np.asarray(self.values) * func(pts)))
        return integrate_1d(
            lambda x: self.pdf(x) * func(x),
            self.lo,
            self.hi,
            points=[*self.breakpoints, *extra_points],
        )

    def mean(self) -> float:
        return self.expect(lambda x: x)


# ------------------------------------------------------------------ posterior


def _check_history(w: int, L: int) -> tuple[int, int]:
    if int(L) != L or L < 0:
        raise ValueError(f"memory length must be a nonnegative integer, got {L}")
    if int(w) != w or not 0 <= w <= L:
        raise ValueError(f"win count must be an integer in [0, {L}], got {w}")
    return int(w), int(L)


@dataclass(frozen=True)
class Posterior:
    w: int
    L: int
    prior: PriorSpec = field(default_factory=PriorSpec.uniform)

    def __post_init__(self):
        _check_history(self.w, self.L)

    def _scaled_likelihood(self, p):
        # p^w (1-p)^(L-w), divided by its maximum to avoid underflow
        w, L = self.w, self.L
        p = np.asarray(p, dtype=float)
        mode = w / L if L else 0.5
        peak = xlogy(w, mode) + xlog1py(L - w, -mode)
        return np.exp(xlogy(w, p) + xlog1py(L - w, -p) - peak)

    def _mode(self) -> list[float]:
        return [self.w / self.L] if self.L else []

    def density(self, p):
        """Posterior density at p (continuous priors only)."""
        p = np.asarray(p, dtype=float)
        if self.prior.kind == "uniform":
            w, L = self.w, self.L
            log_norm = gammaln(L + 2.0) - gammaln(w + 1.0) - gammaln(L - w + 1.0)
            inside = (p >= 0) & (p <= 1)
            with np.errstate(invalid="ignore"):
                dens = np.exp(log_norm + xlogy(w, p) + xlog1py(L - w, -p))
            return np.where(inside, dens, 0.0)
        return self.prior.pdf(p) * self._scaled_likelihood(p) / self._evidence()

    def _evidence(self) -> float:
        z = self.prior.expect(self._scaled_likelihood, self._mode())
        if not z > 0:
            raise ValueError("prior gives zero probability to the observed history")
        return z

    def expect(self, func) -> float:
        """Posterior expectation of func(p)."""
        num = self.prior.expect(lambda x: func(x) * self._scaled_likelihood(x), self._mode())
        return num / self._evidence()

    def mean(self) -> float:
        if self.prior.kind == "uniform":
            return (self.w + 1.0) / (self.L + 2.0)
        return self.expect(lambda x: x)

    def total_mass(self) -> float:
        """Integral of the density over [0, 1], by quadrature."""
        return integrate_1d(self.density, 0.0, 1.0, points=self._mode())


def posterior(w: int, L: int, prior: PriorSpec | None = None) -> Posterior:
    return Posterior(w, L, prior or PriorSpec.uniform())


def optimal_fraction_from_posterior(post: Posterior, allow_negative: bool = False) -> float:
    """2<p> - 1, floored at zero unless shorting is allowed."""
    f = 2.0 * post.mean() - 1.0
    return f if allow_negative else max(f, 0.0)


def belief_fraction(points, weights, allow_negative: bool = False) -> float:
    """Optimal fraction for a finite belief over the winning probability."""
    prior = PriorSpec.discrete(points, weights)
    return optimal_fraction_from_posterior(Posterior(0, 0, prior), allow_negative)


# ------------------------------------------------------------------ strategies


@dataclass(frozen=True)
class MemoryStrategy:
    """Fraction to bet after seeing w wins in the last L outcomes."""

    L: int
    fractions: tuple
    allow_negative: bool = False

    def __post_init__(self):
        if len(self.fractions) != self.L + 1:
            raise ValueError(f"need {self.L + 1} fractions for L={self.L}")
        f = np.asarray(self.fractions, dtype=float)
        if np.any(np.abs(f) >= 1.0):
            raise ValueError("every fraction must satisfy |f| < 1")
        if not self.allow_negative and np.any(f < 0):
            raise ValueError("negative fractions need allow_negative=True")

    @classmethod
    def from_table(cls, table, allow_negative: bool | None = None) -> "MemoryStrategy":
        table = tuple(float(x) for x in table)
        if allow_negative is None:
            allow_negative = any(x < 0 for x in table)
        return cls(len(table) - 1, table, allow_negative)

    @property
    def table(self) -> np.ndarray:
        return np.asarray(self.fractions, dtype=float)


def memory_strategy(L: int, allow_negative: bool = False) -> MemoryStrategy:
    _check_history(0, L)
    w = np.arange(L + 1)
    f = (2 * w - L) / (L + 2.0)
    if not allow_negative:
        f = np.maximum(f, 0.0)
    return MemoryStrategy(L, tuple(f.tolist()), allow_negative)


def _per_outcome_logs(strategy: MemoryStrategy) -> tuple[np.ndarray, np.ndarray]:
    f = strategy.table
    return np.log1p(f), np.log1p(-f)


def growth_given_p(p: float, strategy: MemoryStrategy | int) -> float:
    """Long-run growth of a memory-L bettor when the true probability is p.

    An integer is read as the clamped strategy of that memory length.
    """
    p = check_probability(p)
    if not isinstance(strategy, MemoryStrategy):
        strategy = memory_strategy(strategy)
    up, down = _per_outcome_logs(strategy)
    weights = binomial_pmf(strategy.L, p)
    return float(np.sum(weights * (p * up + (1.0 - p) * down)))


def xi_ratio(p: float, L: int, allow_negative: bool = False) -> float:
    """Compounded return with memory L relative to the perfect-information one."""
    p = check_probability(p)
    if p <= 0.5:
        raise ValueError(f"the ratio needs a favourable game (p > 1/2), got p={p}")
    g = growth_given_p(p, memory_strategy(L, allow_negative))
    return math.expm1(g) / kelly_compounded_return(p)


def min_profitable_memory(p: float, cap: int = 10**6) -> int:
    """Smallest L for which the clamped memory strategy grows wealth.

    Doubles L until growth turns positive and bisects on the integers.
    Because the growth wiggles with the parity of L at short memory, the
    answer is the smallest L near the bisection point such that L and the
    next 8 lengths are all profitable.
    """
    p = check_probability(p)
    if p <= 0.5:
        raise ValueError(f"no memory is profitable for p <= 1/2, got p={p}")

    cache: dict[int, bool] = {}

    def profitable(L: int) -> bool:
        if L not in cache:
            cache[L] = growth_given_p(p, L) > 0.0
        return cache[L]

    hi = 1
    while not profitable(hi):
        if hi >= cap:
            raise MemoryCapExceeded(f"no profitable memory up to L={cap} for p={p}")
        hi = min(2 * hi, cap)
    lo = hi // 2 if hi > 1 else 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if profitable(mid):
            hi = mid
        else:
            lo = mid

    # parity wiggles at small L: require 8 further profitable lengths
    start = max(hi - 16, 1)
    while True:
        for L in range(start, hi + 17):
            if all(profitable(k) for k in range(L, L + 9)):
                return L
        start, hi = hi + 17, hi + 17
        if hi > cap:
            raise MemoryCapExceeded(f"no profitable memory up to L={cap} for p={p}")


def negative_growth_threshold(step: float = 0.005, L_max: int = 400) -> float:
    """Largest p on a grid of the given step for which some L <= L_max loses money."""
    n = int(round(0.5 / step))
    worst = 0.5
    for k in range(1, n + 1):
        p = 0.5 + k * step
        if any(growth_given_p(p, L) < 0.0 for L in range(1, L_max + 1)):
            worst = p
    return worst


def approx_regime_memory(p: float) -> float:
    """Memory above which the 1/(2L) correction is reliable: 9p(1-p)/(p-1/2)^2."""
    return 9.0 * p * (1.0 - p) / (p - 0.5) ** 2


def growth_approx(p: float, L: int) -> float:
    """Kelly growth minus 1/(2L); warns outside its large-memory regime."""
    p = check_probability(p)
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    if p <= 0.5 or L < approx_regime_memory(p):
        warnings.warn(
            f"L={L} is below the validity bound for p={p}", OutOfRegimeWarning, stacklevel=2
        )
    return kelly_growth(p) - 1.0 / (2.0 * L)


def l_min_estimate(p: float) -> float:
    """Rough memory needed for positive growth, 1 / (2 G_K(p))."""
    p = check_probability(p)
    if p <= 0.5:
        raise ValueError(f"p must exceed 1/2, got {p}")
    return 1.0 / (2.0 * kelly_growth(p))


def growth_signed_exact(p: float, L: int) -> float:
    """Growth of the memory strategy with short positions allowed, by direct sum."""
    return growth_given_p(p, memory_strategy(L, allow_negative=True))


def series_coefficients(p: float, flipped_signs: bool = False) -> tuple[float, ...]:
    """Coefficients of 1/L, 1/L^2, 1/L^3 in the large-memory expansion of the
    signed growth.

    ``flipped_signs=True`` gives the variant with the opposite sign on the
    constant in both higher numerators, which only converges like 1/L^2.
    """
    q = p * (1.0 - p)
    if flipped_signs:
        c2 = (11.0 * q - 1.0) / (12.0 * q)
        c3 = -(20.0 * q * q - 5.0 * q - 1.0) / (12.0 * q * q)
    else:
        c2 = (11.0 * q + 1.0) / (12.0 * q)
        c3 = -(20.0 * q * q + 5.0 * q - 1.0) / (12.0 * q * q)
    return (-0.5, c2, c3)


def growth_signed_series(p: float, L: int, order: int = 3, flipped_signs: bool = False) -> float:
    """Expansion of the signed growth in powers of 1/L, truncated after 1/L**order."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    coefs = series_coefficients(p, flipped_signs)
    total = kelly_growth_analytic(p)
    for k in range(order):
        total += coefs[k] / L ** (k + 1)
    return total


# --------------------------------------------------------- prior-averaged view


def _table_integrand(L: int, f: np.ndarray):
    """p -> sum_w P(w; p, L) [p ln(1+f_w) + (1-p) ln(1-f_w)], vectorised in p."""
    up, down = np.log1p(f), np.log1p(-f)

    def integrand(p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        weights = binomial_pmf_grid(L, np.clip(p, 0.0, 1.0))
        return weights @ up * p + weights @ down * (1.0 - p)

    return integrand


def averaged_growth(L: int, prior: PriorSpec, strategy: MemoryStrategy) -> float:
    """Growth averaged over the prior: the objective a memory-L bettor maximises."""
    if strategy.L != L:
        raise ValueError(f"strategy has L={strategy.L}, expected {L}")
    return prior.expect(_table_integrand(L, strategy.table))


def maximize_table(L: int, prior: PriorSpec, allow_negative: bool = True) -> MemoryStrategy:
    """Table maximising the prior-averaged growth.

    Each entry enters the objective through its own concave term, so the
    entries are optimised one at a time by bracketing the zero of that
    term's derivative.
    """
    _check_history(0, L)
    edge = 1.0 - 1e-12
    lower = -edge if allow_negative else 0.0
    table = []
    for w in range(L + 1):

        def weight(p, w=w):
            return binomial_pmf_grid(L, np.clip(p, 0.0, 1.0))[:, w]

        win = prior.expect(lambda p: p * weight(p))
        lose = prior.expect(lambda p: (1.0 - p) * weight(p))

        def slope(f, w=w):
            return prior.expect(
                lambda p: weight(p, w) * (p / (1.0 + f) - (1.0 - p) / (1.0 - f))
            )

        if lose <= 0.0:
            table.append(edge)
        elif win <= 0.0 or slope(lower) <= 0.0:
            table.append(lower)
        else:
            table.append(float(brentq(slope, lower, edge, xtol=1e-13, rtol=1e-15)))
    return MemoryStrategy(L, tuple(table), allow_negative)
