"""Insider with perfect information on one game vs. a diversified outsider.

Every game's winning probability alternates with even odds between
p + delta and p - delta. The insider sees the current value and plays the
Kelly fraction for it in a single game, sitting out whenever the current
probability is not above 1/2. The outsider only knows the average p and
spreads the optimal stake over M such games.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .kelly_core import kelly_growth
from .multi_game import solve_exact


@dataclass(frozen=True)
class AlternatingGame:
    p: float
    delta: float

    def __post_init__(self):
        if not 0.5 < self.p <= 1.0:
            raise ValueError(f"average probability must lie in (1/2, 1], got {self.p}")
        if not 0.0 <= self.delta <= 1.0 - self.p + 1e-15:
            raise ValueError(
                f"delta must lie in [0, 1 - p] = [0, {1.0 - self.p}], got {self.delta}"
            )


@dataclass(frozen=True)
class DuelResult:
    g_insider: float
    g_outsider: float
    winner: str


TIE_TOLERANCE = 1e-12


def insider_growth(p: float, delta: float) -> float:
    """Half the Kelly growth in each of the two probability states."""
    game = AlternatingGame(p, delta)
    hi = min(game.p + game.delta, 1.0)
    lo = game.p - game.delta
    return 0.5 * kelly_growth(hi) + 0.5 * kelly_growth(lo)


def outsider_growth(p: float, M: int) -> float:
    return solve_exact(p, M).growth


def break_even_delta_numeric(p: float, M: int) -> float | None:
    """Alternation amplitude at which both investors grow equally fast.

    Returns None when even delta = 1 - p leaves the outsider ahead.
    """
    if not 0.5 < p < 1.0:
        raise ValueError(f"p must lie in (1/2, 1), got {p}")
    target = outsider_growth(p, M)
    if insider_growth(p, 0.0) >= target:
        return 0.0
    top = 1.0 - p
    if insider_growth(p, top) < target:
        return None
    return float(
        brentq(lambda d: insider_growth(p, d) - target, 0.0, top, xtol=1e-13, rtol=1e-15)
    )


def insider_growth_series(p: float, delta: float) -> float:
    """Low-order expansion of the insider growth in powers of delta.

    Linear and quadratic terms while the low state is skipped
    (p - delta <= 1/2); quadratic and quartic terms of the symmetric
    average when both states are played.
    """
    g = kelly_growth(p)
    curv = 0.5 * (1.0 / p + 1.0 / (1.0 - p))
    if p - delta > 0.5:
        quart = (1.0 / p**3 + 1.0 / (1.0 - p) ** 3) / 12.0
        return g + curv * delta**2 + quart * delta**4
    tilt = math.log(p) - math.log1p(-p)
    return 0.5 * (g + delta * tilt + curv * delta**2)


def break_even_delta_analytic(p: float, M: int) -> float | None:
    """Break-even delta from the truncated expansion of the insider growth.

    The biquadratic (both states played) is tried first; if its root
    violates p - delta > 1/2 the quadratic branch is used. Returns None
    when neither branch has a root in [0, 1 - p].
    """
    if not 0.5 < p < 1.0:
        raise ValueError(f"p must lie in (1/2, 1), got {p}")
    target = outsider_growth(p, M)
    g = kelly_growth(p)
    top = 1.0 - p
    curv = 0.5 * (1.0 / p + 1.0 / (1.0 - p))
    quart = (1.0 / p**3 + 1.0 / (1.0 - p) ** 3) / 12.0

    # quart*x^2 + curv*x + (g - target) = 0 with x = delta^2
    disc = curv * curv - 4.0 * quart * (g - target)
    if disc >= 0.0:
        x = (-curv + math.sqrt(disc)) / (2.0 * quart)
        if x >= 0.0:
            delta = math.sqrt(x)
            if p - delta > 0.5 and delta <= top:
                return delta

    # (curv/2) d^2 + (tilt/2) d + (g/2 - target) = 0
    tilt = math.log(p) - math.log1p(-p)
    a, b, c = 0.5 * curv, 0.5 * tilt, 0.5 * g - target
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    delta = (-b + math.sqrt(disc)) / (2.0 * a)
    if 0.0 <= delta <= top:
        return delta
    return None


def duel(p: float, delta: float, M: int) -> DuelResult:
    g_in = insider_growth(p, delta)
    g_out = outsider_growth(p, M)
    gap = g_in - g_out
    if abs(gap) <= TIE_TOLERANCE:
        winner = "tie"
    elif gap > 0:
        winner = "insider"
    else:
        winner = "outsider"
    return DuelResult(g_in, g_out, winner)
