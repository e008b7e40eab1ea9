"""Single-game Kelly betting.

A binary game returns +1 per unit staked with probability p and -1
otherwise. Betting a fixed fraction f of wealth every turn gives the
per-turn exponential growth rate

    G(p, f) = p ln(1 + f) + (1 - p) ln(1 - f)

which is maximised at f = 2p - 1. Short positions are excluded, so for
p < 1/2 the optimal fraction is 0. All rates are in nats per turn.
"""

from __future__ import annotations

import math

from ._numerics import check_probability

LN2 = math.log(2.0)


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def entropy(p: float) -> float:
    """Binary entropy in nats, with 0 ln 0 = 0."""
    p = check_probability(p)
    # fold onto [0, 1/2] (exact for p >= 1/2) so complementary inputs agree bitwise
    a = min(p, 1.0 - p)
    return -(_xlogx(a) + _xlogx(1.0 - a))


def kelly_fraction(p: float) -> float:
    """Optimal long-only fraction max(2p - 1, 0)."""
    p = check_probability(p)
    return max(2.0 * p - 1.0, 0.0)


def growth_rate(p: float, f: float) -> float:
    """Expected log-return per turn when staking fraction f.

    Returns -inf for f = 1 when a loss is possible (certain eventual ruin).
    """
    p = check_probability(p)
    f = float(f)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"f must lie in [0, 1], got {f}")
    win = p * math.log1p(f) if p > 0 else 0.0
    if p == 1.0:
        return win
    if f == 1.0:
        return -math.inf
    return win + (1.0 - p) * math.log1p(-f)


def kelly_growth(p: float) -> float:
    """Maximal growth rate ln 2 - S(p); zero when the game is not favourable."""
    p = check_probability(p)
    if p <= 0.5:
        return 0.0
    return LN2 - entropy(p)


def kelly_growth_analytic(p: float) -> float:
    """ln 2 - S(p) for every p, without the no-shorting floor.

    This is the growth of a bettor allowed to go short by |2p - 1|, and the
    form that appears in large-memory expansions valid on both sides of 1/2.
    """
    return LN2 - entropy(p)


def kelly_compounded_return(p: float) -> float:
    """Per-turn compounded return 2 p^p (1-p)^(1-p) - 1 at the Kelly fraction."""
    p = check_probability(p)
    if p <= 0.5:
        return 0.0
    return 2.0 * p**p * (1.0 - p) ** (1.0 - p) - 1.0


def compounded_return(growth: float) -> float:
    """Convert a growth rate G to the compounded return exp(G) - 1."""
    return math.expm1(growth)
