"""Monte Carlo of repeated betting with a memory-based strategy.

Outcomes are drawn once per (schedule, seed, n_turns) and never depend on
the strategy being evaluated, so competing bet tables are always compared
on the same realization. Randomness comes from numpy's PCG64 generator;
a ``SeedSequence`` built from the user seed is split into one stream for
the schedule and one for the outcomes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bayes_memory import MemoryStrategy
from ._numerics import check_probability

GENERATOR_NAME = "numpy.random.PCG64 (SeedSequence.spawn: schedule, outcomes)"


class QuasiStaticWarning(UserWarning):
    """The winning probability moves noticeably within one memory window."""


@dataclass(frozen=True)
class GameSchedule:
    """Winning probability as a function of the turn index.

    ``cyclic`` ramps linearly through its waypoints at constant speed, so
    each cycle visits every value between them equally often. With
    ``hold=True`` each waypoint is instead held for an equal dwell.
    """

    kind: str
    levels: tuple = ()
    hold: bool = False
    cycles: int = 1
    generator: Callable | None = field(default=None, compare=False)

    @classmethod
    def constant(cls, p: float) -> "GameSchedule":
        return cls("constant", (check_probability(p),))

    @classmethod
    def cyclic(cls, levels, hold: bool = False, cycles: int = 1) -> "GameSchedule":
        levels = tuple(check_probability(x, "level") for x in levels)
        if len(levels) < 1:
            raise ValueError("a cyclic schedule needs at least one level")
        if cycles < 1:
            raise ValueError(f"cycles must be positive, got {cycles}")
        return cls("cyclic", levels, hold=hold, cycles=int(cycles))

    @classmethod
    def custom(cls, generator: Callable[[int, np.random.Generator], np.ndarray]) -> "GameSchedule":
        """generator(n, rng) must return n probabilities; rng is seeded from the run seed."""
        return cls("custom", generator=generator)

    def probabilities(self, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.levels[0])
        if self.kind == "custom":
            probs = np.asarray(self.generator(n, rng), dtype=float)
            if probs.shape != (n,):
                raise ValueError(f"custom schedule returned shape {probs.shape}, expected ({n},)")
            if np.any((probs < 0) | (probs > 1)) or np.any(np.isnan(probs)):
                raise ValueError("custom schedule produced values outside [0, 1]")
            return probs
        levels = np.asarray(self.levels)
        phase = (np.arange(n) * self.cycles / n) % 1.0
        if self.hold or len(levels) == 1:
            idx = np.minimum((phase * len(levels)).astype(int), len(levels) - 1)
            return levels[idx]
        travel = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(levels)))])
        if travel[-1] == 0.0:
            return np.full(n, levels[0])
        return np.interp(phase * travel[-1], travel, levels)

    def check_quasi_static(self, n: int, L: int) -> None:
        """Warn when p is not roughly constant over a window of L turns."""
        if self.kind != "cyclic" or len(self.levels) < 2 or L == 0:
            return
        if self.hold:
            dwell = n / (len(self.levels) * self.cycles)
            if dwell < 10 * L:
                warnings.warn(
                    f"dwell of {dwell:.0f} turns is shorter than 10*L={10 * L}",
                    QuasiStaticWarning,
                    stacklevel=3,
                )
            return
        travel = float(np.sum(np.abs(np.diff(self.levels))))
        drift = travel * self.cycles * L / n
        if drift > 0.01:
            warnings.warn(
                f"p drifts by {drift:.3g} within a window of L={L} turns",
                QuasiStaticWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class SimulationConfig:
    n_turns: int
    L: int
    seed: int = 0
    initial_wealth: float = 1.0

    def __post_init__(self):
        if self.n_turns < 1:
            raise ValueError(f"n_turns must be positive, got {self.n_turns}")
        if self.L < 0:
            raise ValueError(f"L must be nonnegative, got {self.L}")
        if self.n_turns < self.L:
            raise ValueError(f"n_turns={self.n_turns} is shorter than the memory L={self.L}")
        if not self.initial_wealth > 0:
            raise ValueError(f"initial wealth must be positive, got {self.initial_wealth}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class AnnealingConfig:
    # proposal width is proposal_scale * temperature; near the optimum the
    # per-turn objective curves like ~0.05 * df**2 per entry, so the scale
    # must be large for late-stage moves to match the thermal spread
    initial_temperature: float = 0.1
    cooling_factor: float = 0.95
    steps_per_temperature: int = 200
    proposal_scale: float = 100.0
    min_temperature: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        for name in ("initial_temperature", "proposal_scale", "min_temperature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.cooling_factor < 1:
            raise ValueError(f"cooling_factor must lie in (0, 1), got {self.cooling_factor}")
        if self.steps_per_temperature < 1:
            raise ValueError("steps_per_temperature must be positive")


@dataclass(frozen=True)
class Trajectory:
    log_wealth: np.ndarray  # ln W_t for t = 0..n_turns
    n_betting_turns: int

    @property
    def wealth(self) -> np.ndarray:
        return np.exp(self.log_wealth)

    @property
    def log_wealth_final(self) -> float:
        return float(self.log_wealth[-1])

    @property
    def realized_growth(self) -> float:
        if self.n_betting_turns == 0:
            return 0.0
        return float((self.log_wealth[-1] - self.log_wealth[0]) / self.n_betting_turns)


def draw_outcomes(schedule: GameSchedule, n_turns: int, seed: int) -> np.ndarray:
    """Boolean win/loss sequence; a pure function of its arguments."""
    schedule_seq, outcome_seq = np.random.SeedSequence(seed).spawn(2)
    probs = schedule.probabilities(n_turns, np.random.default_rng(schedule_seq))
    return np.random.default_rng(outcome_seq).random(n_turns) < probs


def window_wins(outcomes: np.ndarray, L: int) -> np.ndarray:
    """Wins among the L outcomes preceding each turn t = L..n-1."""
    counts = np.concatenate([[0], np.cumsum(outcomes, dtype=np.int64)])
    n = len(outcomes)
    return counts[L:n] - counts[0 : n - L]


def _turn_log_factors(outcomes: np.ndarray, table: np.ndarray, L: int) -> np.ndarray:
    stakes = table[window_wins(outcomes, L)]
    won = outcomes[L:]
    return np.where(won, np.log1p(stakes), np.log1p(-stakes))


def simulate(
    schedule: GameSchedule, strategy: MemoryStrategy, config: SimulationConfig
) -> Trajectory:
    """Wealth path of a bettor following ``strategy``.

    The first L turns only fill the memory window; betting starts at turn L.
    Wealth is accumulated as a running sum of log factors.
    """
    if strategy.L != config.L:
        raise ValueError(f"strategy memory {strategy.L} differs from config L={config.L}")
    schedule.check_quasi_static(config.n_turns, config.L)
    outcomes = draw_outcomes(schedule, config.n_turns, config.seed)
    steps = _turn_log_factors(outcomes, strategy.table, config.L)
    log_wealth = np.empty(config.n_turns + 1)
    log_wealth[: config.L + 1] = math.log(config.initial_wealth)
    log_wealth[config.L + 1 :] = math.log(config.initial_wealth) + np.cumsum(steps)
    return Trajectory(log_wealth, config.n_turns - config.L)


def _validated_table(table, L: int) -> MemoryStrategy:
    table = np.asarray(table, dtype=float)
    if table.shape != (L + 1,):
        raise ValueError(f"table needs {L + 1} entries, got shape {table.shape}")
    if np.any(np.abs(table) >= 1.0):
        raise ValueError("every table entry must satisfy |f| < 1")
    return MemoryStrategy.from_table(table)


def empirical_growth_of_table(schedule: GameSchedule, table, config: SimulationConfig) -> float:
    """Realized growth of an arbitrary bet table on the seeded realization."""
    return simulate(schedule, _validated_table(table, config.L), config).realized_growth


@dataclass(frozen=True)
class OutcomeTally:
    """Wins and losses that followed each window count w; enough to score any table."""

    wins: np.ndarray
    losses: np.ndarray

    @property
    def n_betting_turns(self) -> int:
        return int(self.wins.sum() + self.losses.sum())

    def growth(self, table) -> float:
        table = np.asarray(table, dtype=float)
        total = self.wins @ np.log1p(table) + self.losses @ np.log1p(-table)
        return float(total / self.n_betting_turns)


def tally_outcomes(schedule: GameSchedule, config: SimulationConfig) -> OutcomeTally:
    outcomes = draw_outcomes(schedule, config.n_turns, config.seed)
    w = window_wins(outcomes, config.L)
    won = outcomes[config.L :]
    size = config.L + 1
    return OutcomeTally(
        np.bincount(w[won], minlength=size).astype(float),
        np.bincount(w[~won], minlength=size).astype(float),
    )


@dataclass(frozen=True)
class AnnealResult:
    strategy: MemoryStrategy
    objective: float
    initial_objective: float
    steps: int
    accepted: int


def anneal(
    schedule: GameSchedule,
    L: int,
    config: SimulationConfig,
    acfg: AnnealingConfig | None = None,
    allow_negative: bool = False,
    initial=None,
) -> AnnealResult:
    """Simulated annealing over the L+1 bet fractions.

    One coordinate moves per step by a Gaussian of width
    proposal_scale * temperature; moves are kept inside (-1, 1), or [0, 1)
    when shorting is off. Acceptance is Metropolis on realized growth over
    a single fixed realization. Temperature decays geometrically and the
    best table seen is returned.
    """
    acfg = acfg or AnnealingConfig()
    if config.L != L:
        raise ValueError(f"config L={config.L} differs from L={L}")
    schedule.check_quasi_static(config.n_turns, L)
    tally = tally_outcomes(schedule, config)
    if tally.n_betting_turns == 0:
        raise ValueError("no betting turns: n_turns must exceed L")
    wins = tally.wins / tally.n_betting_turns
    losses = tally.losses / tally.n_betting_turns

    hi = 1.0 - 1e-6
    lo = -hi if allow_negative else 0.0
    rng = np.random.default_rng(acfg.seed)
    if initial is None:
        current = rng.uniform(lo, hi, size=L + 1)
    else:
        current = np.clip(np.asarray(initial, dtype=float), lo, hi)

    def term(i: int, f: float) -> float:
        return wins[i] * math.log1p(f) + losses[i] * math.log1p(-f)

    terms = np.array([term(i, f) for i, f in enumerate(current)])
    objective = initial_objective = float(terms.sum())
    best, best_objective = current.copy(), objective
    temperature = acfg.initial_temperature
    steps = accepted = 0
    while temperature > acfg.min_temperature:
        width = acfg.proposal_scale * temperature
        for _ in range(acfg.steps_per_temperature):
            i = int(rng.integers(L + 1))
            candidate = min(max(current[i] + width * rng.standard_normal(), lo), hi)
            new_term = term(i, candidate)
            gain = new_term - terms[i]
            steps += 1
            if gain >= 0 or rng.random() < math.exp(gain / temperature):
                accepted += 1
                current[i] = candidate
                objective += gain
                terms[i] = new_term
                if objective > best_objective:
                    best_objective = objective
                    best = current.copy()
        temperature *= acfg.cooling_factor

    strategy = MemoryStrategy(L, tuple(best.tolist()), allow_negative)
    return AnnealResult(strategy, float(tally.growth(best)), initial_objective, steps, accepted)


def ruin_probability_naive(p: float, N: int) -> float:
    """Chance that staking everything every turn is wiped out within N turns."""
    p = check_probability(p)
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    return -math.expm1(N * math.log(p)) if p > 0 else 1.0


def ruin_probability_mc(p: float, N: int, n_paths: int = 100_000, seed: int = 0) -> float:
    """Monte Carlo estimate of the same quantity: a path is ruined by any loss."""
    p = check_probability(p)
    rng = np.random.default_rng(seed)
    survivors = rng.binomial(N, p, size=n_paths) == N
    return float(1.0 - survivors.mean())
