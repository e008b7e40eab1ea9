"""Command-line front end.

Every subcommand writes one CSV table: ``#``-prefixed metadata lines,
a header row, then data rows with 17 significant digits. Exit status is
0 on success, 2 on invalid flags and 1 on a numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import bayes_memory as bm
from . import insider_outsider as io_
from . import kelly_core as kc
from . import multi_game as mg
from . import simulator as sim


@dataclass
class OutputTable:
    header: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} values, header has {len(self.header)}")
        if not all(math.isfinite(float(v)) for v in values):
            raise ValueError(f"non-finite value in row {values}")
        self.rows.append(tuple(values))

    def to_csv(self, timestamp: bool = True) -> str:
        lines = []
        meta = dict(self.metadata)
        meta.setdefault("version", __version__)
        if timestamp:
            meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        for key, value in meta.items():
            lines.append(f"# {key}: {value}")
        lines.append(",".join(self.header))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def read_csv(text: str) -> tuple[dict[str, str], list[str], np.ndarray]:
    """Parse a table written by this tool back into (metadata, header, values)."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    header = body[0].split(",")
    values = np.array([[float(x) for x in row.split(",")] for row in body[1:]]).reshape(
        -1, len(header)
    )
    return meta, header, values


def _sweep(args) -> np.ndarray:
    if args.p is not None:
        return np.asarray(args.p, dtype=float)
    return np.linspace(args.p_min, args.p_max, args.steps)


# ----------------------------------------------------------------- commands


def cmd_single(args) -> OutputTable:
    p = args.p
    table = OutputTable(
        ["f_kelly", "growth", "compounded_return", "entropy"],
        metadata={"command": "single", "p": p},
    )
    table.add(kc.kelly_fraction(p), kc.kelly_growth(p), kc.kelly_compounded_return(p), kc.entropy(p))
    return table


def cmd_multi(args) -> OutputTable:
    table = OutputTable(
        [
            "p", "M", "f_star", "total_invested", "uninvested", "growth",
            "f_exact", "total_invested_exact", "uninvested_exact", "growth_exact",
        ],
        metadata={"command": "multi", "method": args.method, "M": " ".join(map(str, args.m))},
    )
    skipped, overshoot = [], []
    for M in args.m:
        for p in _sweep(args):
            exact = mg.solve_exact(p, M)
            try:
                sol = mg.solve(p, M, args.method)
            except ValueError:
                skipped.append(f"M={M} p={p:.17g}")
                continue
            if not math.isfinite(sol.growth):
                overshoot.append(f"M={M} p={p:.17g}")
                continue
            uninvested = exact.uninvested if args.method == "exact" else 1.0 - M * sol.f_star
            table.add(
                p, M, sol.f_star, M * sol.f_star, uninvested, sol.growth,
                exact.f_star, exact.total_invested, exact.uninvested, exact.growth,
            )
        if args.method == "piecewise":
            try:
                table.metadata[f"p_c[M={M}]"] = format(mg.crossover_pc(M), ".17g")
            except mg.NoIntersectionError:
                table.metadata[f"p_c[M={M}]"] = "none (unsaturated branch used throughout)"
    if skipped:
        table.metadata["skipped (formula singular)"] = "; ".join(skipped)
    if overshoot:
        table.metadata["skipped (approximation stakes >= 1/M)"] = "; ".join(overshoot)
    return table


def cmd_duel(args) -> OutputTable:
    table = OutputTable(
        ["p", "M", "delta_numeric", "numeric_crossing", "delta_analytic", "analytic_crossing"],
        metadata={"command": "duel", "no_crossing_sentinel": -1},
    )
    for M in args.m:
        for p in _sweep(args):
            num = io_.break_even_delta_numeric(p, M)
            ana = io_.break_even_delta_analytic(p, M)
            table.add(
                p, M,
                -1.0 if num is None else num, num is not None,
                -1.0 if ana is None else ana, ana is not None,
            )
    return table


def _memory_lengths(args) -> np.ndarray:
    if args.l_points:
        grid = np.geomspace(args.l_min, args.l_max, args.l_points)
        return np.unique(np.round(grid).astype(int))
    return np.arange(args.l_min, args.l_max + 1)


def cmd_memory(args) -> OutputTable:
    table = OutputTable(
        ["p", "L", "xi", "d_exact", "d_approx", "G_signed_exact", "G_signed_series3"],
        metadata={"command": "memory"},
    )
    for p in args.p:
        g_kelly = kc.kelly_growth(p)
        for L in _memory_lengths(args):
            L = int(L)
            g = bm.growth_given_p(p, L)
            table.add(
                p, L, bm.xi_ratio(p, L), g_kelly - g, 1.0 / (2 * L),
                bm.growth_signed_exact(p, L), bm.growth_signed_series(p, L, 3),
            )
        if not args.skip_threshold:
            try:
                table.metadata[f"min_profitable_memory[p={p}]"] = bm.min_profitable_memory(p)
            except bm.MemoryCapExceeded:
                table.metadata[f"min_profitable_memory[p={p}]"] = "impractical (> 1000000)"
        table.metadata[f"l_min_estimate[p={p}]"] = format(bm.l_min_estimate(p), ".17g")
    return table


def _schedule(args) -> sim.GameSchedule:
    if args.schedule is None:
        if args.p is None:
            raise ValueError("give either --p or --schedule")
        return sim.GameSchedule.constant(args.p)
    kind, _, rest = args.schedule.partition(":")
    values = [float(x) for x in rest.split(",") if x]
    if kind == "constant" and len(values) == 1:
        return sim.GameSchedule.constant(values[0])
    if kind == "cyclic" and values:
        return sim.GameSchedule.cyclic(values, hold=args.hold, cycles=args.cycles)
    raise ValueError(f"cannot parse schedule {args.schedule!r}")


def cmd_simulate(args) -> OutputTable:
    schedule = _schedule(args)
    config = sim.SimulationConfig(args.turns, args.L, args.seed, args.initial_wealth)
    strategy = bm.memory_strategy(args.L, args.allow_negative)
    traj = sim.simulate(schedule, strategy, config)
    table = OutputTable(
        ["turn", "log_wealth"],
        metadata={
            "command": "simulate",
            "schedule": args.schedule or f"constant:{args.p}",
            "L": args.L,
            "turns": args.turns,
            "seed": args.seed,
            "generator": sim.GENERATOR_NAME,
            "realized_growth": format(traj.realized_growth, ".17g"),
        },
    )
    if schedule.kind == "constant":
        table.metadata["analytic_growth"] = format(
            bm.growth_given_p(schedule.levels[0], strategy), ".17g"
        )
    idx = np.unique(np.linspace(0, args.turns, min(args.points, args.turns + 1)).astype(int))
    for t in idx:
        table.add(int(t), traj.log_wealth[t])
    return table


def cmd_anneal(args) -> OutputTable:
    schedule = _schedule(args)
    acfg_kwargs = dict(
        initial_temperature=args.t0,
        cooling_factor=args.cooling,
        steps_per_temperature=args.steps_per_temperature,
        proposal_scale=args.proposal_scale,
        min_temperature=args.t_min,
    )
    analytic = bm.memory_strategy(args.L, args.allow_negative).table
    seeds = [args.seed + i for i in range(args.seeds)]
    table = OutputTable(
        ["seed", "w", "f_annealed", "f_analytic"],
        metadata={
            "command": "anneal",
            "schedule": args.schedule or f"constant:{args.p}",
            "L": args.L,
            "turns": args.turns,
            "seeds": " ".join(map(str, seeds)),
            "allow_negative": args.allow_negative,
            "generator": sim.GENERATOR_NAME,
            **{k: v for k, v in acfg_kwargs.items()},
        },
    )
    for seed in seeds:
        config = sim.SimulationConfig(args.turns, args.L, seed)
        result = sim.anneal(
            schedule, args.L, config, sim.AnnealingConfig(seed=seed, **acfg_kwargs),
            allow_negative=args.allow_negative,
        )
        table.metadata[f"objective[seed={seed}]"] = format(result.objective, ".17g")
        for w, (fa, fb) in enumerate(zip(result.strategy.table, analytic)):
            table.add(seed, w, fa, fb)
    return table


# ------------------------------------------------------------------- parser


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer, got {value}")
    return value


def _add_sweep(sub, p_help: str) -> None:
    sub.add_argument("--p", type=_probability, nargs="+", help=p_help)
    sub.add_argument("--p-min", type=_probability, default=0.5)
    sub.add_argument("--p-max", type=_probability, default=1.0)
    sub.add_argument("--steps", type=_positive_int, default=51, help="number of sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kellygame",
        description="Kelly betting under diversification and limited information.",
        fromfile_prefix_chars="@",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the CSV here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp line")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("single", parents=[common], help="single-game Kelly quantities")
    s.add_argument("--p", type=_probability, required=True)
    s.set_defaults(func=cmd_single)

    s = subs.add_parser("multi", parents=[common], help="M simultaneous games")
    _add_sweep(s, "explicit probabilities (overrides the sweep)")
    s.add_argument("--m", type=_positive_int, nargs="+", default=[1])
    s.add_argument(
        "--method", choices=["exact", "unsaturated", "saturated", "piecewise"], default="exact"
    )
    s.set_defaults(func=cmd_multi)

    s = subs.add_parser("duel", parents=[common], help="insider vs outsider break-even delta")
    _add_sweep(s, "explicit probabilities (overrides the sweep)")
    s.add_argument("--m", type=_positive_int, nargs="+", default=[2, 3, 4])
    s.set_defaults(func=cmd_duel, p_min=0.51, p_max=0.99)

    s = subs.add_parser("memory", parents=[common], help="finite-memory growth tables")
    s.add_argument("--p", type=_probability, nargs="+", required=True)
    s.add_argument("--l-min", type=_positive_int, default=1)
    s.add_argument("--l-max", type=_positive_int, default=200)
    s.add_argument("--l-points", type=_positive_int, help="geometric grid size instead of every L")
    s.add_argument("--skip-threshold", action="store_true", help="skip the minimum-memory scan")
    s.set_defaults(func=cmd_memory)

    for name, func in (("simulate", cmd_simulate), ("anneal", cmd_anneal)):
        s = subs.add_parser(name, parents=[common], help=f"{name} with a memory strategy")
        s.add_argument("--p", type=_probability, help="constant winning probability")
        s.add_argument("--schedule", help="constant:P or cyclic:P1,P2,...")
        s.add_argument("--hold", action="store_true", help="hold each cyclic level instead of ramping")
        s.add_argument("--cycles", type=_positive_int, default=1)
        s.add_argument("--L", type=int, required=True)
        s.add_argument("--turns", type=_positive_int, required=True)
        s.add_argument("--seed", type=_seed, default=0)
        s.add_argument("--allow-negative", action="store_true")
        s.set_defaults(func=func)
        if name == "simulate":
            s.add_argument("--initial-wealth", type=float, default=1.0)
            s.add_argument("--points", type=_positive_int, default=1001, help="rows to emit")
        else:
            defaults = sim.AnnealingConfig()
            s.add_argument("--seeds", type=_positive_int, default=1)
            s.add_argument("--t0", type=float, default=defaults.initial_temperature)
            s.add_argument("--cooling", type=float, default=defaults.cooling_factor)
            s.add_argument(
                "--steps-per-temperature", type=_positive_int,
                default=defaults.steps_per_temperature,
            )
            s.add_argument("--proposal-scale", type=float, default=defaults.proposal_scale)
            s.add_argument("--t-min", type=float, default=defaults.min_temperature)
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if args.command in ("multi", "duel") and args.p is None and args.p_min > args.p_max:
        parser.error("--p-min must not exceed --p-max")
    if args.command == "duel":
        if any(m < 2 for m in args.m):
            parser.error("--m values must be at least 2 for duel")
        for p in _sweep(args):
            if not 0.5 < p < 1.0:
                parser.error(f"--p values must lie in (1/2, 1) for duel, got {p}")
    if args.command == "memory":
        bad = [p for p in args.p if p <= 0.5]
        if bad:
            parser.error(f"--p must exceed 1/2 (the ratio xi is undefined otherwise), got {bad}")
        if args.l_min > args.l_max:
            parser.error("--l-min must not exceed --l-max")
    if args.command in ("simulate", "anneal"):
        if args.L < 0:
            parser.error(f"--L must be nonnegative, got {args.L}")
        if args.turns < args.L:
            parser.error(f"--turns ({args.turns}) must be at least --L ({args.L})")
        if args.p is None and args.schedule is None:
            parser.error("give either --p or --schedule")
        if args.schedule is not None:
            try:
                _schedule(args)
            except ValueError as exc:
                parser.error(f"--schedule: {exc}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        table = args.func(args)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"kellygame: numerical failure: {exc}", file=sys.stderr)
        return 1
    text = table.to_csv(timestamp=not args.no_timestamp)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
