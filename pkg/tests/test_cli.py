import math

import numpy as np
import pytest

from kellygame import cli
from kellygame import multi_game as mg


def run(capsys, *argv):
    code = cli.main([*argv, "--no-timestamp"])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return cli.read_csv(out)


def expect_usage_error(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(list(argv))
    assert exc.value.code == 2
    return capsys.readouterr().err


class TestOutputTable:
    def test_row_length_checked(self):
        t = cli.OutputTable(["a", "b"])
        with pytest.raises(ValueError):
            t.add(1.0)

    def test_non_finite_rejected(self):
        t = cli.OutputTable(["a"])
        with pytest.raises(ValueError):
            t.add(math.inf)

    def test_round_trip_full_precision(self):
        values = [1 / 3, math.pi * 1e-300, -2.5e17, 0.1 + 0.2]
        t = cli.OutputTable(["x"], metadata={"command": "test"})
        for v in values:
            t.add(v)
        meta, header, parsed = cli.read_csv(t.to_csv())
        assert header == ["x"] and meta["command"] == "test"
        assert parsed[:, 0].tolist() == values

    def test_timestamp_optional(self):
        t = cli.OutputTable(["x"])
        assert "timestamp" in t.to_csv(timestamp=True)
        assert "timestamp" not in t.to_csv(timestamp=False)


class TestSingle:
    def test_worked_example(self, capsys):
        meta, header, rows = table(capsys, "single", "--p", "0.6")
        assert header == ["f_kelly", "growth", "compounded_return", "entropy"]
        f, g, r, s = rows[0]
        assert f == pytest.approx(0.2, abs=1e-15)
        assert round(g, 6) == 0.020136 and round(s, 6) == 0.673012
        assert r == pytest.approx(0.0203, abs=1e-4)
        assert meta["command"] == "single" and "version" in meta

    def test_fair_game(self, capsys):
        _, _, rows = table(capsys, "single", "--p", "0.5")
        assert rows[0].tolist() == [0.0, 0.0, 0.0, pytest.approx(math.log(2))]

    def test_invalid_probability(self, capsys):
        err = expect_usage_error(capsys, "single", "--p", "1.2")
        assert "--p" in err


class TestMulti:
    def test_two_games(self, capsys):
        _, header, rows = table(capsys, "multi", "--m", "2", "--p", "0.6", "--method", "exact")
        assert rows[0][header.index("f_star")] == pytest.approx(0.192308, abs=1e-6)

    def test_sweep_includes_endpoints(self, capsys):
        _, header, rows = table(
            capsys, "multi", "--m", "1", "2", "5", "10", "20", "--p-min", "0.5", "--p-max", "1",
            "--steps", "11", "--method", "piecewise",
        )
        p = rows[:, header.index("p")]
        assert len(rows) == 55 and p.min() == 0.5 and p.max() == 1.0

    def test_exact_columns_alongside_approximation(self, capsys):
        _, header, rows = table(capsys, "multi", "--m", "5", "--p", "0.6", "--method", "unsaturated")
        assert rows[0][header.index("f_exact")] == pytest.approx(mg.solve_exact(0.6, 5).f_star)
        assert rows[0][header.index("f_star")] == pytest.approx(mg.unsaturated_fraction(0.6, 5))

    def test_overshooting_approximation_skipped(self, capsys):
        meta, _, rows = table(capsys, "multi", "--m", "5", "--p", "0.6", "0.7", "--method", "unsaturated")
        assert rows[:, 0].tolist() == [0.6]
        assert "M=5 p=0.69999999999999996" in meta["skipped (approximation stakes >= 1/M)"]

    def test_singular_row_skipped(self, capsys):
        meta, header, rows = table(
            capsys, "multi", "--m", "3", "--p-min", "0.5", "--p-max", "0.9", "--steps", "5",
            "--method", "saturated",
        )
        assert len(rows) == 4 and 0.5 not in rows[:, 0]
        assert "M=3 p=0.5" in meta["skipped (formula singular)"]

    @pytest.mark.parametrize(
        "argv", [["--m", "0"], ["--method", "newton"], ["--p-min", "0.9", "--p-max", "0.6"]]
    )
    def test_invalid_flags(self, capsys, argv):
        expect_usage_error(capsys, "multi", *argv)


class TestDuel:
    def test_lowest_order_value(self, capsys):
        _, header, rows = table(capsys, "duel", "--m", "2", "--p", "0.55")
        assert rows[0][header.index("delta_numeric")] == pytest.approx(0.05, rel=0.02)

    def test_no_crossing_sentinel(self, capsys):
        _, header, rows = table(capsys, "duel", "--m", "4", "--p", "0.99")
        row = dict(zip(header, rows[0]))
        assert row["numeric_crossing"] == 0 and row["delta_numeric"] == -1
        assert row["analytic_crossing"] == 0 and row["delta_analytic"] == -1

    def test_default_sweep(self, capsys):
        _, header, rows = table(capsys, "duel", "--steps", "5")
        assert sorted(set(rows[:, header.index("M")])) == [2, 3, 4]

    @pytest.mark.parametrize("argv", [["--m", "1"], ["--p", "0.5"]])
    def test_invalid_flags(self, capsys, argv):
        expect_usage_error(capsys, "duel", *argv)


class TestMemory:
    def test_thresholds_in_metadata(self, capsys):
        meta, _, _ = table(capsys, "memory", "--p", "0.51", "0.52", "--l-max", "3")
        assert meta["min_profitable_memory[p=0.51]"] == "1761"
        assert meta["min_profitable_memory[p=0.52]"] == "438"

    def test_columns_and_trend(self, capsys):
        _, header, rows = table(
            capsys, "memory", "--p", "0.6", "--l-min", "10", "--l-max", "20000",
            "--l-points", "12", "--skip-threshold",
        )
        assert header == ["p", "L", "xi", "d_exact", "d_approx", "G_signed_exact", "G_signed_series3"]
        ratio = rows[:, 3] / rows[:, 4]
        assert abs(ratio[-1] - 1.0) < 0.01

    def test_requires_favourable_game(self, capsys):
        expect_usage_error(capsys, "memory", "--p", "0.5")


class TestSimulateAndAnneal:
    def test_simulate_summary(self, capsys):
        meta, header, rows = table(capsys, "simulate", "--p", "0.6", "--L", "50", "--turns", "100000")
        assert header == ["turn", "log_wealth"] and meta["seed"] == "0"
        assert float(meta["realized_growth"]) == pytest.approx(float(meta["analytic_growth"]), abs=3e-3)
        assert rows[0].tolist() == [0.0, 0.0] and rows[-1][0] == 100000

    def test_turns_shorter_than_memory(self, capsys):
        expect_usage_error(capsys, "simulate", "--p", "0.6", "--turns", "5", "--L", "10")

    def test_anneal_table(self, capsys):
        meta, header, rows = table(
            capsys, "anneal", "--schedule", "cyclic:0.5,1,0,0.5", "--L", "4", "--turns", "100000",
            "--seeds", "2", "--seed", "10",
        )
        assert header == ["seed", "w", "f_annealed", "f_analytic"]
        assert meta["seeds"] == "10 11" and "PCG64" in meta["generator"]
        assert len(rows) == 10
        assert np.max(np.abs(rows[:, 2] - rows[:, 3])) < 0.1

    def test_bad_schedule(self, capsys):
        expect_usage_error(capsys, "anneal", "--schedule", "zigzag:1", "--L", "2", "--turns", "10")

    def test_seed_range(self, capsys):
        expect_usage_error(capsys, "simulate", "--p", "0.6", "--L", "2", "--turns", "10", "--seed", "-1")


class TestReproducibility:
    @pytest.mark.parametrize(
        "argv",
        [
            ["multi", "--m", "5", "--steps", "7"],
            ["simulate", "--schedule", "cyclic:0.5,1,0,0.5", "--L", "5", "--turns", "5000", "--seed", "3"],
        ],
    )
    def test_byte_identical(self, capsys, argv):
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second

    def test_output_file_and_flags_file(self, tmp_path, capsys):
        flags = tmp_path / "flags.txt"
        flags.write_text("single\n--p\n0.6\n")
        out = tmp_path / "out.csv"
        assert cli.main([f"@{flags}", "--output", str(out)]) == 0
        text = out.read_text()
        assert "timestamp" in text
        assert cli.read_csv(text)[2][0][0] == pytest.approx(0.2)

    def test_numeric_failure_exit_code(self, capsys, monkeypatch):
        def boom(args):
            raise ArithmeticError("no convergence")

        monkeypatch.setattr(cli, "cmd_single", boom)
        assert cli.main(["single", "--p", "0.6"]) == 1
        assert "no convergence" in capsys.readouterr().err
