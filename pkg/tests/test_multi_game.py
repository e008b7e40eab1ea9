import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from kellygame import kelly_core as kc
from kellygame import multi_game as mg

GRID = np.linspace(0.5, 1.0, 100)


def grid_argmax(p, M, step=1e-6):
    """Brute-force maximiser of the growth over f in [0, 1/M)."""
    f = np.arange(0.0, 1.0 / M, step)
    w = np.arange(M + 1)
    pmf = binom.pmf(w, M, p)
    g = np.log1p(np.outer(f, 2 * w - M)) @ pmf
    return f[np.argmax(g)]


class TestMultiGrowth:
    @given(st.floats(0.0, 1.0), st.floats(0.0, 0.999))
    def test_single_game_reduction(self, p, f):
        assert mg.multi_growth(p, 1, f) == pytest.approx(kc.growth_rate(p, f), abs=1e-13)

    @pytest.mark.parametrize("M", [1, 3, 10])
    def test_zero_stake(self, M):
        assert mg.multi_growth(0.7, M, 0.0) == 0.0

    def test_ruinous_stake_rejected(self):
        with pytest.raises(ValueError):
            mg.multi_growth(0.9, 4, 0.25)

    def test_certain_win_allows_full_stake(self):
        assert mg.multi_growth(1.0, 4, 0.25) == pytest.approx(math.log(2))

    def test_m2_optimum_beats_fine_grid(self):
        f_star = 0.2 / 1.04
        best = mg.multi_growth(0.6, 2, f_star)
        f = np.arange(0.0, 0.5, 1e-6)
        w = np.arange(3)
        g = np.log1p(np.outer(f, 2 * w - 2)) @ binom.pmf(w, 2, 0.6)
        assert best >= g.max() - 1e-15


class TestSolveExact:
    @pytest.mark.parametrize("M, expected", [(1, 0.2), (2, 0.2 / 1.04)])
    def test_closed_form_values(self, M, expected):
        assert mg.solve_exact(0.6, M).f_star == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("p, M", [(0.55, 10), (0.6, 4), (0.8, 5)])
    def test_grid_search_oracle(self, p, M):
        assert abs(mg.solve_exact(p, M).f_star - grid_argmax(p, M)) <= 1e-6

    def test_matches_closed_forms_on_grid(self):
        for p in GRID:
            assert abs(mg.solve_exact(p, 1).f_star - kc.kelly_fraction(p)) <= 1e-10
            assert abs(mg.solve_exact(p, 2).f_star - mg.closed_form(p, 2).f_star) <= 1e-10

    @pytest.mark.parametrize("M", [1, 2, 3, 5, 10, 20, 50])
    def test_condition_residual(self, M):
        for p in GRID[1:-1]:
            sol = mg.solve_exact(p, M)
            assert abs(mg.condition_residual(p, M, sol.f_star, sol.uninvested)) < 1e-10

    @pytest.mark.parametrize("M", [2, 5, 10, 20])
    def test_total_investment_nondecreasing(self, M):
        totals = [mg.solve_exact(p, M).total_invested for p in GRID]
        assert np.all(np.diff(totals) >= -1e-14)

    @given(st.floats(0.5, 0.999), st.integers(1, 40))
    def test_diversification_bound(self, p, M):
        # f* itself can round to 1/M; the strict gap lives in the uninvested share
        sol = mg.solve_exact(p, M)
        assert sol.f_star <= 1.0 / M
        assert sol.uninvested > 0.0

    def test_unfavourable_and_certain(self):
        assert mg.solve_exact(0.3, 5).f_star == 0.0
        assert mg.solve_exact(0.5, 5).f_star == 0.0
        sol = mg.solve_exact(1.0, 4)
        assert sol.f_star == 0.25 and sol.growth == pytest.approx(math.log(2))

    def test_saturated_regime_keeps_precision(self):
        # 1 - M f* falls far below machine epsilon here
        sol = mg.solve_exact(0.98, 10)
        assert 0.0 < sol.uninvested < 1e-15
        assert math.isfinite(sol.growth)

    @pytest.mark.parametrize("M", [2, 5, 20])
    def test_diversification_improves_growth(self, M):
        assert mg.solve_exact(0.6, M).growth > kc.kelly_growth(0.6)


class TestClosedForm:
    def test_values(self):
        assert mg.closed_form(0.6, 1).f_star == pytest.approx(0.2)
        assert mg.closed_form(0.5, 2).f_star == 0.0
        assert mg.closed_form(1.0, 2).f_star == 0.5

    def test_rejects_large_m(self):
        with pytest.raises(ValueError):
            mg.closed_form(0.6, 3)


class TestApproximations:
    def test_unsaturated_exact_for_small_m(self):
        assert mg.approx_unsaturated(0.6, 1).f_star == pytest.approx(0.2, abs=1e-15)
        assert mg.approx_unsaturated(0.6, 2).f_star == pytest.approx(0.2 / 1.04, abs=1e-15)

    def test_unsaturated_plays_games_independently_near_half(self):
        assert mg.approx_unsaturated(0.51, 10).f_star == pytest.approx(0.02, rel=0.01)

    @pytest.mark.parametrize("M", [2, 5, 10, 20])
    def test_unsaturated_error_vanishes_near_half(self, M):
        p = 0.5 + 1e-3
        err = abs(mg.approx_unsaturated(p, M).f_star - mg.solve_exact(p, M).f_star)
        assert err < 1e-7

    @pytest.mark.parametrize("M", [1, 3, 10])
    def test_saturated_limit(self, M):
        assert mg.approx_saturated(1.0, M).f_star == pytest.approx(1.0 / M)

    def test_saturated_value(self):
        expected = (1 - 2 * 0.95 * 0.05**5 / 0.9) / 5
        sol = mg.approx_saturated(0.95, 5)
        assert sol.f_star == pytest.approx(expected, rel=1e-14)
        assert sol.f_star == pytest.approx(mg.solve_exact(0.95, 5).f_star, rel=1e-4)

    def test_saturated_outside_regime(self):
        assert mg.approx_saturated(0.75, 1).f_star == pytest.approx(0.25)
        assert mg.solve_exact(0.75, 1).f_star == pytest.approx(0.5)

    def test_saturated_singular_at_half(self):
        with pytest.raises(ValueError):
            mg.approx_saturated(0.5, 3)


class TestCrossover:
    def test_single_game_has_no_crossing(self):
        # (2p-1)^2 = (2p-1) - 2p(1-p) reduces to (p-1)^2 = 0
        with pytest.raises(mg.NoIntersectionError):
            mg.crossover_pc(1)

    def test_two_games(self):
        assert mg.crossover_pc(2) == pytest.approx(1 / math.sqrt(2), abs=1e-10)

    @pytest.mark.parametrize(
        "M, expected", [(5, 0.616263), (10, 0.555345), (20, 0.526316)]
    )
    def test_regression_baselines(self, M, expected):
        assert mg.crossover_pc(M) == pytest.approx(expected, abs=1e-6)

    def test_moves_toward_half(self):
        values = [mg.crossover_pc(M) for M in (2, 5, 10, 20, 50)]
        assert np.all(np.diff(values) < 0)

    @pytest.mark.parametrize("M", [50, 100])
    def test_large_m_asymptote(self, M):
        assert mg.crossover_pc(M) == pytest.approx(0.5 + 0.5 / (M - 1), rel=1e-3)

    @pytest.mark.parametrize("M", [2, 5, 10, 20])
    def test_branches_meet(self, M):
        pc = mg.crossover_pc(M)
        assert mg.unsaturated_fraction(pc, M) == pytest.approx(
            mg.saturated_fraction(pc, M), abs=1e-12
        )


class TestPiecewise:
    @pytest.mark.parametrize("M", [2, 5, 10, 20])
    def test_continuous_at_join(self, M):
        pc = mg.crossover_pc(M)
        below = mg.piecewise_approx(pc - 1e-9, M).f_star
        above = mg.piecewise_approx(pc + 1e-9, M).f_star
        assert abs(below - above) < 1e-6

    def test_exact_for_one_game(self):
        assert mg.piecewise_approx(0.6, 1).f_star == pytest.approx(0.2)

    @settings(max_examples=50)
    @given(st.floats(0.5, 1.0), st.integers(1, 30))
    def test_within_diversification_bound(self, p, M):
        f = mg.piecewise_approx(p, M).f_star
        assert 0.0 <= f <= 1.0 / M + 1e-15


class TestDispatch:
    @pytest.mark.parametrize("method", ["exact", "closed_form", "unsaturated", "piecewise"])
    def test_methods_agree_for_two_games(self, method):
        assert mg.solve(0.6, 2, method).f_star == pytest.approx(0.2 / 1.04, rel=0.05)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            mg.solve(0.6, 2, "newton")

    @pytest.mark.parametrize("M", [0, -1, 2.5])
    def test_invalid_m(self, M):
        with pytest.raises(ValueError):
            mg.solve_exact(0.6, M)
