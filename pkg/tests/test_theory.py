import numpy as np
import pytest

from ugsim.core import GameParams, LearningParams, Level, QTable, SimState, q_update
from ugsim.theory import boundary_alpha, boundary_curve, fixed_points


def iterate_self_loop(reward: float, alpha: float, gamma: float, tol: float = 1e-12) -> float:
    """Oracle: iterate the one-cell Bellman update on a self-looping state
    until the change falls below tol; independent of the closed forms."""
    table = QTable(np.zeros((9, 3)))
    learn = LearningParams(alpha=alpha, gamma=gamma, epsilon=0.0)
    s = SimState(Level.M, Level.M)
    prev = -1.0
    for _ in range(2_000_000):
        q_update(table, s, Level.M, reward, s, learn)
        cur = table.values[4, 1]
        if abs(cur - prev) < tol:
            break
        prev = cur
    return float(table.values[4, 1])


def iterate_feeder(reward: float, alpha: float, gamma: float) -> tuple[float, float]:
    """Oracle for the feed-forward pathway: a state whose update bootstraps
    into a converged self-loop; returns (loop value, feeder value)."""
    table = QTable(np.zeros((9, 3)))
    learn = LearningParams(alpha=alpha, gamma=gamma, epsilon=0.0)
    s1 = SimState(Level.L, Level.L)
    s5 = SimState(Level.M, Level.M)
    for _ in range(40_000):
        q_update(table, s5, Level.M, reward, s5, learn)
        q_update(table, s1, Level.M, reward, s5, learn)
    return float(table.values[4, 1]), float(table.values[0, 1])


class TestFixedPoints:
    def test_fair_loop_value_at_point_nine(self):
        report = fixed_points(GameParams(l=0.3, h=0.8), gamma=0.9)
        assert report.q_s5_pm == pytest.approx(5.0, abs=1e-12)
        assert report.q_s1_pl == pytest.approx(7.0, abs=1e-12)

    def test_myopic_limit(self):
        report = fixed_points(GameParams(), gamma=0.0)
        assert report.q_s5_pm == pytest.approx(0.5)

    def test_feeder_closed_form_at_half(self):
        report = fixed_points(GameParams(), gamma=0.5)
        assert report.q_s1_pm == pytest.approx(1.0)
        assert report.q_s2_pm == report.q_s1_pm

    def test_gamma_one_rejected(self):
        with pytest.raises(ValueError):
            fixed_points(GameParams(), 1.0)

    def test_matches_iteration_oracle(self):
        rng = np.random.Generator(np.random.Philox(key=99))
        for _ in range(20):
            l = 0.05 + 0.4 * rng.random()
            gamma = 0.9 * rng.random()
            game = GameParams(l=l, h=0.8)
            report = fixed_points(game, gamma)
            loop = iterate_self_loop(0.5, alpha=0.2, gamma=gamma)
            assert report.q_s5_pm == pytest.approx(loop, abs=1e-9)
            loop_l = iterate_self_loop(1.0 - l, alpha=0.2, gamma=gamma)
            assert report.q_s1_pl == pytest.approx(loop_l, abs=1e-9)
            loop_v, feeder_v = iterate_feeder(0.5, alpha=0.2, gamma=gamma)
            assert report.q_s1_pm == pytest.approx(feeder_v, abs=1e-9)


class TestBoundary:
    def test_printed_value(self):
        assert boundary_alpha(GameParams(l=0.3, h=0.8), 0.9) == pytest.approx(0.8, abs=1e-15)

    def test_myopic_value(self):
        assert boundary_alpha(GameParams(l=0.3, h=0.8), 0.0) == pytest.approx(0.2 / 0.7)

    def test_degenerate_limit(self):
        # numerator vanishes as l -> 1/2
        val = boundary_alpha(GameParams(l=0.4999, h=0.8), 0.5)
        assert val is not None and val < 0.001

    def test_l_above_half_rejected(self):
        game = GameParams(l=0.3, h=0.8)
        object.__setattr__(game, "l", 0.6)  # bypass ctor guard to hit the op's own check
        with pytest.raises(ValueError):
            boundary_alpha(game, 0.5)

    def test_balance_identity(self):
        # the switching equation holds exactly at the boundary alpha:
        # (1-a) Q*_{s1,pl} + a (gamma Q*_{s2,pm} + 0) == Q*_{s1,pm}
        rng = np.random.Generator(np.random.Philox(key=7))
        for _ in range(100):
            l = 0.05 + 0.4 * rng.random()
            gamma = 0.95 * rng.random()
            game = GameParams(l=l, h=0.8)
            alpha = boundary_alpha(game, gamma)
            assert alpha is not None
            fp = fixed_points(game, gamma)
            lhs = (1 - alpha) * fp.q_s1_pl + alpha * (gamma * fp.q_s2_pm + 0.0)
            assert lhs == pytest.approx(fp.q_s1_pm, abs=1e-12)

    def test_independent_of_h(self):
        a1 = boundary_alpha(GameParams(l=0.3, h=0.6), 0.7)
        a2 = boundary_alpha(GameParams(l=0.3, h=0.9), 0.7)
        assert a1 == a2

    def test_curve_values_and_monotonicity(self):
        game = GameParams(l=0.3, h=0.8)
        curve = boundary_curve(game, np.array([0.0, 0.5, 0.9]))
        assert curve.alphas[0] == pytest.approx(0.2 / 0.7)
        assert curve.alphas[1] == pytest.approx(0.2 / 0.45)
        assert curve.alphas[2] == pytest.approx(0.8)
        grid = np.linspace(0.0, 0.95, 40)
        alphas = boundary_curve(game, grid).alphas
        assert all(a is not None for a in alphas)
        assert all(b > a for a, b in zip(alphas, alphas[1:]))

    def test_singleton_grid(self):
        curve = boundary_curve(GameParams(), np.array([0.5]))
        assert len(curve.gammas) == 1
