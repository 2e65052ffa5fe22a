import numpy as np
import pytest

from pgic_noma.model import (
    ChannelGains,
    InvalidInputError,
    PowerAllocation,
    RegimeDistribution,
    SolverConfig,
    ergodic_rate,
    validate_allocation,
    vsic_caps,
)
from pgic_noma.oracle import OracleConfig, grid_search, project_budget_box, projected_gradient_solve


class TestProjection:
    def test_feasible_unchanged(self):
        v = np.array([1.0, 2.0, 0.0, 3.0])
        np.testing.assert_array_equal(project_budget_box(v, 10.0, np.full(4, np.inf)), v)

    def test_uniform_shift(self):
        out = project_budget_box(np.full(8, 10.0), 8.0, np.full(8, np.inf))
        np.testing.assert_allclose(out, np.ones(8), atol=1e-12)

    def test_box_clip(self):
        v = np.zeros(8)
        v[0] = 10
        caps = np.full(8, np.inf)
        caps[0] = 5
        out = project_budget_box(v, 100.0, caps)
        assert out[0] == 5.0 and np.all(out[1:] == 0)

    def test_is_closest_point(self):
        # compare against a generic QP projection by random feasible points
        rng = np.random.default_rng(1)
        for _ in range(20):
            v = rng.normal(3, 4, 8)
            caps = rng.uniform(0, 6, 8)
            budget = rng.uniform(0, 20)
            x = project_budget_box(v, budget, caps)
            assert np.all(x >= 0) and np.all(x <= caps) and x.sum() <= budget + 1e-9
            d = np.linalg.norm(x - v)
            for _ in range(200):
                y = rng.uniform(0, caps)
                if y.sum() > budget:
                    y *= budget / y.sum()
                assert np.linalg.norm(y - v) >= d - 1e-9


class TestGradient:
    def test_zero_budget(self):
        r = projected_gradient_solve("sic", SolverConfig(P_total=0, Q_total=0), OracleConfig(restarts=2))
        assert r.ergodic_rate == 0.0

    def test_outputs_feasible(self):
        cfg = SolverConfig(gains=ChannelGains(a2=3, b2=4))
        for scheme in ("sic", "noise"):
            r = projected_gradient_solve(scheme, cfg, OracleConfig(restarts=3))
            caps = vsic_caps(cfg.gains, 1.0) if scheme == "sic" else None
            if caps is not None:
                assert validate_allocation(r.allocation, caps, cfg).feasible
            assert r.allocation.P.sum() <= cfg.P_total + 1e-9

    def test_never_worse_than_seed(self):
        cfg = SolverConfig()
        seed = PowerAllocation(np.array([[5, 9, 5, 9], [5, 5, 9, 3]]), np.array([[5, 5, 9, 9], [5, 5, 9, 7]]))
        seed_rate = ergodic_rate("sic", seed, cfg.gains, cfg.probs, 1.0)
        r = projected_gradient_solve("sic", cfg, OracleConfig(restarts=1, max_steps=3), initial=[seed])
        assert r.ergodic_rate >= seed_rate

    def test_deterministic(self):
        cfg = SolverConfig(gains=ChannelGains(a1=0.5, b1=0.3, a2=4, b2=7))
        a = projected_gradient_solve("noise", cfg, OracleConfig(restarts=3, seed=9))
        b = projected_gradient_solve("noise", cfg, OracleConfig(restarts=3, seed=9))
        assert a.allocation == b.allocation

    def test_default_sic_close_to_solver(self, default_solves):
        r = projected_gradient_solve("sic", SolverConfig(), OracleConfig(restarts=8))
        assert abs(r.ergodic_rate / default_solves[1].ergodic_rate - 1) <= 0.02


class TestGrid:
    # flat indices: TX1 slot (i, j) 0-based is 4 * i + j
    def test_single_sic_coordinate(self):
        cfg = SolverConfig(P_total=9.0, probs=RegimeDistribution(0, 0, 0, 1), gains=ChannelGains(a2=20, b2=20))
        r = grid_search("sic", cfg, [3], 1001)
        assert r.allocation.P[0, 3] == pytest.approx(9.0)

    def test_two_symmetric_sic_coordinates(self):
        cfg = SolverConfig(P_total=18.0, probs=RegimeDistribution(0, 0, 0, 1), gains=ChannelGains(a2=20, b2=20))
        r = grid_search("sic", cfg, [3, 7], 181)
        assert r.allocation.P[0, 3] == pytest.approx(9.0) and r.allocation.P[1, 3] == pytest.approx(9.0)

    def test_zero_budget(self):
        r = grid_search("sic", SolverConfig(P_total=0, Q_total=0), [0, 1], 11)
        assert np.all(r.allocation.P == 0)

    def test_too_many_coordinates(self):
        with pytest.raises(InvalidInputError):
            grid_search("sic", SolverConfig(), [0, 1, 2, 3, 4], 3)

    def test_oracle_config_invariants(self):
        with pytest.raises(InvalidInputError):
            OracleConfig(restarts=0)
        with pytest.raises(InvalidInputError):
            OracleConfig(grid_resolution=1)
