import math

import numpy as np
import pytest

from pgic_noma.model import (
    STRONG,
    WEAK,
    ChannelGains,
    InvalidInputError,
    PowerAllocation,
    RegimeDistribution,
    SolverConfig,
    classify_gain,
    ergodic_rate,
    regime_rate_noise,
    regime_rate_scheme1,
    validate_allocation,
    vsic_caps,
)

DEFAULT = ChannelGains()


def direct_c(j, P, Q, a1, b1, a2, b2, s, sic):
    """Hand-written regime rate, kept literal so it is independent of the vectorized path."""
    lg = math.log2
    ga = [a1, a2, a1, a2][j - 1]
    gb = [b1, b1, b2, b2][j - 1]
    cancel_a = sic and j in (2, 4)
    cancel_b = sic and j in (3, 4)
    p1, p2, q1, q2 = P[0][j - 1], P[1][j - 1], Q[0][j - 1], Q[1][j - 1]
    ia = 0.0 if cancel_a else ga
    ib = 0.0 if cancel_b else gb
    return (
        lg(1 + p1 / (s + q1 * ia))
        + lg(1 + p2 / (s + q2 * ib))
        + lg(1 + q1 / (s + p1 * ia))
        + lg(1 + q2 / (s + p2 * ib))
    )


class TestClassify:
    @pytest.mark.parametrize("g, label", [(0.1, WEAK), (10, STRONG), (1.0, STRONG), (0.0, WEAK), (0.999, WEAK)])
    def test_labels(self, g, label):
        assert classify_gain(g) == label

    def test_negative(self):
        with pytest.raises(InvalidInputError):
            classify_gain(-0.1)


class TestTypes:
    def test_gain_invariants(self):
        for kw in ({"a1": 1.0}, {"b1": -0.1}, {"a2": 0.9}, {"b2": 0.5}):
            with pytest.raises(InvalidInputError):
                ChannelGains(**kw)

    def test_probs(self):
        RegimeDistribution(1, 0, 0, 0)
        with pytest.raises(InvalidInputError):
            RegimeDistribution(0.5, 0.5, 0.5, -0.5)
        with pytest.raises(InvalidInputError):
            RegimeDistribution(0.25, 0.25, 0.25, 0.26)

    def test_allocation_shape_and_readonly(self):
        a = PowerAllocation.equal_split(50, 50)
        assert a.P.shape == (2, 4)
        with pytest.raises(ValueError):
            a.P[0, 0] = 1.0
        with pytest.raises(InvalidInputError):
            PowerAllocation(np.zeros(8), np.zeros((2, 4)))

    @pytest.mark.parametrize(
        "kw", [{"sigma2": 0}, {"P_total": -1}, {"Q_total": -1}, {"tau": 0}, {"max_outer": 0}, {"caps_mode": "x"}]
    )
    def test_config_invariants(self, kw):
        with pytest.raises(InvalidInputError):
            SolverConfig(**kw)


class TestCaps:
    def test_default_mode_placement(self):
        caps = vsic_caps(ChannelGains(a2=10, b2=20), 1.0, "paper")
        assert caps.p_cap[0, 1] == 9.0 and caps.p_cap[0, 3] == 9.0
        assert caps.p_cap[1, 1] == 19.0 and caps.p_cap[1, 3] == 19.0
        assert caps.q_cap[0, 2] == 9.0 and caps.q_cap[0, 3] == 9.0
        assert caps.q_cap[1, 2] == 19.0 and caps.q_cap[1, 3] == 19.0
        assert np.isfinite(caps.p_cap).sum() == 4
        assert np.isfinite(caps.q_cap).sum() == 4

    def test_unit_gain_gives_zero_caps(self):
        caps = vsic_caps(ChannelGains(a2=1, b2=1), 1.0, "paper")
        finite = np.concatenate([caps.p_cap[np.isfinite(caps.p_cap)], caps.q_cap[np.isfinite(caps.q_cap)]])
        assert finite.size == 8 and np.all(finite == 0)

    def test_scales_with_noise(self):
        assert vsic_caps(ChannelGains(a2=10), 2.0).p_cap[0, 1] == 18.0

    def test_symmetric_mode(self):
        caps = vsic_caps(ChannelGains(a2=10, b2=20), 1.0, "symmetric")
        expected = np.full((2, 4), np.inf)
        expected[0, [1, 3]] = 9.0
        expected[1, [2, 3]] = 19.0
        np.testing.assert_array_equal(caps.p_cap, expected)
        np.testing.assert_array_equal(caps.q_cap, expected)


class TestRates:
    def test_zero_power(self):
        z = PowerAllocation.zeros()
        for j in range(1, 5):
            assert regime_rate_scheme1(j, z, DEFAULT, 1.0) == 0.0
            assert regime_rate_noise(j, z, DEFAULT, 1.0) == 0.0

    def test_c22_all_nine(self):
        P = np.zeros((2, 4))
        P[:, 3] = 9
        a = PowerAllocation(P, P)
        assert regime_rate_scheme1(4, a, DEFAULT, 1.0) == pytest.approx(4 * math.log2(10), abs=1e-12)
        assert 4 * math.log2(10) == pytest.approx(13.2877, abs=1e-4)

    def test_c11_equal(self):
        a = PowerAllocation.equal_split(50, 50)
        expected = 4 * math.log2(1 + 6.25 / 1.625)
        assert regime_rate_scheme1(1, a, DEFAULT, 1.0) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(9.1073, abs=1e-4)

    def test_noise_regimes(self):
        a = PowerAllocation.equal_split(50, 50)
        r4 = 4 * math.log2(1 + 6.25 / 63.5)
        r2 = 2 * math.log2(1 + 6.25 / 63.5) + 2 * math.log2(1 + 6.25 / 1.625)
        assert regime_rate_noise(4, a, DEFAULT, 1.0) == pytest.approx(r4, abs=1e-12)
        assert regime_rate_noise(2, a, DEFAULT, 1.0) == pytest.approx(r2, abs=1e-12)
        assert r4 == pytest.approx(0.5418, abs=1e-4)
        assert r2 == pytest.approx(4.8245, abs=1e-4)

    def test_matches_literal_formula(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            P, Q = rng.uniform(0, 20, (2, 2, 4))
            g = ChannelGains(*rng.uniform(0, 0.99, 2), *rng.uniform(1, 20, 2))
            s = rng.uniform(0.5, 2)
            a = PowerAllocation(P, Q)
            for j in range(1, 5):
                args = (j, P, Q, g.a1, g.b1, g.a2, g.b2, s)
                assert regime_rate_scheme1(j, a, g, s) == pytest.approx(direct_c(*args, True), rel=1e-12)
                assert regime_rate_noise(j, a, g, s) == pytest.approx(direct_c(*args, False), rel=1e-12)

    def test_bad_regime_index(self):
        with pytest.raises(InvalidInputError):
            regime_rate_noise(0, PowerAllocation.zeros(), DEFAULT, 1.0)


class TestErgodic:
    def test_zero(self):
        assert ergodic_rate("sic", PowerAllocation.zeros(), DEFAULT, RegimeDistribution(), 1.0) == 0.0

    def test_equal_split_noise(self):
        a = PowerAllocation.equal_split(50, 50)
        r = ergodic_rate("noise", a, DEFAULT, RegimeDistribution(), 1.0)
        assert r == pytest.approx(4.8245, abs=1e-3)

    def test_degenerate_distribution(self):
        a = PowerAllocation(np.arange(8).reshape(2, 4), np.arange(8, 0, -1).reshape(2, 4))
        r = ergodic_rate("sic", a, DEFAULT, RegimeDistribution(1, 0, 0, 0), 1.0)
        assert r == regime_rate_scheme1(1, a, DEFAULT, 1.0)


class TestValidate:
    def test_equal_split_feasible(self):
        cfg = SolverConfig()
        a = PowerAllocation.equal_split(50, 50)
        rep = validate_allocation(a, vsic_caps(cfg.gains, 1.0), cfg)
        assert rep.feasible
        assert rep.p_slack == 0 and rep.q_slack == 0

    def test_cap_violation(self):
        cfg = SolverConfig()
        P = np.zeros((2, 4))
        P[0, 1] = 10
        rep = validate_allocation(PowerAllocation(P, np.zeros((2, 4))), vsic_caps(cfg.gains, 1.0), cfg)
        assert not rep.feasible
        assert [(v[0], v[1], v[2]) for v in rep.cap_violations] == [("P", 1, 2)]

    def test_negative(self):
        cfg = SolverConfig()
        Q = np.zeros((2, 4))
        Q[1, 2] = -0.1
        rep = validate_allocation(PowerAllocation(np.zeros((2, 4)), Q), vsic_caps(cfg.gains, 1.0), cfg)
        assert rep.negative == [("Q", 2, 3, -0.1)]
        assert not rep.feasible

    def test_budget_overrun(self):
        cfg = SolverConfig(P_total=10)
        rep = validate_allocation(PowerAllocation.equal_split(20, 10), vsic_caps(cfg.gains, 1.0), cfg)
        assert rep.p_slack == pytest.approx(-10)
        assert not rep.budget_ok
