import dataclasses

import numpy as np
import pytest

from pgic_noma.baselines import scheme2_solve, scheme3_allocate
from pgic_noma.model import ChannelGains, RegimeDistribution, SolverConfig, STRONG_MASK
from pgic_noma.oracle import OracleConfig, projected_gradient_solve


def test_scheme2_default_rate(default_solves):
    assert 7.8 <= default_solves[2].ergodic_rate <= 8.2
    assert default_solves[2].converged


def test_scheme2_vacates_strong_slots_for_tx1(default_solves):
    P = default_solves[2].allocation.P
    assert np.all(P[STRONG_MASK] <= 1e-2)


def test_scheme2_zero_budget():
    assert scheme2_solve(SolverConfig(P_total=0, Q_total=0)).ergodic_rate == 0.0


def test_scheme2_weak_only_matches_oracle():
    cfg = SolverConfig(probs=RegimeDistribution(1, 0, 0, 0))
    r = scheme2_solve(cfg)
    o = projected_gradient_solve("noise", cfg, OracleConfig(restarts=8))
    assert abs(r.ergodic_rate - o.ergodic_rate) <= 1e-2


@pytest.mark.parametrize("v", [2.0, 10.0, 20.0])
def test_scheme2_rate_independent_of_strong_gain(v, default_solves):
    cfg = SolverConfig(gains=ChannelGains(a2=v, b2=v))
    assert scheme2_solve(cfg).ergodic_rate == pytest.approx(default_solves[2].ergodic_rate, abs=1e-2)


def test_scheme3_default():
    r = scheme3_allocate(SolverConfig())
    assert np.all(r.allocation.P == 6.25) and np.all(r.allocation.Q == 6.25)
    assert r.ergodic_rate == pytest.approx(4.8245, abs=1e-3)
    assert r.water_levels == (None, None) and r.converged


def test_scheme3_zero_and_hundred():
    assert scheme3_allocate(SolverConfig(P_total=0, Q_total=0)).ergodic_rate == 0.0
    r = scheme3_allocate(SolverConfig(P_total=100, Q_total=100))
    assert np.all(r.allocation.P == 12.5)


def test_scheme3_invariant_to_prob_parameter():
    base = scheme3_allocate(SolverConfig()).ergodic_rate
    for p in np.linspace(0, 0.5, 11):
        cfg = SolverConfig(probs=RegimeDistribution(p, 0.5 - p, 0.5 - p, p))
        assert scheme3_allocate(cfg).ergodic_rate == pytest.approx(base, abs=1e-9)


def test_ordering_at_defaults(default_solves):
    assert default_solves[1].ergodic_rate > default_solves[2].ergodic_rate > default_solves[3].ergodic_rate
