"""Brute-force and first-order reference optimizers.

These only ever evaluate the ergodic rate itself: gradients are central
differences and feasibility is enforced by Euclidean projection.  None of the
waterfilling marginals are reused, so agreement with the waterfilling solver
is an independent check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    InvalidInputError,
    PowerAllocation,
    Scheme,
    SolveResult,
    SolverConfig,
    regime_rates_array,
    vsic_caps,
)


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 8
    max_steps: int = 400
    step_size: float = 20.0
    seed: int = 0
    grid_resolution: int = 101

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidInputError(f"restarts must be >= 1, got {self.restarts}")
        if self.grid_resolution < 2:
            raise InvalidInputError(f"grid_resolution must be >= 2, got {self.grid_resolution}")


def project_budget_box(v, budget: float, caps) -> np.ndarray:
    """Euclidean projection onto ``{x : 0 <= x <= caps, sum(x) <= budget}``.

    If clipping to the box already meets the budget that is the answer;
    otherwise the projection is ``clip(v - theta, 0, caps)`` with the shift
    ``theta > 0`` found by bisection so the sum equals ``budget``.
    """
    v = np.asarray(v, dtype=float)
    caps = np.broadcast_to(np.asarray(caps, dtype=float), v.shape)
    if budget < 0 or np.any(caps < 0):
        raise InvalidInputError("budget and caps must be nonnegative")
    x = np.clip(v, 0.0, caps)
    if x.sum() <= budget:
        return x
    lo, hi = 0.0, float(v.max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.clip(v - mid, 0.0, caps).sum() > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return np.clip(v - hi, 0.0, caps)


def _caps_vector(scheme: Scheme, config: SolverConfig) -> np.ndarray:
    if scheme == "sic":
        caps = vsic_caps(config.gains, config.sigma2, config.caps_mode)
        return np.concatenate([caps.p_cap.ravel(), caps.q_cap.ravel()])
    if scheme == "noise":
        return np.full(16, np.inf)
    raise InvalidInputError(f"unknown scheme {scheme!r}")


def _objective(scheme: Scheme, config: SolverConfig):
    probs = config.probs.as_array()

    def f(x):
        x = np.asarray(x, dtype=float)
        P = x[..., :8].reshape(x.shape[:-1] + (2, 4))
        Q = x[..., 8:].reshape(x.shape[:-1] + (2, 4))
        return regime_rates_array(P, Q, config.gains, config.sigma2, scheme) @ probs

    return f


def _numerical_gradient(f, x: np.ndarray) -> np.ndarray:
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    steps = np.diag(h)
    vals = f(np.concatenate([x + steps, x - steps]))
    n = x.size
    return (vals[:n] - vals[n:]) / (2 * h)


def _result(name: str, x: np.ndarray, scheme: Scheme, config: SolverConfig) -> SolveResult:
    alloc = PowerAllocation(x[:8].reshape(2, 4), x[8:].reshape(2, 4))
    rates = regime_rates_array(alloc.P, alloc.Q, config.gains, config.sigma2, scheme)
    return SolveResult(
        scheme=name,
        allocation=alloc,
        ergodic_rate=float(config.probs.as_array() @ rates),
        regime_rates=rates,
    )


def projected_gradient_solve(
    scheme: Scheme,
    config: SolverConfig,
    oracle_cfg: OracleConfig = OracleConfig(),
    initial: Sequence[PowerAllocation] = (),
) -> SolveResult:
    """Multi-restart projected gradient ascent over all sixteen powers.

    Restarts begin at any ``initial`` allocations (projected to feasibility),
    then the equal split, then seeded uniform-random feasible points.  Each
    step moves TX1's block and then TX2's block along the numerical gradient,
    projecting each onto its own budget box; the step length adapts by
    backtracking.  The best iterate over all restarts is returned, ties going
    to the earliest restart.
    """
    f = _objective(scheme, config)
    caps = _caps_vector(scheme, config)
    budgets = (config.P_total, config.Q_total)
    blocks = (slice(0, 8), slice(8, 16))
    rng = np.random.default_rng(oracle_cfg.seed)

    def project(x):
        out = np.empty(16)
        for blk, budget in zip(blocks, budgets):
            out[blk] = project_budget_box(x[blk], budget, caps[blk])
        return out

    starts = [np.concatenate([a.P.ravel(), a.Q.ravel()]) for a in initial]
    eq = PowerAllocation.equal_split(*budgets)
    starts.append(np.concatenate([eq.P.ravel(), eq.Q.ravel()]))
    while len(starts) < oracle_cfg.restarts + len(initial):
        x = np.empty(16)
        for blk, budget in zip(blocks, budgets):
            u = rng.uniform(size=8)
            x[blk] = u / u.sum() * budget * rng.uniform()
        starts.append(x)

    best_x, best_val = None, -np.inf
    for x0 in starts:
        x = project(np.asarray(x0, dtype=float))
        val = float(f(x))
        step = oracle_cfg.step_size
        for _ in range(oracle_cfg.max_steps):
            moved = False
            for blk in blocks:
                grad = _numerical_gradient(f, x)
                while step > 1e-10:
                    trial = x.copy()
                    trial[blk] = x[blk] + step * grad[blk]
                    trial = project(trial)
                    tval = float(f(trial))
                    if tval > val:
                        if np.max(np.abs(trial - x)) > 1e-12:
                            moved = True
                        x, val = trial, tval
                        step *= 1.5
                        break
                    step *= 0.5
            if not moved or step <= 1e-10:
                break
        if val > best_val:
            best_x, best_val = x, val
    return _result(f"oracle_{scheme}", best_x, scheme, config)


def grid_search(
    scheme: Scheme,
    config: SolverConfig,
    active_coords: Sequence[int],
    resolution: int,
) -> SolveResult:
    """Exhaustive search over a uniform grid on a few coordinates.

    Coordinates are flat indices 0..15: ``0..7`` are TX1's powers in
    row-major (subchannel, regime) order, ``8..15`` TX2's.  Every other
    coordinate is held at zero.  Each axis spans ``[0, min(cap, budget)]``
    and grid points violating a budget are discarded.
    """
    active = list(active_coords)
    if len(active) > 4:
        raise InvalidInputError(f"grid_search supports at most 4 active coordinates, got {len(active)}")
    if len(set(active)) != len(active) or any(not 0 <= k < 16 for k in active):
        raise InvalidInputError(f"active coordinates must be distinct indices in 0..15, got {active}")
    if resolution < 2:
        raise InvalidInputError(f"resolution must be >= 2, got {resolution}")
    f = _objective(scheme, config)
    caps = _caps_vector(scheme, config)
    budgets = np.array([config.P_total] * 8 + [config.Q_total] * 8)

    if not active:
        return _result(f"grid_{scheme}", np.zeros(16), scheme, config)

    axes = [np.linspace(0.0, min(caps[k], budgets[k]), resolution) for k in active]
    pts = np.array(list(itertools.product(*axes)))
    x = np.zeros((len(pts), 16))
    x[:, active] = pts
    ok = (x[:, :8].sum(axis=1) <= config.P_total * (1 + 1e-12)) & (
        x[:, 8:].sum(axis=1) <= config.Q_total * (1 + 1e-12)
    )
    x = x[ok]
    vals = f(x)
    return _result(f"grid_{scheme}", x[int(np.argmax(vals))], scheme, config)
