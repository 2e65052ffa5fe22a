"""Generalized iterative waterfilling for the two-user PGIC.

Each transmitter's problem, with the other transmitter's powers frozen, is
separable across its eight (subchannel, regime) coordinates once a price
``lam`` is attached to the sum-power budget.  A coordinate is one of two
forms:

``sic``
    interference on this slot is cancelled, so the only term depending on
    the own power ``x`` is ``log(1 + x / sigma2)``.
``noise_coupled``
    interference is treated as noise at both receivers; ``x`` appears in the
    own SINR numerator and in the other user's SINR denominator.

The water level is ``1 / lam``.  Marginals are in nats per watt; the ``1/ln 2``
conversion to bits is a common factor that only rescales ``lam``.

Dual variables of the very-strong-interference caps are not searched
explicitly: a coordinate is clamped at its cap and the dual is recoverable
as ``max(0, marginal(cap) - lam)``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .model import (
    STRONG_MASK,
    CapMatrix,
    InvalidInputError,
    PowerAllocation,
    Scheme,
    SolveResult,
    SolverConfig,
    regime_rates_array,
    vsic_caps,
)

log = logging.getLogger(__name__)

Form = Literal["sic", "noise_coupled"]

ROOT_XTOL = 1e-10


@dataclass(frozen=True)
class TermSpec:
    """One power coordinate of one transmitter.

    ``i`` and ``j`` are 0-based (subchannel, regime).  ``cross`` is the other
    transmitter's frozen power on the same slot and ``gain`` the interference
    gain used when the slot is noise-coupled.  ``weight`` is the regime
    probability.
    """

    transmitter: str
    i: int
    j: int
    form: Form
    gain: float = 0.0
    cross: float = 0.0
    cap: float = math.inf
    weight: float = 1.0


@dataclass
class WaterLevelSolution:
    powers: np.ndarray
    lam: float
    budget_used: float
    active_set: list

    @property
    def water_level(self) -> float:
        return math.inf if self.lam == 0 else 1.0 / self.lam


def _weight(term: TermSpec, weighted: bool) -> float:
    return term.weight if weighted else 1.0


def marginal(term: TermSpec, x: float, sigma2: float, weighted: bool = True) -> float:
    """Derivative of the sum rate (nats) with respect to this coordinate's power."""
    w = _weight(term, weighted)
    if term.form == "sic":
        return w / (sigma2 + x)
    g, c = term.gain, term.cross
    return w * (1.0 / (sigma2 + c * g + x) + g / (sigma2 + x * g + c) - g / (sigma2 + x * g))


def term_rate(term: TermSpec, x, sigma2: float):
    """Part of the sum rate (nats, unweighted) that depends on this coordinate."""
    if term.form == "sic":
        return np.log1p(x / sigma2)
    g, c = term.gain, term.cross
    return np.log1p(x / (sigma2 + c * g)) + np.log1p(c / (sigma2 + x * g))


def _poly_mul(p, q):
    out = [0.0] * (len(p) + len(q) - 1)
    for a, pa in enumerate(p):
        for b, qb in enumerate(q):
            out[a + b] += pa * qb
    return out


def _horner(coef, x):
    acc = 0.0
    for c in reversed(coef):
        acc = acc * x + c
    return acc


def _stationary_points(term: TermSpec, lam: float, w: float, sigma2: float, ub: float) -> list:
    """Roots of ``w * marginal(x) = lam`` on ``(0, ub)`` for a noise-coupled term.

    Clearing the positive denominators ``(A + x)(B + g x)(s + g x)`` turns the
    condition into a cubic ``N(x) = 0``.  ``N`` is monotone between its own
    critical points, so each piece is bracketed and solved with Brent.
    """
    s, g, c = sigma2, term.gain, term.cross
    A = s + c * g
    B = s + c
    # N(x) = w[(B + g x)(s + g x) - g c (A + x)] - lam (A + x)(B + g x)(s + g x)
    quad = _poly_mul([B, g], [s, g])
    U = [w * (quad[0] - g * c * A), w * (quad[1] - g * c), w * quad[2]]
    V = _poly_mul([A, 1.0], quad)
    N = [U[k] - lam * V[k] for k in range(3)] + [-lam * V[3]]

    # N'(x) = N1 + 2 N2 x + 3 N3 x^2
    d0, d1, d2 = N[1], 2 * N[2], 3 * N[3]
    crit = []
    if d2 != 0:
        disc = d1 * d1 - 4 * d2 * d0
        if disc >= 0:
            sq = math.sqrt(disc)
            crit = [(-d1 - sq) / (2 * d2), (-d1 + sq) / (2 * d2)]
    elif d1 != 0:
        crit = [-d0 / d1]
    knots = [0.0] + sorted(x for x in crit if 0 < x < ub) + [ub]

    roots = []
    f = lambda x: _horner(N, x)
    for lo, hi in zip(knots[:-1], knots[1:]):
        flo, fhi = f(lo), f(hi)
        if flo == 0:
            roots.append(lo)
        if flo * fhi < 0:
            roots.append(brentq(f, lo, hi, xtol=ROOT_XTOL))
    return roots


def coordinate_alloc(
    term: TermSpec,
    lam: float,
    sigma2: float,
    budget_hint: float = math.inf,
    weighted: bool = True,
) -> float:
    """Power in ``[0, min(cap, budget_hint)]`` maximizing ``w * rate(x) - lam * x``."""
    if not lam > 0:
        raise InvalidInputError(f"price lam must be > 0, got {lam!r}")
    w = _weight(term, weighted)
    ub = max(0.0, min(term.cap, budget_hint))
    if ub == 0 or w == 0:
        return 0.0
    if term.form == "sic":
        return min(max(w / lam - sigma2, 0.0), ub)

    # the marginal never exceeds w / x, so nothing beyond w / lam can pay off
    ub = min(ub, w / lam)
    candidates = [0.0, *_stationary_points(term, lam, w, sigma2, ub), ub]
    values = [w * term_rate(term, x, sigma2) - lam * x for x in candidates]
    return candidates[int(np.argmax(values))]


def _active_set(powers, terms, budget) -> list:
    out = []
    for x, t in zip(powers, terms):
        if x <= 0:
            out.append("zero")
        elif x >= t.cap:
            out.append("capped")
        else:
            out.append("interior")
    return out


def waterfill_budget(
    terms: Sequence[TermSpec],
    budget: float,
    sigma2: float,
    tau: float,
    weighted: bool = True,
) -> WaterLevelSolution:
    """Find the price ``lam`` whose coordinate allocations spend ``budget``.

    The summed allocation is nonincreasing in ``lam``, so the price is
    bracketed between an upper price that zeroes every coordinate and a lower
    price shrunk geometrically until the budget is exceeded, then narrowed in
    log space by false position with bisection as the fallback.  If no price exhausts the budget (every coordinate capped or at
    its unconstrained optimum) the largest price reproducing that allocation
    is returned.
    """
    if not budget >= 0:
        raise InvalidInputError(f"budget must be >= 0, got {budget!r}")
    if not terms:
        raise InvalidInputError("at least one term is required")
    terms = list(terms)
    n = len(terms)

    # rate(x) - rate(0) <= x / (sigma2 + cross * gain) for either form
    lam_hi = max(_weight(t, weighted) / (sigma2 + t.cross * t.gain) for t in terms)
    if budget == 0 or lam_hi <= 0:
        lam = lam_hi if lam_hi > 0 else 1.0
        return WaterLevelSolution(np.zeros(n), lam, 0.0, ["zero"] * n)

    def alloc(lam):
        return np.array([coordinate_alloc(t, lam, sigma2, budget, weighted) for t in terms])

    def raise_price(lam, x, top, accept):
        # largest price in [lam, top) whose allocation still passes ``accept``
        for _ in range(200):
            if top / lam - 1 < 1e-12:
                break
            mid = math.sqrt(lam * top)
            x_mid = alloc(mid)
            if accept(x_mid.sum()):
                lam, x = mid, x_mid
            else:
                top = mid
        return WaterLevelSolution(x, lam, float(x.sum()), _active_set(x, terms, budget))

    hi, x_hi = lam_hi, np.zeros(n)
    lo, x_lo = lam_hi, x_hi
    for _ in range(120):
        lo = lo * 0.25
        x_lo = alloc(lo)
        if x_lo.sum() > budget:
            break
        if budget - x_lo.sum() <= tau:
            return raise_price(lo, x_lo, hi, lambda total: budget - total <= tau)
        hi, x_hi = lo, x_lo
    else:
        # budget cannot be exhausted: every coordinate capped or at its optimum
        target = x_lo.sum()
        return raise_price(lo, x_lo, lam_hi, lambda total: total >= target)

    # Illinois false position on log(lam), falling back to bisection when
    # the allocation jumps (nonconcave coordinates)
    f_lo, f_hi = x_lo.sum() - budget, x_hi.sum() - budget
    side = 0
    for _ in range(200):
        if -f_hi <= tau or hi / lo - 1 < 1e-15:
            break
        l_lo, l_hi = math.log(lo), math.log(hi)
        mid = math.exp(l_lo + (l_hi - l_lo) * f_lo / (f_lo - f_hi))
        if not lo < mid < hi:
            mid = math.sqrt(lo * hi)
        x_mid = alloc(mid)
        f_mid = x_mid.sum() - budget
        if f_mid > 0:
            lo, x_lo, f_lo = mid, x_mid, f_mid
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, x_hi, f_hi = mid, x_mid, f_mid
            if side == 1:
                f_lo *= 0.5
            side = 1

    if budget - x_hi.sum() > tau:
        log.debug("allocation jumps at lam=%.6g; %.3g W of budget unused", hi, budget - x_hi.sum())
    return WaterLevelSolution(x_hi, hi, float(x_hi.sum()), _active_set(x_hi, terms, budget))


def build_terms(
    transmitter: str,
    cross: np.ndarray,
    config: SolverConfig,
    scheme: Scheme,
    caps: np.ndarray | None = None,
) -> list[TermSpec]:
    """Coordinates of one transmitter given the other's frozen powers.

    Under ``sic`` the strong slots (subchannel 1 in regimes 2 and 4,
    subchannel 2 in regimes 3 and 4) are cancelled and the rest are coupled
    through the weak gains; under ``noise`` every slot is coupled through its
    actual gain and nothing is capped.
    """
    gains = config.gains.matrix()
    probs = config.probs.as_array()
    if caps is None:
        caps = np.full((2, 4), np.inf)
    terms = []
    for i in range(2):
        for j in range(4):
            sic = scheme == "sic" and STRONG_MASK[i, j]
            terms.append(
                TermSpec(
                    transmitter=transmitter,
                    i=i,
                    j=j,
                    form="sic" if sic else "noise_coupled",
                    gain=0.0 if sic else float(gains[i, j]),
                    cross=float(cross[i, j]),
                    cap=float(caps[i, j]),
                    weight=float(probs[j]),
                )
            )
    return terms


def _caps_for(config: SolverConfig, scheme: Scheme) -> CapMatrix:
    if scheme == "sic":
        return vsic_caps(config.gains, config.sigma2, config.caps_mode)
    return CapMatrix(np.full((2, 4), np.inf), np.full((2, 4), np.inf))


def _scheme_name(scheme: Scheme) -> str:
    return {"sic": "scheme1", "noise": "scheme2"}[scheme]


def _rate_scheme(result: SolveResult) -> Scheme:
    return {"scheme1": "sic", "scheme2": "noise"}[result.scheme]


# weak (noise-coupled) slots under SIC: subchannel 1 in regimes 1, 3; subchannel 2 in regimes 1, 2
_WEAK_SLOTS = [(i, j) for i in range(2) for j in range(4) if not STRONG_MASK[i, j]]


def starting_points(config: SolverConfig, scheme: Scheme, multi_start: bool) -> list[np.ndarray]:
    """TX2 powers that seed the alternation (TX1 moves first against them).

    The first start is always the equal split.  With ``multi_start`` the zero
    start follows, then one start per way of handing the four weak slots to
    TX2 or leaving them to TX1: shared weak slots are where the sum rate is
    nonconcave and the alternation can settle on a poorer sharing pattern.
    """
    q = config.Q_total
    starts = [np.full((2, 4), q / 8)]
    if not multi_start:
        return starts
    starts.append(np.zeros((2, 4)))
    for owned in itertools.product((False, True), repeat=len(_WEAK_SLOTS)):
        m = STRONG_MASK.astype(float)
        for (i, j), own in zip(_WEAK_SLOTS, owned):
            m[i, j] = float(own)
        starts.append(m * (q / m.sum()))
    return starts


def _alternate_from(config, scheme, caps, Q):
    probs = config.probs.as_array()
    s = config.sigma2
    w = config.weighted_gradients
    Q = np.minimum(Q, caps.q_cap)
    best = None
    prev_rate = None
    converged = False
    k = 0
    for k in range(1, config.max_outer + 1):
        sol_p = waterfill_budget(build_terms("TX1", Q, config, scheme, caps.p_cap), config.P_total, s, config.tau, w)
        P = sol_p.powers.reshape(2, 4)
        sol_q = waterfill_budget(build_terms("TX2", P, config, scheme, caps.q_cap), config.Q_total, s, config.tau, w)
        Q = sol_q.powers.reshape(2, 4)

        rates = regime_rates_array(P, Q, config.gains, s, scheme)
        rate = float(probs @ rates)
        if best is None or rate > best["rate"]:
            best = dict(rate=rate, P=P.copy(), Q=Q.copy(), rates=rates, levels=(sol_p.water_level, sol_q.water_level))
        if prev_rate is not None and abs(rate - prev_rate) < config.tau:
            converged = True
            break
        prev_rate = rate
    best.update(converged=converged, iterations=k)
    return best


def alternate(config: SolverConfig, scheme: Scheme, multi_start: bool | None = None) -> SolveResult:
    """Alternate per-transmitter waterfilling until the ergodic rate settles.

    TX1 is updated against TX2's current powers, then TX2 against TX1's.  A
    run stops when the ergodic rate changes by less than ``tau`` between
    outer iterations, or after ``max_outer`` rounds, keeping its best iterate.
    Runs are seeded by :func:`starting_points`; ``multi_start`` defaults to
    on for ``sic`` and off for ``noise``.  The best run wins, ties going to
    the earlier start.
    """
    if multi_start is None:
        multi_start = scheme == "sic"
    caps = _caps_for(config, scheme)
    best = None
    for Q0 in starting_points(config, scheme, multi_start):
        run = _alternate_from(config, scheme, caps, Q0)
        if best is None or run["rate"] > best["rate"]:
            best = run

    if not best["converged"]:
        log.warning("%s: no convergence after %d outer iterations", _scheme_name(scheme), config.max_outer)
    result = SolveResult(
        scheme=_scheme_name(scheme),
        allocation=PowerAllocation(best["P"], best["Q"]),
        ergodic_rate=best["rate"],
        regime_rates=best["rates"],
        water_levels=best["levels"],
        outer_iterations=best["iterations"],
        converged=best["converged"],
    )
    result.kkt_residual = kkt_residual(result, config)
    return result


def alternate_solve(config: SolverConfig) -> SolveResult:
    """Scheme 1: interference-regime-enforcing allocation with SIC on strong slots."""
    return alternate(config, "sic")


def kkt_residual(result: SolveResult, config: SolverConfig) -> float:
    """Largest violation of the optimality conditions at ``result``.

    Per coordinate: ``|marginal - lam|`` when interior, ``marginal(0) - lam``
    (if positive) at zero, ``lam - marginal(cap)`` (if positive) at the cap.
    Adds the budget complementary slackness ``|lam * (sum - budget)|``.  A
    budget left unspent by more than ``tau`` is not binding, so its price is
    taken as zero.
    """
    scheme = _rate_scheme(result)
    caps = _caps_for(config, scheme)
    alloc = result.allocation
    s = config.sigma2
    w = config.weighted_gradients
    sides = (
        ("TX1", alloc.P, alloc.Q, caps.p_cap, config.P_total, result.water_levels[0]),
        ("TX2", alloc.Q, alloc.P, caps.q_cap, config.Q_total, result.water_levels[1]),
    )
    worst = 0.0
    for name, own, other, cap, budget, level in sides:
        lam = 0.0 if level is None or math.isinf(level) else 1.0 / level
        slack = budget - own.sum()
        if slack > config.tau:
            lam = 0.0
        worst = max(worst, abs(lam * slack))
        for t, x in zip(build_terms(name, other, config, scheme, cap), own.ravel()):
            if x <= 0:
                r = max(0.0, marginal(t, 0.0, s, w) - lam)
            elif x >= t.cap:
                r = max(0.0, lam - marginal(t, t.cap, s, w))
            else:
                r = abs(marginal(t, x, s, w) - lam)
            worst = max(worst, r)
    return worst
