"""Two-user, two-subchannel parallel Gaussian interference channel (PGIC).

Power matrices are stored 0-indexed with shape ``(2, 4)``: row ``i`` is the
subchannel, column ``j`` the joint interference regime::

    j = 0 : (a1, b1)  weak / weak
    j = 1 : (a2, b1)  strong / weak
    j = 2 : (a1, b2)  weak / strong
    j = 3 : (a2, b2)  strong / strong

Public functions that take a regime index use the 1-based numbering
(``j in {1, 2, 3, 4}``) so that printed output lines up with the usual
``P_ij`` notation.

Rates are reported in bits/s/Hz (log2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

WEAK = "weak"
STRONG = "strong_or_very_strong"

Scheme = Literal["sic", "noise"]
CapsMode = Literal["paper", "symmetric"]

REGIME_LABELS = ("weak-weak", "strong-weak", "weak-strong", "strong-strong")

# Positions (subchannel, regime) whose interference gain is the strong one.
STRONG_MASK = np.array(
    [
        [False, True, False, True],
        [False, False, True, True],
    ]
)


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


def classify_gain(g: float) -> str:
    """Return ``WEAK`` for ``g < 1`` and ``STRONG`` otherwise."""
    if not g >= 0:
        raise InvalidInputError(f"gain must be nonnegative, got {g!r}")
    return WEAK if g < 1 else STRONG


@dataclass(frozen=True)
class ChannelGains:
    """Quantized interference gains; ``*1`` are weak, ``*2`` strong."""

    a1: float = 0.1
    b1: float = 0.1
    a2: float = 10.0
    b2: float = 10.0

    def __post_init__(self):
        for name in ("a1", "b1"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise InvalidInputError(f"{name} must satisfy 0 <= {name} < 1 (weak gain), got {v!r}")
        for name in ("a2", "b2"):
            v = getattr(self, name)
            if not v >= 1:
                raise InvalidInputError(f"{name} must satisfy {name} >= 1 (strong gain), got {v!r}")

    def matrix(self) -> np.ndarray:
        """Interference gain seen on each (subchannel, regime) slot."""
        return np.array(
            [
                [self.a1, self.a2, self.a1, self.a2],
                [self.b1, self.b1, self.b2, self.b2],
            ]
        )


@dataclass(frozen=True)
class RegimeDistribution:
    """Probabilities of the joint regimes, keyed by (a-state, b-state)."""

    p11: float = 0.25
    p21: float = 0.25
    p12: float = 0.25
    p22: float = 0.25

    def __post_init__(self):
        probs = self.as_array()
        if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
            raise InvalidInputError(f"regime probabilities must lie in [0, 1], got {probs.tolist()}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"regime probabilities must sum to 1, got sum {probs.sum()!r}")

    @classmethod
    def from_sequence(cls, probs: Sequence[float]) -> "RegimeDistribution":
        if len(probs) != 4:
            raise InvalidInputError(f"expected 4 regime probabilities, got {len(probs)}")
        return cls(*(float(p) for p in probs))

    def as_array(self) -> np.ndarray:
        """Probabilities in regime-column order (p11, p21, p12, p22)."""
        return np.array([self.p11, self.p21, self.p12, self.p22], dtype=float)


def _as_matrix(m) -> np.ndarray:
    arr = np.array(m, dtype=float)
    if arr.shape != (2, 4):
        raise InvalidInputError(f"power matrix must have shape (2, 4), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Transmit powers of both transmitters, each a (subchannel x regime) matrix."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "P", _as_matrix(self.P))
        object.__setattr__(self, "Q", _as_matrix(self.Q))

    @classmethod
    def zeros(cls) -> "PowerAllocation":
        return cls(np.zeros((2, 4)), np.zeros((2, 4)))

    @classmethod
    def equal_split(cls, P_total: float, Q_total: float) -> "PowerAllocation":
        return cls(np.full((2, 4), P_total / 8), np.full((2, 4), Q_total / 8))

    def swapped(self) -> "PowerAllocation":
        return PowerAllocation(self.Q, self.P)

    def __eq__(self, other):
        if not isinstance(other, PowerAllocation):
            return NotImplemented
        return np.array_equal(self.P, other.P) and np.array_equal(self.Q, other.Q)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CapMatrix:
    """Upper bounds that keep strong interference in the very strong regime.

    Unconstrained slots hold ``inf``.
    """

    p_cap: np.ndarray
    q_cap: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_cap", _as_matrix(self.p_cap))
        object.__setattr__(self, "q_cap", _as_matrix(self.q_cap))


@dataclass(frozen=True)
class SolverConfig:
    gains: ChannelGains = field(default_factory=ChannelGains)
    probs: RegimeDistribution = field(default_factory=RegimeDistribution)
    sigma2: float = 1.0
    P_total: float = 50.0
    Q_total: float = 50.0
    tau: float = 1e-5
    max_outer: int = 100
    caps_mode: CapsMode = "paper"
    weighted_gradients: bool = True

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidInputError(f"sigma2 must be > 0, got {self.sigma2!r}")
        if not self.P_total >= 0:
            raise InvalidInputError(f"P must be >= 0, got {self.P_total!r}")
        if not self.Q_total >= 0:
            raise InvalidInputError(f"Q must be >= 0, got {self.Q_total!r}")
        if not self.tau > 0:
            raise InvalidInputError(f"tau must be > 0, got {self.tau!r}")
        if int(self.max_outer) != self.max_outer or self.max_outer < 1:
            raise InvalidInputError(f"max_outer must be an integer >= 1, got {self.max_outer!r}")
        if self.caps_mode not in ("paper", "symmetric"):
            raise InvalidInputError(f"caps_mode must be 'paper' or 'symmetric', got {self.caps_mode!r}")

    def to_dict(self) -> dict:
        """Flat snapshot using the JSON config keys."""
        return {
            "sigma2": self.sigma2,
            "P": self.P_total,
            "Q": self.Q_total,
            "a1": self.gains.a1,
            "b1": self.gains.b1,
            "a2": self.gains.a2,
            "b2": self.gains.b2,
            "probs": self.probs.as_array().tolist(),
            "tau": self.tau,
            "max_outer": self.max_outer,
            "caps_mode": self.caps_mode,
            "weighted_gradients": self.weighted_gradients,
        }


@dataclass(eq=False)
class SolveResult:
    """Outcome of one scheme on one configuration.

    ``water_levels`` holds ``(1/lambda, 1/mu)`` for the waterfilling schemes
    and ``(None, None)`` for the equal split.
    """

    scheme: str
    allocation: PowerAllocation
    ergodic_rate: float
    regime_rates: np.ndarray
    water_levels: tuple = (None, None)
    outer_iterations: int = 0
    kkt_residual: float = float("nan")
    converged: bool = True

    @property
    def lambdas(self) -> tuple:
        """Dual prices ``(lambda, mu)`` recovered from the water levels."""
        return tuple(None if w is None else (0.0 if np.isinf(w) else 1.0 / w) for w in self.water_levels)


def vsic_caps(gains: ChannelGains, sigma2: float, caps_mode: CapsMode = "paper") -> CapMatrix:
    """Power ceilings that force strong interference into the very strong regime.

    A receiver can cancel the interferer on subchannel 1 when
    ``a >= p / sigma2 + 1``, i.e. ``p <= (a - 1) * sigma2``; likewise for
    subchannel 2 with ``b``.

    ``paper`` mode caps P on slots (1,2), (1,4), (2,2), (2,4) and Q on
    (1,3), (1,4), (2,3), (2,4) (1-based).  ``symmetric`` mode caps both
    transmitters on every slot whose interference is cancelled in the rate
    expressions: subchannel 1 in regimes 2 and 4, subchannel 2 in regimes 3
    and 4.
    """
    if not sigma2 > 0:
        raise InvalidInputError(f"sigma2 must be > 0, got {sigma2!r}")
    cap_a = (gains.a2 - 1.0) * sigma2
    cap_b = (gains.b2 - 1.0) * sigma2
    p_cap = np.full((2, 4), np.inf)
    q_cap = np.full((2, 4), np.inf)
    if caps_mode == "paper":
        p_cap[0, [1, 3]] = cap_a
        p_cap[1, [1, 3]] = cap_b
        q_cap[0, [2, 3]] = cap_a
        q_cap[1, [2, 3]] = cap_b
    elif caps_mode == "symmetric":
        for cap in (p_cap, q_cap):
            cap[0, [1, 3]] = cap_a
            cap[1, [2, 3]] = cap_b
    else:
        raise InvalidInputError(f"unknown caps_mode {caps_mode!r}")
    return CapMatrix(p_cap, q_cap)


def regime_rates_array(P, Q, gains: ChannelGains, sigma2: float, scheme: Scheme = "sic") -> np.ndarray:
    """Vectorized per-regime sum rates.

    ``P`` and ``Q`` broadcast with trailing shape ``(2, 4)``; the result has
    trailing shape ``(4,)``.  Under ``sic`` the interference on strong slots
    is cancelled (denominator ``sigma2`` only); under ``noise`` it is always
    treated as noise.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    g = gains.matrix()
    if scheme == "sic":
        g = np.where(STRONG_MASK, 0.0, g)
    elif scheme != "noise":
        raise InvalidInputError(f"unknown scheme {scheme!r}")
    terms = np.log2(1 + P / (sigma2 + Q * g)) + np.log2(1 + Q / (sigma2 + P * g))
    return terms.sum(axis=-2)


def _check_regime(j: int):
    if j not in (1, 2, 3, 4):
        raise InvalidInputError(f"regime index must be in 1..4, got {j!r}")


def regime_rate_scheme1(j: int, alloc: PowerAllocation, gains: ChannelGains, sigma2: float) -> float:
    """Sum rate of regime ``j`` (1-based) when strong interference is cancelled."""
    _check_regime(j)
    return float(regime_rates_array(alloc.P, alloc.Q, gains, sigma2, "sic")[j - 1])


def regime_rate_noise(j: int, alloc: PowerAllocation, gains: ChannelGains, sigma2: float) -> float:
    """Sum rate of regime ``j`` (1-based) with all interference treated as noise."""
    _check_regime(j)
    return float(regime_rates_array(alloc.P, alloc.Q, gains, sigma2, "noise")[j - 1])


def ergodic_rate(
    scheme: Scheme,
    alloc: PowerAllocation,
    gains: ChannelGains,
    probs: RegimeDistribution,
    sigma2: float,
) -> float:
    rates = regime_rates_array(alloc.P, alloc.Q, gains, sigma2, scheme)
    return float(probs.as_array() @ rates)


@dataclass
class ValidationReport:
    """Feasibility of an allocation; indices in violations are 1-based."""

    negative: list = field(default_factory=list)
    cap_violations: list = field(default_factory=list)
    p_slack: float = 0.0
    q_slack: float = 0.0
    tol: float = 0.0

    @property
    def budget_ok(self) -> bool:
        return self.p_slack >= -self.tol and self.q_slack >= -self.tol

    @property
    def feasible(self) -> bool:
        return not self.negative and not self.cap_violations and self.budget_ok

    def describe(self) -> list[str]:
        lines = []
        for tx, i, j, v in self.negative:
            lines.append(f"negative power {tx}[{i}][{j}] = {v:.6g}")
        for tx, i, j, v, cap in self.cap_violations:
            lines.append(f"cap violation {tx}[{i}][{j}] = {v:.6g} > {cap:.6g}")
        if self.p_slack < -self.tol:
            lines.append(f"P budget exceeded by {-self.p_slack:.6g}")
        if self.q_slack < -self.tol:
            lines.append(f"Q budget exceeded by {-self.q_slack:.6g}")
        return lines


def validate_allocation(alloc: PowerAllocation, caps: CapMatrix, config: SolverConfig) -> ValidationReport:
    """Check nonnegativity, caps and budgets (budgets allow ``config.tau`` overshoot)."""
    report = ValidationReport(
        p_slack=float(config.P_total - alloc.P.sum()),
        q_slack=float(config.Q_total - alloc.Q.sum()),
        tol=config.tau,
    )
    for name, m, cap in (("P", alloc.P, caps.p_cap), ("Q", alloc.Q, caps.q_cap)):
        for i, j in zip(*np.nonzero(m < 0)):
            report.negative.append((name, i + 1, j + 1, float(m[i, j])))
        for i, j in zip(*np.nonzero(m > cap)):
            report.cap_violations.append((name, i + 1, j + 1, float(m[i, j]), float(cap[i, j])))
    return report
