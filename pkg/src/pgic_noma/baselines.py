"""Comparison schemes that treat all interference as noise."""

from __future__ import annotations

from .model import PowerAllocation, SolveResult, SolverConfig, regime_rates_array
from .waterfill import alternate


def scheme2_solve(config: SolverConfig) -> SolveResult:
    """Scheme 2: iterative waterfilling with interference treated as noise.

    Every coordinate is noise-coupled through its actual regime gain and no
    caps apply.  On strong slots the marginal at zero power can be negative,
    which is what drives one transmitter off those slots.
    """
    return alternate(config, "noise")


def scheme3_allocate(config: SolverConfig) -> SolveResult:
    """Scheme 3: each budget split evenly over the eight coordinates."""
    alloc = PowerAllocation.equal_split(config.P_total, config.Q_total)
    rates = regime_rates_array(alloc.P, alloc.Q, config.gains, config.sigma2, "noise")
    return SolveResult(
        scheme="scheme3",
        allocation=alloc,
        ergodic_rate=float(config.probs.as_array() @ rates),
        regime_rates=rates,
        converged=True,
    )
