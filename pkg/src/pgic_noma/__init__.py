"""Interference-regime-enforcing power allocation for the two-user,
two-subchannel parallel Gaussian interference channel."""

from .baselines import scheme2_solve, scheme3_allocate
from .config import ConfigError, config_from_dict, parse_config
from .model import (
    CapMatrix,
    ChannelGains,
    InvalidInputError,
    PowerAllocation,
    RegimeDistribution,
    SolveResult,
    SolverConfig,
    classify_gain,
    ergodic_rate,
    regime_rate_noise,
    regime_rate_scheme1,
    validate_allocation,
    vsic_caps,
)
from .waterfill import alternate_solve, kkt_residual, waterfill_budget

__version__ = "0.1.0"
