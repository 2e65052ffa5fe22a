"""JSON configuration files.

A config is a flat JSON object; every key is optional::

    {"sigma2": 1, "P": 50, "Q": 50, "a1": 0.1, "b1": 0.1, "a2": 10, "b2": 10,
     "probs": [0.25, 0.25, 0.25, 0.25], "tau": 1e-5, "max_outer": 100,
     "caps_mode": "paper", "weighted_gradients": true}

``probs`` is ordered (p11, p21, p12, p22).
"""

from __future__ import annotations

import json
import math
import numbers

from .model import ChannelGains, InvalidInputError, RegimeDistribution, SolverConfig

DEFAULTS = {
    "sigma2": 1.0,
    "P": 50.0,
    "Q": 50.0,
    "a1": 0.1,
    "b1": 0.1,
    "a2": 10.0,
    "b2": 10.0,
    "probs": [0.25, 0.25, 0.25, 0.25],
    "tau": 1e-5,
    "max_outer": 100,
    "caps_mode": "paper",
    "weighted_gradients": True,
}

PROB_SUM_TOL = 1e-9


class ConfigError(InvalidInputError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _number(d, key) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
        raise ConfigError(key, f"expected a finite number, got {v!r}")
    return float(v)


def config_from_dict(data: dict) -> SolverConfig:
    """Build a validated :class:`SolverConfig`; missing keys take defaults."""
    if not isinstance(data, dict):
        raise ConfigError(None, f"config must be a JSON object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ConfigError(unknown[0], f"unknown key (allowed: {', '.join(DEFAULTS)})")
    d = {**DEFAULTS, **data}

    sigma2 = _number(d, "sigma2")
    if sigma2 <= 0:
        raise ConfigError("sigma2", f"noise variance must be > 0, got {sigma2!r}")
    for key in ("P", "Q"):
        if _number(d, key) < 0:
            raise ConfigError(key, f"power budget must be >= 0, got {d[key]!r}")
    for key in ("a1", "b1"):
        v = _number(d, key)
        if not 0 <= v < 1:
            raise ConfigError(key, f"weak gain must satisfy 0 <= {key} < 1, got {v!r}")
    for key in ("a2", "b2"):
        v = _number(d, key)
        if v < 1:
            raise ConfigError(key, f"strong gain must satisfy {key} >= 1, got {v!r}")

    probs = d["probs"]
    if not isinstance(probs, list) or len(probs) != 4:
        raise ConfigError("probs", f"expected a list of 4 probabilities, got {probs!r}")
    for p in probs:
        if isinstance(p, bool) or not isinstance(p, numbers.Real) or not 0 <= p <= 1:
            raise ConfigError("probs", f"each probability must lie in [0, 1], got {probs!r}")
    total = math.fsum(probs)
    if abs(total - 1) > PROB_SUM_TOL:
        raise ConfigError("probs", f"probabilities must sum to 1 (within {PROB_SUM_TOL}), got {total!r}")

    tau = _number(d, "tau")
    if tau <= 0:
        raise ConfigError("tau", f"tolerance must be > 0, got {tau!r}")
    max_outer = d["max_outer"]
    if isinstance(max_outer, bool) or not isinstance(max_outer, int) or max_outer < 1:
        raise ConfigError("max_outer", f"expected an integer >= 1, got {max_outer!r}")
    if d["caps_mode"] not in ("paper", "symmetric"):
        raise ConfigError("caps_mode", f"expected 'paper' or 'symmetric', got {d['caps_mode']!r}")
    if not isinstance(d["weighted_gradients"], bool):
        raise ConfigError("weighted_gradients", f"expected true or false, got {d['weighted_gradients']!r}")

    return SolverConfig(
        gains=ChannelGains(a1=d["a1"], b1=d["b1"], a2=d["a2"], b2=d["b2"]),
        probs=RegimeDistribution.from_sequence([p / total for p in probs]),
        sigma2=sigma2,
        P_total=float(d["P"]),
        Q_total=float(d["Q"]),
        tau=tau,
        max_outer=max_outer,
        caps_mode=d["caps_mode"],
        weighted_gradients=d["weighted_gradients"],
    )


def parse_config(path) -> SolverConfig:
    """Read a JSON config file.

    Raises ``OSError`` if the file cannot be read and :class:`ConfigError`
    for malformed JSON or out-of-range values.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(None, f"malformed JSON in {path}: {exc}") from exc
    return config_from_dict(data)
