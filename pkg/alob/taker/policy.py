"""Market-order volume policies.

Both policies draw the executed fraction ``f`` of the opposite best volume
from the density ``k (1 - f)^(k - 1)`` on [0, 1]. The constant-exponent
policy fixes ``k = zeta``; the adaptive policy sets ``k = g(x)`` where
``x = eps * eps_hat`` so that the probability of a full best-level sweep is
``alpha * (1 - x)``.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from loguru import logger

from alob.errors import InvalidParameters

X_CEILING = 1.0 - 1e-12
G_FLOOR = 1e-12


@dataclass(frozen=True)
class TothPolicy:
    zeta: float

    def __post_init__(self):
        if not self.zeta > 0.0:
            raise InvalidParameters(f"zeta must be positive, got {self.zeta}")

    def exponent(self, x: float = 0.0) -> float:
        return self.zeta


@dataclass(frozen=True)
class AdaptivePolicy:
    alpha: float = 0.5
    delta: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha <= 0.5:
            raise InvalidParameters(f"alpha must be in (0, 1/2], got {self.alpha}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameters(f"delta must be in (0, 1), got {self.delta}")

    def impact_scale(self, tick_log_gap: float) -> float:
        """``A = w alpha / 2`` with the tick measured as a log gap."""
        return tick_log_gap * self.alpha / 2.0

    def exponent(self, x: float) -> float:
        return g_exponent(self, x)


Policy = Union[TothPolicy, AdaptivePolicy]


def g_exponent(policy: AdaptivePolicy, x: float) -> float:
    x = min(float(x), X_CEILING)
    g = (math.log(policy.alpha) + math.log1p(-x)) / math.log(policy.delta)
    if g < G_FLOOR:
        logger.debug(f"Exponent {g:.3g} at x={x:.6f} raised to {G_FLOOR}")
        return G_FLOOR
    return g


def penetration_prob(policy: AdaptivePolicy, x: float) -> float:
    return min(max(policy.alpha * (1.0 - float(x)), 0.0), 1.0)


def fraction_from_uniform(u: float, exponent: float) -> float:
    return 1.0 - (1.0 - u) ** (1.0 / exponent)


def sample_fraction(policy: Policy, x: float, rng: np.random.Generator) -> float:
    return fraction_from_uniform(rng.random(), policy.exponent(x))


def market_volume(policy: Policy, f: float, v_opp_best: int) -> int:
    """Shares sent for fraction ``f``; adaptive fractions above ``1 - delta``
    take the whole opposite best."""
    if v_opp_best < 1:
        raise InvalidParameters(f"opposite best volume must be >= 1, got {v_opp_best}")
    if isinstance(policy, AdaptivePolicy) and f >= 1.0 - policy.delta:
        return int(v_opp_best)
    return max(1, math.floor(f * v_opp_best))
