from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from alob.errors import InvalidMemory, InvalidParameters

PHI_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DarParams:
    """Discrete autoregressive process of order p on the signs {-1, +1}.

    ``X_n`` copies ``X_{n-i}`` with probability ``chi * phi[i-1]`` and is a
    fresh draw of mean ``mu_z`` otherwise.
    """

    chi: float
    phi: tuple = field(default=(1.0,))
    mu_z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))
        if not self.phi:
            raise InvalidParameters("phi must hold at least one coefficient")
        if not 0.0 <= self.chi < 1.0:
            raise InvalidMemory(f"chi must be in [0, 1), got {self.chi}")
        if min(self.phi) < 0.0:
            raise InvalidParameters("phi coefficients must be non-negative")
        if abs(sum(self.phi) - 1.0) > PHI_TOLERANCE:
            raise InvalidParameters(f"phi must sum to 1, sums to {sum(self.phi)!r}")
        if not -1.0 <= self.mu_z <= 1.0:
            raise InvalidParameters(f"mu_z must be in [-1, 1] for signs, got {self.mu_z}")

    @property
    def p(self) -> int:
        return len(self.phi)

    @cached_property
    def phi_array(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=float)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """The products ``chi * phi_i`` for i = 1..p."""
        return self.chi * self.phi_array

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[float], mu_z: float = 0.0) -> "DarParams":
        coefficients = np.asarray(coefficients, dtype=float)
        chi = float(coefficients.sum())
        if chi <= 0.0:
            return cls(0.0, tuple(np.full(coefficients.size, 1.0 / coefficients.size)), mu_z)
        phi = coefficients / chi
        phi = phi / phi.sum()
        return cls(chi, tuple(phi), mu_z)


def draw_marginal(mu_z: float, size, rng: np.random.Generator) -> np.ndarray:
    """Fresh signs with mean ``mu_z``."""
    return np.where(rng.random(size) < (1.0 + mu_z) / 2.0, 1, -1).astype(np.int8)


def gen_dar(params: DarParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stationary DAR(p) sign series of length ``n``.

    The first p values are drawn from the marginal and a burn-in of 10 p
    draws is discarded. Each value points either to itself (fresh draw) or
    to the value it copies; pointers are resolved by repeated doubling.
    """
    p = params.p
    if n <= p:
        raise InvalidParameters(f"series length {n} must exceed the order {p}")
    total = n + 11 * p
    fresh = draw_marginal(params.mu_z, total, rng)
    copies = rng.random(total) < params.chi
    lags = rng.choice(np.arange(1, p + 1), size=total, p=params.phi_array)
    positions = np.arange(total)
    source = np.where(copies, positions - lags, positions)
    source[:p] = positions[:p]
    while True:
        jumped = source[source]
        if np.array_equal(jumped, source):
            break
        source = jumped
    return fresh[source][total - n :]
