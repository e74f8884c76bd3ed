"""Scoring parameters shared by the graph and reputation layers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InvalidConfig

#: Friends net weight, followers net weight and active/passive blend used for
#: the Spanish-election sample.
DEFAULT_OMEGA_IN = 0.75
DEFAULT_OMEGA_OUT = 0.25
DEFAULT_GAMMA = 0.7

DEFAULT_ALPHA = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ScoringConfig:
    omega_in: float = DEFAULT_OMEGA_IN
    omega_out: float = DEFAULT_OMEGA_OUT
    gamma: float = DEFAULT_GAMMA
    alpha: float = DEFAULT_ALPHA
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        for name in ("omega_in", "omega_out", "gamma"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidConfig(f"{name}={value!r} must lie in [0, 1]")
        if abs(self.omega_in + self.omega_out - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidConfig(
                f"omega_in + omega_out must equal 1 (got {self.omega_in} + {self.omega_out})"
            )
        if not (0.0 < self.alpha < 1.0):
            raise InvalidConfig(f"alpha={self.alpha!r} must lie in the open interval (0, 1)")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise InvalidConfig(f"tol={self.tol!r} must be a positive finite number")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidConfig(f"max_iter={self.max_iter!r} must be a positive integer")

    def as_dict(self) -> dict[str, float | int]:
        return asdict(self)
