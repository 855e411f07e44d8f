"""Closed, possibly unbounded, intervals of opponent types."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError


@dataclass(frozen=True, order=True)
class BeliefInterval:
    """The closed interval ``[lo, hi]``; either end may be infinite.

    ``lo == hi`` is allowed and denotes a singleton belief.
    """

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise InvalidArgumentError("interval endpoints must not be NaN")
        if lo > hi:
            raise InvalidArgumentError(f"empty interval [{lo}, {hi}]")
        if lo == math.inf or hi == -math.inf:
            raise InvalidArgumentError("an interval cannot sit at a single infinity")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def reals(cls) -> BeliefInterval:
        return cls(-math.inf, math.inf)

    @classmethod
    def point(cls, value: float) -> BeliefInterval:
        return cls(value, value)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def is_reals(self) -> bool:
        return self.lo == -math.inf and self.hi == math.inf

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def interior_contains(self, value: float) -> bool:
        return self.lo < value < self.hi

    def issubset(self, other: BeliefInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def reflect(self) -> BeliefInterval:
        """Return ``-S = {-s : s in S}``."""
        return BeliefInterval(-self.hi, -self.lo)

    def intersect(self, lo: float, hi: float) -> BeliefInterval | None:
        """Intersection with ``[lo, hi]``; ``None`` when empty."""
        new_lo, new_hi = max(self.lo, lo), min(self.hi, hi)
        if new_lo > new_hi:
            return None
        return BeliefInterval(new_lo, new_hi)

    def clipped(self, clip: float) -> tuple[float, float]:
        """Endpoints with infinities replaced by ``-clip`` / ``+clip``."""
        lo = -clip if self.lo == -math.inf else self.lo
        hi = clip if self.hi == math.inf else self.hi
        return lo, hi

    def __str__(self) -> str:
        left = "(" if self.lo == -math.inf else "["
        right = ")" if self.hi == math.inf else "]"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


REALS = BeliefInterval.reals()
NONNEGATIVE = BeliefInterval(0.0, math.inf)
NONPOSITIVE = BeliefInterval(-math.inf, 0.0)
