"""Cost vectors, dominance relations and lines in objective space.

Everything downstream (search, clustering, super-edge construction) is
built on three small value types:

* :class:`CostVec` -- a pair of non-negative objective costs,
* :class:`Eps` -- a pair of non-negative approximation factors,
* :class:`Line2D` -- a line ``a*x + b*y + 1 = 0`` in objective space.

All three are immutable and safe to share between threads.  Dominance
comparisons are exact float comparisons on purpose: integer-derived costs
stay exactly representable in float64, and tolerances only belong to the
normalized-space geometry (:func:`perp_distance`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CostVec",
    "Eps",
    "Line2D",
    "dominates",
    "eps_dominates",
    "perp_distance",
    "line_through",
]


@dataclass(frozen=True, slots=True)
class CostVec:
    """A two-component cost, e.g. (travel time, distance)."""

    c1: float
    c2: float

    def __post_init__(self) -> None:
        # Coerce numpy scalars so values serialize and compare as plain floats.
        object.__setattr__(self, "c1", float(self.c1))
        object.__setattr__(self, "c2", float(self.c2))
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError(f"cost components must be non-negative, got {self}")

    def __add__(self, other: CostVec) -> CostVec:
        return CostVec(self.c1 + other.c1, self.c2 + other.c2)

    def __mul__(self, other: CostVec) -> CostVec:
        return CostVec(self.c1 * other.c1, self.c2 * other.c2)

    def min_with(self, other: CostVec) -> CostVec:
        """Element-wise minimum (the apex of two cost vectors)."""
        return CostVec(min(self.c1, other.c1), min(self.c2, other.c2))

    def weakly_dominates(self, other: CostVec) -> bool:
        return self.c1 <= other.c1 and self.c2 <= other.c2

    def as_tuple(self) -> tuple[float, float]:
        return (self.c1, self.c2)


@dataclass(frozen=True, slots=True)
class Eps:
    """Per-objective approximation factors (dimensionless, >= 0)."""

    e1: float
    e2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "e1", float(self.e1))
        object.__setattr__(self, "e2", float(self.e2))
        if self.e1 < 0 or self.e2 < 0:
            raise ValueError(f"approximation factors must be non-negative, got {self}")

    @staticmethod
    def zero() -> Eps:
        return Eps(0.0, 0.0)

    def covers(self, other: Eps) -> bool:
        """True when this factor is component-wise >= `other`."""
        return self.e1 >= other.e1 and self.e2 >= other.e2

    def as_tuple(self) -> tuple[float, float]:
        return (self.e1, self.e2)


@dataclass(frozen=True, slots=True)
class Line2D:
    """The line ``a*x + b*y + 1 = 0``; degenerate coefficients are rejected."""

    a: float
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if self.a * self.a + self.b * self.b <= 0.0 or not (
            math.isfinite(self.a) and math.isfinite(self.b)
        ):
            raise ValueError(f"degenerate line coefficients ({self.a}, {self.b})")

    @property
    def slope(self) -> float:
        """Slope -a/b; +/-inf for vertical lines (b == 0)."""
        if self.b == 0.0:
            return math.inf if self.a < 0 else -math.inf
        return -self.a / self.b


def dominates(p: CostVec, q: CostVec) -> bool:
    """True iff `p` dominates `q`: no worse in both components, better in one."""
    return (p.c1 <= q.c1 and p.c2 < q.c2) or (p.c1 < q.c1 and p.c2 <= q.c2)


def eps_dominates(p: CostVec, q: CostVec, eps: Eps) -> bool:
    """True iff ``p_i <= (1+eps_i) * q_i`` for both components.

    A zero `q` component forces the corresponding `p` component to be zero
    (no multiplicative slack exists at zero).
    """
    return p.c1 <= (1.0 + eps.e1) * q.c1 and p.c2 <= (1.0 + eps.e2) * q.c2


def perp_distance(line: Line2D, p: CostVec) -> float:
    """Perpendicular distance from point `p` to `line`."""
    return abs(line.a * p.c1 + line.b * p.c2 + 1.0) / math.hypot(line.a, line.b)


def line_through(p: CostVec, q: CostVec) -> Line2D | None:
    """Fit ``a*x + b*y + 1 = 0`` through two points; None when no usable fit.

    Returns None when the line through `p` and `q` passes through the origin
    (no representation with constant term 1) or when its slope is not
    strictly positive -- only positively correlated lines are usable as
    correlation lines, and callers treat None as "resample".
    """
    if p == q:
        raise ValueError("line_through requires two distinct points")
    # Solve [[p1, p2], [q1, q2]] @ [a, b] = [-1, -1].
    det = p.c1 * q.c2 - p.c2 * q.c1
    if det == 0.0:
        return None  # line passes through the origin
    a = (p.c2 - q.c2) / det
    b = (q.c1 - p.c1) / det
    if a == 0.0 and b == 0.0:
        return None
    line = Line2D(a, b)
    if b == 0.0 or not (line.slope > 0.0):
        return None
    return line
