from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from biroute.core import (
    CostVec,
    Eps,
    Line2D,
    dominates,
    eps_dominates,
    line_through,
    perp_distance,
)

costs = st.builds(
    CostVec,
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False),
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False),
)
factors = st.builds(
    Eps,
    st.floats(0, 2, allow_nan=False, allow_infinity=False),
    st.floats(0, 2, allow_nan=False, allow_infinity=False),
)


class TestDominates:
    def test_strict_in_one_equal_in_other(self):
        assert dominates(CostVec(1, 2), CostVec(1, 3))

    def test_equal_vectors_never_dominate(self):
        assert not dominates(CostVec(1, 2), CostVec(1, 2))

    def test_mutually_undominated(self):
        assert not dominates(CostVec(20, 100), CostVec(80, 30))
        assert not dominates(CostVec(80, 30), CostVec(20, 100))

    @given(costs, costs)
    def test_antisymmetry(self, p, q):
        if p != q:
            assert not (dominates(p, q) and dominates(q, p))

    @given(costs, costs, factors)
    def test_dominance_implies_eps_dominance(self, p, q, eps):
        if dominates(p, q):
            assert eps_dominates(p, q, eps)


class TestEpsDominates:
    def test_exactly_at_boundary(self):
        assert eps_dominates(CostVec(88, 33), CostVec(80, 30), Eps(0.1, 0.1))

    def test_apex_covers_slightly_worse_component(self):
        assert eps_dominates(CostVec(80, 30), CostVec(80, 28), Eps(0.1, 0.1))

    @given(costs)
    def test_zero_eps_reflexive(self, p):
        assert eps_dominates(p, p, Eps(0.0, 0.0))

    @given(costs, costs)
    def test_zero_eps_is_weak_dominance(self, p, q):
        assert eps_dominates(p, q, Eps(0.0, 0.0)) == (p.c1 <= q.c1 and p.c2 <= q.c2)

    def test_zero_component_needs_zero(self):
        assert not eps_dominates(CostVec(0, 1), CostVec(0, 0), Eps(0.5, 0.5))
        assert eps_dominates(CostVec(0, 0), CostVec(0, 0), Eps(0.5, 0.5))


class TestCostVec:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            CostVec(-1, 0)

    def test_add_and_mul_are_elementwise(self):
        assert CostVec(1, 2) + CostVec(3, 4) == CostVec(4, 6)
        assert CostVec(2, 3) * CostVec(4, 5) == CostVec(8, 15)

    def test_min_with(self):
        assert CostVec(80, 30).min_with(CostVec(90, 28)) == CostVec(80, 28)


class TestPerpDistance:
    def test_point_on_line(self):
        # a=0, b=-1 is the line y = 1.
        assert perp_distance(Line2D(0, -1), CostVec(5, 1)) == 0.0

    def test_vertical_offset(self):
        assert perp_distance(Line2D(0, -1), CostVec(5, 3)) == pytest.approx(2.0)

    def test_diagonal(self):
        # x + y = 1 written as -x - y + 1 = 0 ... coefficients (-1, -1).
        assert perp_distance(Line2D(-1, -1), CostVec(0, 0)) == pytest.approx(
            1 / math.sqrt(2)
        )

    def test_degenerate_line_rejected(self):
        with pytest.raises(ValueError):
            Line2D(0, 0)


class TestLineThrough:
    def test_line_through_origin_has_no_fit(self):
        assert line_through(CostVec(1, 1), CostVec(2, 2)) is None

    def test_two_point_fit_passes_through_both(self):
        line = line_through(CostVec(1, 2), CostVec(2, 3))
        assert line is not None
        assert line.slope == pytest.approx(1.0)
        assert perp_distance(line, CostVec(1, 2)) <= 1e-9
        assert perp_distance(line, CostVec(2, 3)) <= 1e-9

    def test_negative_slope_rejected(self):
        assert line_through(CostVec(1, 3), CostVec(2, 1)) is None

    def test_identical_points_rejected(self):
        with pytest.raises(ValueError):
            line_through(CostVec(1, 1), CostVec(1, 1))

    @given(
        st.floats(0.05, 100, allow_nan=False),
        st.floats(0.05, 100, allow_nan=False),
        st.floats(0.05, 100, allow_nan=False),
        st.floats(0.05, 100, allow_nan=False),
    )
    def test_returned_line_contains_both_points(self, x1, y1, x2, y2):
        p, q = CostVec(x1, y1), CostVec(x2, y2)
        if p == q:
            return
        line = line_through(p, q)
        if line is None:
            return
        assert perp_distance(line, p) <= 1e-9
        assert perp_distance(line, q) <= 1e-9
        assert line.slope > 0

    def test_reflection_twice_is_identity_for_distance(self):
        line = line_through(CostVec(1, 2), CostVec(3, 5))
        p = CostVec(2, 3.6)  # near the line so reflections stay non-negative
        d = perp_distance(line, p)
        # Reflect p across the line twice; distance must be unchanged.
        a, b = line.a, line.b
        n2 = a * a + b * b
        for _ in range(2):
            k = (a * p.c1 + b * p.c2 + 1.0) / n2
            p = CostVec(p.c1 - 2 * k * a, p.c2 - 2 * k * b)
        assert perp_distance(line, p) == pytest.approx(d, abs=1e-9)
