from fractions import Fraction
from itertools import product

import pytest

from cones import Halfspace, RationalCone, primitive


def F(*xs):
    return tuple(Fraction(x) for x in xs)


def test_primitive_rows():
    assert primitive((Fraction(1, 2), Fraction(-3, 4))) == F(2, -3)
    assert primitive((4, 6, 0)) == F(2, 3, 0)
    assert primitive((0, 0)) == F(0, 0)


def test_halfspace_strictness():
    h = Halfspace(F(1, 1))
    assert h.holds(F(1, -1))
    assert not Halfspace(F(1, 1), strict=True).holds(F(1, -1))


def test_strict_and_closed_opposites_are_infeasible():
    cone = RationalCone(1, (Halfspace(F(1)), Halfspace(F(-1), strict=True)))
    assert not cone.feasible()
    assert cone.witness() is None


def test_closed_opposites_meet_at_zero():
    cone = RationalCone(1, (Halfspace(F(1)), Halfspace(F(-1))))
    assert cone.witness() == F(0)
    assert cone.nonzero_witness() is None


def test_strict_zero_row_is_infeasible():
    cone = RationalCone(2, (Halfspace(F(0, 0), strict=True),))
    assert cone.witness() is None


@pytest.mark.parametrize("rows", [
    (Halfspace(F(1, 1)), Halfspace(F(1, -1), strict=True)),
    (Halfspace(F(2, -1, 0)), Halfspace(F(0, 1, 1), strict=True), Halfspace(F(-1, 0, 1))),
    (Halfspace(F("1/3", 1)), Halfspace(F(-1, 0), strict=True)),
])
def test_witness_lies_in_cone(rows):
    cone = RationalCone(len(rows[0].coeffs), rows)
    xi = cone.witness()
    assert xi is not None
    assert cone.contains(xi)


def test_combining_three_inequalities():
    # x ≤ y, y ≤ z, z < x has no solution; drop the strictness and x = y = z survives
    rows = (Halfspace(F(1, -1, 0)), Halfspace(F(0, 1, -1)))
    assert RationalCone(3, rows + (Halfspace(F(-1, 0, 1), strict=True),)).witness() is None
    cone = RationalCone(3, rows + (Halfspace(F(-1, 0, 1)),))
    xi = cone.nonzero_witness()
    assert xi is not None and xi[0] == xi[1] == xi[2] != 0


def test_nonzero_witness_agrees_with_brute_force():
    rows = (Halfspace(F(1, 2)), Halfspace(F(-1, 1)), Halfspace(F(1, -3), strict=True))
    cone = RationalCone(2, rows)
    grid = [F(a, b) for a, b in product(range(-4, 5), repeat=2) if (a, b) != (0, 0)]
    expected = any(cone.contains(p) for p in grid)
    xi = cone.nonzero_witness()
    assert (xi is not None) == expected
    if xi is not None:
        assert cone.contains(xi) and any(c != 0 for c in xi)
