from fractions import Fraction
from itertools import product

import pytest

from core.errors import InvalidPairData, RankMismatch
from pairs import (NOT_POLYSTABLE, POLYSTABLE_NOT_STABLE, STABLE, kernel_summand_sums,
                   large_tau_bound, oriented_pair_classify, quot_pair_classify, quot_tau_walls,
                   split_pair, subset_candidates, twist_candidates)


def _oriented_rule(d1, d2, phi, d_phi):
    mu = Fraction(d1 + d2, 2)
    if any(phi):
        return STABLE if d_phi < mu else NOT_POLYSTABLE
    return POLYSTABLE_NOT_STABLE if d1 == d2 else NOT_POLYSTABLE


def _oriented_grid():
    for d1, d2 in product(range(-3, 4), repeat=2):
        for phi in product((False, True), repeat=2):
            if not any(phi):
                yield d1, d2, phi, None
                continue
            bound = min(d for d, nz in zip((d1, d2), phi) if nz)
            for d_phi in range(0, min(bound, 3) + 1):
                yield d1, d2, phi, d_phi


@pytest.mark.parametrize("d1, d2, phi, d_phi", list(_oriented_grid()))
def test_oriented_grid(d1, d2, phi, d_phi):
    p = split_pair([d1, d2], phi, d_phi)
    assert oriented_pair_classify(p).cls == _oriented_rule(d1, d2, phi, d_phi or 0)


def test_oriented_examples():
    p = split_pair([2, 1], [True, False], 1)
    v = oriented_pair_classify(p)
    assert v.cls == STABLE
    assert v.diagnostics['slope_E'] == Fraction(3, 2)
    v = oriented_pair_classify(split_pair([3, -1], [False, False]))
    assert v.cls == NOT_POLYSTABLE
    assert v.violated['degree'] == 3


def test_oriented_needs_rank_two():
    with pytest.raises(RankMismatch):
        oriented_pair_classify(split_pair([1, 1, 1], [True, True, True]))


def test_oriented_needs_divisor_degree():
    p = split_pair([1, 1], [True, True])
    with pytest.raises(InvalidPairData):
        oriented_pair_classify(p)
    # phi = 0 has no divisor to ask for
    assert oriented_pair_classify(split_pair([1, 1], [False, False])).cls == POLYSTABLE_NOT_STABLE


@pytest.mark.parametrize("kwargs", [
    {'summand_degrees': []},
    {'summand_degrees': [1, 2], 'phi_nonzero': [True]},
    {'summand_degrees': [1, 2], 'phi_nonzero': [False, False], 'd_phi': 0},
    {'summand_degrees': [1, 2], 'phi_nonzero': [True, True], 'd_phi': 2},
    {'summand_degrees': [1, 2], 'phi_map': [[True, False]], 'target_degrees': [0]},
    {'summand_degrees': [1.5, 2], 'phi_nonzero': [True, True]},
    {'summand_degrees': [1, 2]},
])
def test_invalid_pair_data(kwargs):
    with pytest.raises(InvalidPairData):
        split_pair(**kwargs)


def test_phi_map_determines_kernel():
    p = split_pair([1, 0], target_degrees=[2, 1], phi_map=[[True, False], [False, False]])
    assert p.phi_nonzero == (True, False)
    assert [s.summands for s in kernel_summand_sums(p)] == [(1,)]


def _quot_rule(d1, d2, phi, tau):
    b = -tau
    if not Fraction(d1 + d2, 2) > b or not d1 > b or not d2 > b:
        return NOT_POLYSTABLE
    if not any(phi) and not Fraction(d1 + d2, 2) < b:
        return NOT_POLYSTABLE
    if any(not nz and not d < b for d, nz in zip((d1, d2), phi)):
        return NOT_POLYSTABLE
    return STABLE


@pytest.mark.parametrize("tau", [Fraction(-3), Fraction(-1, 2), Fraction(0), Fraction(5, 2)])
def test_quot_grid(tau):
    for d1, d2 in product(range(-3, 4), repeat=2):
        for phi in product((False, True), repeat=2):
            p = split_pair([d1, d2], phi, tau=tau)
            assert quot_pair_classify(p).cls == _quot_rule(d1, d2, phi, tau), (d1, d2, phi)


def test_quot_verdict_reports_violated_condition():
    p = split_pair([1, 1], [True, False], tau=Fraction(-1, 2))
    v = quot_pair_classify(p)
    assert v.cls == NOT_POLYSTABLE
    assert v.violated['condition'] == 2
    assert v.violated['summands'] == [1]


def test_quot_stable_example():
    p = split_pair([1, 0], target_degrees=[2], phi_map=[[True, True]], tau="1/2")
    assert quot_pair_classify(p).cls == STABLE


def test_quot_needs_tau():
    with pytest.raises(InvalidPairData):
        quot_pair_classify(split_pair([1, 1], [True, True]))


def test_candidates():
    p = split_pair([2, 0, 1], [True, True, True])
    assert len(subset_candidates(p)) == 7
    twists = twist_candidates(p, Fraction(0))
    assert all(t.kind == 'twist' and t.rank == 1 for t in twists)
    assert [t.degree for t in twists if t.summands == (0,)] == [1, 0]
    assert len(twist_candidates(p, Fraction(-100))) == 0


def test_twist_cap_is_shared_by_summands():
    p = split_pair([1, 1], [True, True])
    twists = twist_candidates(p, Fraction(100))
    assert len(twists) == 4
    assert [t.summands for t in twists] == [(0,), (1,), (0,), (1,)]
    assert [t.degree for t in twists] == [0, 0, -1, -1]


@pytest.mark.parametrize("degrees, phi", [
    ([1, 0], [True, False]),
    ([2, -1, 0], [True, True, False]),
    ([1, 1], [True, True]),
])
def test_large_tau_behaviour(degrees, phi):
    p = split_pair(degrees, phi)
    bound = large_tau_bound(p)
    walls = quot_tau_walls(p)
    assert walls == sorted(walls) and bound == walls[-1]
    expected = STABLE if not kernel_summand_sums(p) else NOT_POLYSTABLE
    for extra in (Fraction(1, 3), Fraction(1), Fraction(10)):
        assert quot_pair_classify(p, bound + extra).cls == expected
