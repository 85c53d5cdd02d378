from fractions import Fraction
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from actions import binary_form_vector, point, symmetric_power_rep, weight_rep
from core.errors import InvalidAction
from stability import (POLYSTABLE_NOT_STABLE, SEMISTABLE_NOT_POLYSTABLE, STABLE,
                       UNSTABLE, classify_by_test_set, direction_matrix, general_classify,
                       hilbert_mumford_scan, rational_nullspace, torus_classify, torus_test_set)


@pytest.mark.parametrize("weights, tau, v, expected", [
    ([1, -1], None, [2, 1], STABLE),
    ([1, -1], None, [1, 0], SEMISTABLE_NOT_POLYSTABLE),
    ([1, -1], None, [0, 0], POLYSTABLE_NOT_STABLE),
    ([1, 1], None, [1, 0], SEMISTABLE_NOT_POLYSTABLE),
    ([1], [-1], [1], STABLE),
    ([1], [-1], [0], UNSTABLE),
    ([1], [1], [1], UNSTABLE),
    ([[1, 0], [-1, 0], [0, 1], [0, -1]], None, [1, 1, 1, 1], STABLE),
    ([[1, 0], [-1, 0], [0, 1], [0, -1]], None, [1, 1, 0, 0], POLYSTABLE_NOT_STABLE),
    ([[1, 0], [0, 1], [-1, -1]], ["1/2", 0], [1, 1, 1], STABLE),
])
def test_torus_classify(weights, tau, v, expected):
    a = weight_rep(weights, tau=tau)
    verdict = torus_classify(a, np.array(v, dtype=complex))
    assert verdict.cls == expected
    if expected in (UNSTABLE, SEMISTABLE_NOT_POLYSTABLE) and verdict.witness_exact is not None:
        assert any(c != 0 for c in verdict.witness_exact)


def test_unstable_witness_has_negative_weight():
    a = weight_rep([1], tau=[1])
    verdict = torus_classify(a, np.array([1.0 + 0j]))
    xi = verdict.witness_exact
    assert Fraction(1) * xi[0] < 0
    assert verdict.diagnostics['weight'] < 0


def test_polystable_reports_stabilizer():
    a = weight_rep([[1, 0], [-1, 0], [0, 1], [0, -1]])
    verdict = torus_classify(a, np.array([1, 1, 0, 0], dtype=complex))
    assert len(verdict.stabilizer_basis) == 1
    assert_allclose(np.abs(np.diag(verdict.stabilizer_basis[0])), [0, 1])


def test_verdict_closure_order():
    a = weight_rep([1, -1])
    for v in ([2, 1], [1, 0], [0, 0]):
        verdict = torus_classify(a, np.array(v, dtype=complex))
        assert not verdict.is_stable or verdict.is_polystable
        assert not verdict.is_polystable or verdict.is_semistable


def test_rational_nullspace():
    basis = rational_nullspace([(Fraction(1), Fraction(1), Fraction(0))], 3)
    assert len(basis) == 2
    for b in basis:
        assert b[0] + b[1] == 0


def test_torus_test_set_points():
    a = weight_rep([[1, 0], [0, 1], [-1, -1]], tau=["1/2", 0])
    for xi in torus_test_set(a):
        assert any(c != 0 for c in xi)
        assert Fraction(1, 2) * xi[0] <= 0


def test_torus_test_set_without_weights():
    a = weight_rep([], rank=2)
    assert len(torus_test_set(a)) == 4


def test_test_set_agrees_with_exact_classification(rng):
    for _ in range(60):
        rank = int(rng.integers(1, 3))
        n = int(rng.integers(1, 5))
        weights = [[int(c) for c in rng.integers(-2, 3, size=rank)] for _ in range(n)]
        a = weight_rep(weights)
        ts = torus_test_set(a)
        v = (rng.standard_normal(n) + 0j) * (rng.random(n) < 0.7)
        assert classify_by_test_set(a, v, ts) == torus_classify(a, v).is_stable


def test_exact_classification_needs_weight_list():
    a = symmetric_power_rep(2)
    with pytest.raises(InvalidAction):
        torus_classify(a, np.ones(3, dtype=complex))


@pytest.mark.parametrize("coeffs, expected", [
    ([0, 1, 1, 0], STABLE),                       # xy(x + y): three distinct roots
    ([0, 1, 0, 0], UNSTABLE),                     # x^2 y: a double root
    ([0, 0, 1, 0, 0], POLYSTABLE_NOT_STABLE),     # x^2 y^2
    ([0, 1, 1, 0, 0], SEMISTABLE_NOT_POLYSTABLE), # x^2 y (x + y): double root in degree 4
])
def test_general_classify_binary_forms(coeffs, expected):
    a = symmetric_power_rep(len(coeffs) - 1)
    verdict = general_classify(a, point(a, binary_form_vector(coeffs)))
    assert verdict.cls == expected
    assert verdict.certificate is not None


def test_semistable_quartic_finishes_quickly():
    a = symmetric_power_rep(4)
    start = time.perf_counter()
    verdict = general_classify(a, point(a, binary_form_vector([0, 1, 1, 0, 0])))
    assert time.perf_counter() - start < 60.0
    assert verdict.cls == SEMISTABLE_NOT_POLYSTABLE
    assert verdict.certificate.source == 'stalled'
    assert verdict.certificate.moment_decay < 1e-2


@pytest.mark.parametrize("v, expected", [
    ([2, 1], STABLE),
    ([1, 0], SEMISTABLE_NOT_POLYSTABLE),
])
def test_general_classify_agrees_with_cones(v, expected):
    a = weight_rep([1, -1])
    verdict = general_classify(a, point(a, v))
    assert verdict.cls == expected
    assert verdict.cls == torus_classify(a, np.array(v, dtype=complex)).cls


def test_hilbert_mumford_scan_columns():
    a = weight_rep([1, -1])
    x = point(a, [1, 0])
    frame = hilbert_mumford_scan(a, x, [direction_matrix([1]), direction_matrix([-1])])
    assert list(frame.columns) == ['direction', 'spectrum', 'maximal_weight', 'sign']
    assert frame['sign'].tolist() == [1, 0]
    assert frame['maximal_weight'].iloc[0] == float('inf')
