import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from actions import (LINEAR, binary_form_vector, moment_value, point, standard_rep,
                     symmetric_power_rep, weight_rep)
from lie_core import general_linear, product
from solver import (FINITE_DIFFERENCE, Inconclusive, PolystableCert, SolveOptions, UnstableCert,
                    initialize, jacobian, kempf_ness_functional, residual, solve_moment_zero,
                    stabilizer_complement)


def test_balanced_point_reaches_closed_form():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]))
    assert isinstance(out, PolystableCert)
    assert_allclose(np.abs(out.x_star.vector), [math.sqrt(2), math.sqrt(2)], atol=1e-7)
    assert out.mu_residual < 1e-9
    eps = [e for e, _ in out.path]
    assert eps[0] == 1.0 and eps[-1] == 0.0


def test_boundary_point_gives_destabilising_ray():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [1, 0]))
    assert isinstance(out, UnstableCert)
    assert abs(float(out.weight_at_sigma)) <= 1e-6
    assert out.boundary
    assert_allclose(out.sigma, [[-1.0]], atol=1e-6)


def test_finite_difference_jacobian_mode():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]), SolveOptions(jacobian_mode=FINITE_DIFFERENCE))
    assert isinstance(out, PolystableCert)
    assert_allclose(np.abs(out.x_star.vector), [math.sqrt(2), math.sqrt(2)], atol=1e-7)


def test_stabilizer_obstruction():
    # x^2 y: the torus fixing [x^2 y] pushes it toward the unstable end
    a = symmetric_power_rep(3)
    out = solve_moment_zero(a, point(a, binary_form_vector([0, 1, 0, 0])))
    assert isinstance(out, UnstableCert)
    assert out.source == 'stabilizer'
    assert float(out.weight_at_sigma) < 0


def test_small_moment_on_stabilizer_is_an_obstruction():
    # the whole torus fixes (0, 1); only tau is left in the moment map
    a = weight_rep([1, 0], tau=[1e-8])
    out = solve_moment_zero(a, point(a, [0, 1]))
    assert isinstance(out, UnstableCert)
    assert out.source == 'stabilizer'
    assert float(out.weight_at_sigma) < 0


def test_log_growth_gives_stalled_certificate():
    a = symmetric_power_rep(4)
    out = solve_moment_zero(a, point(a, binary_form_vector([0, 1, 1, 0, 0])))
    assert isinstance(out, UnstableCert)
    assert out.source == 'stalled'
    eps, norms = zip(*out.norm_history)
    assert eps[-1] > SolveOptions().eps_min
    assert all(q > p for p, q in zip(norms[-4:], norms[-3:]))
    assert out.moment_decay < 1e-2


def test_newton_work_budget():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]), SolveOptions(max_newton_total=1))
    assert isinstance(out, Inconclusive)
    assert 'Newton work budget' in out.reason


def test_initial_point_solves_the_equation_at_eps_one():
    a = standard_rep(product(general_linear(1), general_linear(1)), LINEAR,
                     tau=-np.eye(2, dtype=complex))
    x = point(a, [1.0, 2.0j])
    x0, s1 = initialize(a, x)
    assert_allclose(s1, -moment_value(a, x))
    r = residual(a, x0, 1.0, s1)
    assert r.norm < 1e-10


def test_exact_and_fd_jacobians_agree(rng):
    a = symmetric_power_rep(3)
    x = point(a, binary_form_vector([0, 1, 1, 0]))
    x0, s1 = initialize(a, x)
    s = 0.3 * a.group.random_hermitian(rng)
    exact = jacobian(a, x0, 0.5, s)
    fd = jacobian(a, x0, 0.5, s, mode=FINITE_DIFFERENCE)
    assert_allclose(exact.matrix, fd.matrix, atol=1e-6)
    sdot = a.group.random_hermitian(rng)
    out = exact.apply(sdot)
    assert_allclose(out, out.conj().T, atol=1e-12)


def test_stabilizer_split():
    a = weight_rep([1, -1])
    assert stabilizer_complement(a, point(a, [1, 0])).trivial
    assert not stabilizer_complement(a, point(a, [0, 0])).trivial
    b = standard_rep(product(general_linear(1), general_linear(1)))
    split = stabilizer_complement(b, point(b, [1, 0]))
    assert split.stabilizer.shape[1] == 1


def test_kempf_ness_functional_closed_form():
    a = weight_rep([1, -1])
    x0 = point(a, [1, 1])
    c = 0.7
    value = kempf_ness_functional(a, x0, np.array([[c]]))
    assert value == pytest.approx(0.5 * (math.cosh(2 * c) - 1.0), rel=1e-12)


def test_budget_exhaustion_is_inconclusive():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]), SolveOptions(max_continuation=2))
    assert isinstance(out, Inconclusive)
    assert 'budget' in out.reason


def test_trace_rows():
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]), SolveOptions(trace=True))
    assert out.trace
    assert set(out.trace[0]) == {'eps', 's_norm', 'residual_norm', 'newton_iters'}


@pytest.mark.parametrize("kwargs", [
    {'eps_min': 2.0},
    {'step_shrink': 1.5},
    {'jacobian_mode': 'bogus'},
    {'newton_tol': 0.0},
    {'max_newton_total': 0},
])
def test_options_are_validated(kwargs):
    with pytest.raises(ValueError):
        SolveOptions(**kwargs)
