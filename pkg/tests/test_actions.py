import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose

from actions import (LINEAR, PROJECTIVE, TWO_PI, WeightValue, act_by_matrix, apply_group, apply_hermitian,
                     binary_form_vector, fundamental_field, hilbert_weight_sign, matrix_action,
                     maximal_weight, moment_coords, moment_derivative_coords, moment_value, point,
                     rho_star, standard_rep, sym_power_matrix, symmetric_power_rep, weight_along_ray,
                     weight_limit_consistency, weight_rep)
from conftest import random_hermitian
from core.errors import DivergentRay, InvalidAction
from lie_core import general_linear, hermitian_basis, product, special_linear


def test_weight_value_order_and_sum():
    inf = WeightValue.infinity()
    assert WeightValue(5.0) < inf
    assert WeightValue(-1.0) < WeightValue(0.0)
    assert (WeightValue(2.0) + inf).plus_inf
    assert WeightValue(1.5) + 2.0 == WeightValue(3.5)
    assert float(inf) == math.inf
    assert str(inf) == '+inf'


def test_torus_moment_map():
    a = weight_rep([1, -1])
    x = point(a, [2, 1])
    assert_allclose(moment_coords(a, x), [1.5])
    b = weight_rep([1, -1], tau=[-2])
    assert_allclose(moment_coords(b, point(b, [2, 1])), [-0.5])


def test_projective_point_is_normalised():
    a = standard_rep(special_linear(2), PROJECTIVE)
    x = point(a, [3, 4])
    assert x.norm == pytest.approx(1.0)
    with pytest.raises(InvalidAction):
        point(a, [0, 0])
    with pytest.raises(InvalidAction):
        point(a, [1, 2, 3])


def test_projective_moment_is_fubini_study():
    a = standard_rep(general_linear(2), PROJECTIVE)
    x = point(a, [1, 1j])
    mu = moment_value(a, x)
    v = x.vector
    assert_allclose(mu, np.outer(v, v.conj()) / TWO_PI, atol=1e-12)


def test_bracket_check_rejects_non_homomorphism(rng):
    g = general_linear(2)
    rep = [random_hermitian(rng, 3) for _ in range(g.dim)]
    with pytest.raises(InvalidAction):
        matrix_action(g, rep)


def test_non_hermitian_rep_is_rejected():
    g = general_linear(1)
    with pytest.raises(InvalidAction):
        matrix_action(g, [np.array([[0.0, 1.0], [0.0, 0.0]])])


def test_tau_must_be_central():
    with pytest.raises(InvalidAction):
        standard_rep(general_linear(2), LINEAR, tau=np.diag([1.0, 0.0]))
    standard_rep(general_linear(2), LINEAR, tau=-np.eye(2))
    with pytest.raises(InvalidAction):
        weight_rep([1, -1], tau=[1], kind=PROJECTIVE)


def test_sym_power_degree_one_is_standard(rng):
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert_allclose(sym_power_matrix(x, 1), x)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_sym_power_is_lie_homomorphism(rng, d):
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    sx, sy = sym_power_matrix(x, d), sym_power_matrix(y, d)
    assert_allclose(sym_power_matrix(x @ y - y @ x, d), sx @ sy - sy @ sx, atol=1e-10)
    h = random_hermitian(rng, 2)
    sh = sym_power_matrix(h, d)
    assert_allclose(sh, sh.conj().T, atol=1e-12)


def test_binary_form_vector_scaling():
    v = binary_form_vector([1, 3, 3, 1])
    assert_allclose(v, [1, math.sqrt(3), math.sqrt(3), 1])


def test_symmetric_power_weights():
    a = symmetric_power_rep(3)
    xi = np.diag([1.0, -1.0])
    assert_allclose(np.diag(rho_star(a, xi)).real, [3, 1, -1, -3])


def test_apply_hermitian_matches_expm(rng):
    a = standard_rep(general_linear(3), LINEAR)
    x = point(a, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    s = random_hermitian(rng, 3, 0.5)
    assert_allclose(apply_hermitian(a, s, x).vector, apply_group(a, s, x).vector, atol=1e-10)
    assert_allclose(apply_group(a, s, x).vector, scipy.linalg.expm(s) @ x.vector, atol=1e-10)


def test_fundamental_field_is_tangent_on_projective_space(rng):
    a = symmetric_power_rep(2)
    x = point(a, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    u = a.group.random_hermitian(rng)
    w = fundamental_field(a, u, x)
    assert abs(np.vdot(x.vector, w)) < 1e-12


@pytest.mark.parametrize("kind", [LINEAR, PROJECTIVE])
def test_moment_derivative_against_finite_differences(rng, kind):
    a = standard_rep(product(general_linear(1), special_linear(2)), kind)
    x = point(a, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    if kind == PROJECTIVE:
        w = w - np.vdot(x.vector, w) * x.vector
    h = 1e-6
    plus = moment_coords(a, point(a, x.vector + h * w))
    minus = moment_coords(a, point(a, x.vector - h * w))
    assert_allclose(moment_derivative_coords(a, x, w), (plus - minus) / (2 * h), atol=1e-7)


@pytest.mark.parametrize("kind", [LINEAR, PROJECTIVE])
def test_infinitesimal_equivariance(rng, kind):
    a = standard_rep(general_linear(3), kind)
    x = point(a, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    u = 1j * a.group.random_hermitian(rng)
    w = fundamental_field(a, u, x)
    dmu = a.group.from_coords(moment_derivative_coords(a, x, w))
    mu = moment_value(a, x)
    assert_allclose(dmu, u @ mu - mu @ u, atol=1e-10)



@pytest.mark.parametrize("kind", [LINEAR, PROJECTIVE])
def test_unitary_equivariance(rng, kind):
    a = standard_rep(general_linear(3), kind)
    x = point(a, rng.standard_normal(3) + 1j * rng.standard_normal(3))
    k = scipy.linalg.expm(1j * random_hermitian(rng, 3))
    assert_allclose(moment_value(a, act_by_matrix(a, k, x)), k @ moment_value(a, x) @ k.conj().T, atol=1e-10)


def test_weight_along_ray_closed_form():
    a = weight_rep([1, -1])
    x = point(a, [1, 1])
    xi = np.array([[1.0]])
    for t in (-2.0, 0.0, 0.7, 3.0):
        assert weight_along_ray(a, xi, x, t) == pytest.approx(0.5 * (math.exp(2 * t) - math.exp(-2 * t)))
    assert weight_along_ray(a, xi, x, 1000.0) == math.inf


def test_weight_along_ray_is_nondecreasing(rng):
    a = symmetric_power_rep(3)
    for _ in range(20):
        x = point(a, rng.standard_normal(4) + 1j * rng.standard_normal(4))
        s = a.group.random_hermitian(rng)
        vals = [weight_along_ray(a, s, x, t) for t in np.linspace(-4, 4, 60)]
        assert all(q >= p - 1e-10 for p, q in zip(vals, vals[1:]))


def test_maximal_weight_linear():
    a = weight_rep([1, -1])
    xi = np.array([[1.0]])
    assert maximal_weight(a, xi, point(a, [1, 1])).plus_inf
    assert maximal_weight(a, -xi, point(a, [1, 0])) == WeightValue(0.0)
    b = weight_rep([1, -1], tau=[2])
    assert maximal_weight(b, xi, point(b, [0, 1])) == WeightValue(2.0)


def test_maximal_weight_projective_and_limit():
    a = weight_rep([1, -1], kind=PROJECTIVE)
    x = point(a, [1, 1])
    xi = np.array([[1.0]])
    assert float(maximal_weight(a, xi, x)) == pytest.approx(1.0 / TWO_PI)
    assert weight_limit_consistency(a, xi, x) < 1e-12
    lin = weight_rep([1, -1])
    with pytest.raises(DivergentRay):
        weight_limit_consistency(lin, xi, point(lin, [1, 1]))


def test_hilbert_weight_sign():
    a = weight_rep([1, -1], tau=[-1])
    xi = np.array([[1.0]])
    assert hilbert_weight_sign(a, xi, point(a, [1, 1])) == 1
    assert hilbert_weight_sign(a, xi, point(a, [0, 1])) == -1
    b = weight_rep([1, -1])
    assert hilbert_weight_sign(b, -xi, point(b, [1, 0])) == 0


def test_basis_rep_for_standard_action():
    g = special_linear(2)
    a = standard_rep(g)
    for e, r in zip(hermitian_basis(g), a.rep):
        assert_allclose(e, r)
