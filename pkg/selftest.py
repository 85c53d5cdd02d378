"""
Property and oracle checks behind `python run.py selftest`.
Run: python run.py selftest [--quick]

Each suite prints PASS/FAIL lines on stderr and returns a bool; run_all is True
only when every suite passes. --quick cuts the random sample counts and skips the
N = 128 vortex runs.
"""
import itertools
import math
import sys
import time
from fractions import Fraction

import numpy as np
import scipy.linalg

from actions import (LINEAR, PROJECTIVE, binary_form_vector, fundamental_field,
                     moment_derivative_coords, moment_value, point, rho_star, standard_rep,
                     symmetric_power_rep, weight_along_ray, weight_rep)
from lie_core import (dexp_factor, eta, general_linear, matrix_function, product, psi,
                      real_inner, special_linear)
from pairs import NOT_POLYSTABLE, POLYSTABLE_NOT_STABLE, STABLE, oriented_pair_classify, \
    quot_pair_classify, split_pair
from solver import PolystableCert, UnstableCert, solve_moment_zero
from stability import (SEMISTABLE_NOT_POLYSTABLE, STABLE as S_STABLE, classify_by_test_set,
                       general_classify, torus_classify, torus_test_set)
from vortex import (VortexProblem, continuation_in_t, gaussian_bump, grid_convergence,
                    scan_threshold)

SEED = 20240611


def check(condition, msg):
    status = "PASS" if condition else "FAIL"
    print(f"  [{status}] {msg}", file=sys.stderr)
    return condition


def _header(title):
    print(f"\n--- {title} ---", file=sys.stderr)


def _random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (a + a.conj().T)


def _commutator(a, b):
    return a @ b - b @ a


# ── lie core ────────────────────────────────────────────────────────────────

def suite_differential_inequalities(rng, samples):
    _header("dexp: differential inequalities")
    worst_h, worst_a, commuting_gap = 0.0, 0.0, 0.0
    worst_bound, strict_fail = 0.0, 0
    t0 = time.perf_counter()
    for k in range(samples):
        n = int(rng.integers(1, 6))
        s = _random_hermitian(rng, n, scale=float(rng.uniform(0.1, 3.0)))
        if k % 10 == 0:
            # commuting sample: ṡ is a polynomial in s
            sdot = 0.7 * s @ s - 0.3 * s + np.eye(n)
        else:
            sdot = _random_hermitian(rng, n)
        f = dexp_factor(s, sdot)
        worst_h = max(worst_h, real_inner(sdot, sdot) - real_inner(sdot, f.sigma_h))
        value = real_inner(_commutator(f.sigma_a, s), f.sigma_h)
        worst_a = max(worst_a, value)
        # value <= -|[s, sdot]|^2 / 2, strict off the commuting set
        bracket = float(np.linalg.norm(_commutator(s, sdot)))
        worst_bound = max(worst_bound, (value + 0.5 * bracket ** 2) / (1.0 + abs(value)))
        if bracket > 1e-3 and not value < -1e-8:
            strict_fail += 1
        if k % 10 == 0:
            commuting_gap = max(commuting_gap, float(np.linalg.norm(f.sigma - sdot)))
    elapsed = time.perf_counter() - t0
    ok = check(worst_h <= 1e-8, f"<sdot, sigma_h> >= |sdot|^2 - 1e-8 over {samples} samples (worst {worst_h:.2e})")
    ok &= check(worst_a <= 1e-8, f"<[sigma_a, s], sigma_h> <= 1e-8 (worst {worst_a:.2e})")
    ok &= check(worst_bound <= 1e-8, f"<[sigma_a, s], sigma_h> <= -|[s, sdot]|^2/2 (worst excess {worst_bound:.2e})")
    ok &= check(strict_fail == 0, f"strictly negative for noncommuting samples ({strict_fail} failures)")
    ok &= check(commuting_gap <= 1e-10, f"commuting samples: sigma = sdot exactly (gap {commuting_gap:.2e})")
    check(True, f"runtime {elapsed:.2f}s")
    return ok


def suite_dexp_finite_difference(rng, samples):
    _header("dexp vs finite differences")
    h = 1e-5
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 6))
        s = _random_hermitian(rng, n)
        sdot = _random_hermitian(rng, n)
        fd = (scipy.linalg.expm(s + h * sdot) @ scipy.linalg.expm(-s) - np.eye(n)) / h
        err = float(np.linalg.norm(fd - dexp_factor(s, sdot).sigma))
        bound = 5.0 * h * float(np.linalg.norm(sdot)) ** 2 * math.exp(2.0 * float(np.linalg.norm(s, 2)))
        worst = max(worst, err / max(bound, 1e-300))
    return check(worst <= 1.0, f"{samples} samples within 5 h |sdot|^2 (scaled by e^(2|s|)); worst ratio {worst:.3f}")


def suite_matrix_functions(rng, samples):
    _header("spectral calculus: monotony and eta bounds")
    pairs = [(np.sin, lambda t: t), (np.tanh, np.sinh), (lambda t: 1.0 - math.exp(-t * t), lambda t: t * t)]
    bad = 0
    for _ in range(samples):
        n = int(rng.integers(1, 6))
        h = _random_hermitian(rng, n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for f, g in pairs:
            lhs = float(np.linalg.norm(matrix_function(f, h) @ v))
            rhs = float(np.linalg.norm(matrix_function(g, h) @ v))
            if lhs > rhs + 1e-10:
                bad += 1
    ok = check(bad == 0, f"|f| <= |g| gives |f(h)v| <= |g(h)v|, {samples} samples ({bad} violations)")
    eta_bad = 0
    for m in (0.5, 1.0, 5.0):
        for u in np.linspace(-m, m, 201):
            for n in np.linspace(1.0 / m, 100.0 / m, 200):
                if 1.0 / (2.0 * m) > n * eta(n * u) ** 2 + 1e-12:
                    eta_bad += 1
    ok &= check(eta_bad == 0, f"1/(2M) <= n eta(nu)^2 on the (M, u, n) grid ({eta_bad} violations)")
    grid = np.linspace(-30.0, 30.0, 6001)
    psi_bad = sum(1 for x, y in zip(grid, grid[1:]) if psi(y) < psi(x) - 1e-15)
    ok &= check(psi_bad == 0, f"psi nondecreasing on the grid ({psi_bad} violations)")
    return ok


# ── actions ─────────────────────────────────────────────────────────────────

def _random_action(rng):
    choice = int(rng.integers(0, 3))
    if choice == 0:
        return standard_rep(general_linear(int(rng.integers(1, 4))), LINEAR)
    if choice == 1:
        return standard_rep(special_linear(int(rng.integers(2, 4))), PROJECTIVE)
    weights = [[int(c) for c in rng.integers(-2, 3, size=2)] for _ in range(int(rng.integers(1, 5)))]
    return weight_rep(weights, kind=LINEAR if rng.random() < 0.5 else PROJECTIVE)


def suite_equivariance(rng, samples):
    _header("moment map: infinitesimal equivariance")
    worst = 0.0
    h = 1e-5
    for _ in range(samples):
        a = _random_action(rng)
        v = rng.standard_normal(a.dim_V) + 1j * rng.standard_normal(a.dim_V)
        x = point(a, v)
        u = a.group.random_hermitian(rng)
        iu = 1j * u                      # an element of 𝔨
        w = fundamental_field(a, iu, x)
        dmu = a.group.from_coords(moment_derivative_coords(a, x, w))
        mu = moment_value(a, x)
        expect = _commutator(iu, mu)
        # central difference along the K-orbit as a cross-check of the derivative itself
        gen = rho_star(a, iu)
        y_plus = point(a, scipy.linalg.expm(h * gen) @ x.vector)
        y_minus = point(a, scipy.linalg.expm(-h * gen) @ x.vector)
        fd = (moment_value(a, y_plus) - moment_value(a, y_minus)) / (2.0 * h)
        scale = max(1.0, float(np.linalg.norm(expect)))
        worst = max(worst, float(np.linalg.norm(dmu - expect)) / scale,
                    float(np.linalg.norm(fd - expect)) / scale)
    return check(worst <= 1e-5, f"d mu(u#) = [u, mu] over {samples} samples (worst rel err {worst:.2e})")


def suite_monotonicity(rng, samples):
    _header("weights: t -> <mu(e^{ts}x), s> nondecreasing")
    worst = 0.0
    grid = np.linspace(-3.0, 3.0, 100)
    for _ in range(samples):
        a = _random_action(rng)
        v = rng.standard_normal(a.dim_V) + 1j * rng.standard_normal(a.dim_V)
        x = point(a, v)
        s = a.group.random_hermitian(rng)
        vals = [weight_along_ray(a, s, x, t) for t in grid]
        for p, q in zip(vals, vals[1:]):
            if math.isfinite(p) and math.isfinite(q):
                worst = max(worst, (p - q) / max(1.0, abs(p)))
    return check(worst <= 1e-10, f"{samples} rays, 100-point grid (worst decrease {worst:.2e})")


# ── stability oracles ───────────────────────────────────────────────────────

def _random_torus(rng):
    rank = int(rng.integers(1, 4))
    n = int(rng.integers(1, 7))
    weights = [[int(c) for c in rng.integers(-2, 3, size=rank)] for _ in range(n)]
    tau = [int(c) for c in rng.integers(-1, 2, size=rank)] if rng.random() < 0.3 else None
    return weight_rep(weights, tau=tau, kind=LINEAR)


def suite_triple_oracle(rng, samples, solver_every):
    _header("stability: exact cone vs test set vs solver")
    disagree_ts, disagree_solver, certified = 0, 0, 0
    t0 = time.perf_counter()
    cache = {}
    for k in range(samples):
        a = _random_torus(rng)
        v = rng.standard_normal(a.dim_V) + 1j * rng.standard_normal(a.dim_V)
        # zero out a random subset of coordinates to reach every support pattern
        v = v * (rng.random(a.dim_V) < 0.7)
        exact = torus_classify(a, v)
        key = (a.weights, a.tau_exact)
        if key not in cache:
            cache[key] = torus_test_set(a)
        ts_stable = classify_by_test_set(a, v, cache[key])
        if ts_stable != exact.is_stable:
            disagree_ts += 1
        if k % solver_every == 0 and np.any(v):
            verdict = general_classify(a, point(a, v))
            if verdict.cls != 'Inconclusive':
                certified += 1
                if verdict.cls != exact.cls:
                    disagree_solver += 1
    elapsed = time.perf_counter() - t0
    ok = check(disagree_ts == 0, f"test set agrees with the exact cone on {samples} points ({disagree_ts} off)")
    ok &= check(disagree_solver == 0, f"solver agrees wherever it certifies ({certified} certified, {disagree_solver} off)")
    check(True, f"runtime {elapsed:.2f}s")
    return ok


def suite_solver_closed_forms():
    _header("continuity solver: closed forms")
    a = weight_rep([1, -1])
    out = solve_moment_zero(a, point(a, [2, 1]))
    ok = check(isinstance(out, PolystableCert), f"(2, 1) is polystable ({out.variant})")
    if isinstance(out, PolystableCert):
        err = float(np.linalg.norm(np.abs(out.x_star.vector) - math.sqrt(2.0)))
        ok &= check(err <= 1e-7, f"x_star = (sqrt 2, sqrt 2) up to phase (err {err:.2e})")
    out = solve_moment_zero(a, point(a, [1, 0]))
    ok &= check(isinstance(out, UnstableCert), f"(1, 0) gives a destabilising ray ({out.variant})")
    if isinstance(out, UnstableCert):
        ok &= check(abs(float(out.weight_at_sigma)) <= 1e-6,
                    f"boundary weight {float(out.weight_at_sigma):.2e}")
        err = float(np.linalg.norm(out.sigma - np.array([[-1.0]])))
        ok &= check(err <= 1e-6, f"sigma = -1 (err {err:.2e})")
    g = product(general_linear(1), general_linear(1))
    b = standard_rep(g, LINEAR, tau=np.diag([-1.0, -1.0]).astype(complex))
    verdict = general_classify(b, point(b, [1, 1]))
    ok &= check(verdict.cls == S_STABLE, f"GL(1) x GL(1) on C^2 with tau = -1 is stable ({verdict.cls})")
    quartic = symmetric_power_rep(4)
    t0 = time.perf_counter()
    verdict = general_classify(quartic, point(quartic, binary_form_vector([0, 1, 1, 0, 0])))
    ok &= check(verdict.cls == SEMISTABLE_NOT_POLYSTABLE,
                f"x^2 y (x + y) is semistable, not polystable ({verdict.cls}, "
                f"{time.perf_counter() - t0:.2f}s)")
    return ok


# ── vortex ──────────────────────────────────────────────────────────────────

def suite_vortex(quick):
    _header("vortex: threshold, mass identity, convergence")
    n = 64 if quick else 128
    p = VortexProblem(n, 1, gaussian_bump(n), 10.0)
    t_list = [10.0, 8.0, 7.0, 6.6, 6.4, 6.35, 6.3, 6.29, 6.285, 6.2832, 6.28, 6.2]
    t0 = time.perf_counter()
    rows = continuation_in_t(p, t_list)
    t_star, first_bad = scan_threshold(rows)
    ok = check(t_star is not None and 2 * math.pi <= t_star <= 2 * math.pi + 0.1,
               f"N={n} d=1: last solvable t = {t_star}, first insolvable {first_bad}")
    mass = max((out.mass_identity_error for _, out, _ in rows if out.solvable), default=0.0)
    ok &= check(mass <= 1e-8, f"mass identity error {mass:.2e} at every solution")
    p0 = VortexProblem(n, 0, gaussian_bump(n), 10.0)
    bad = [t for t, out, _ in continuation_in_t(p0, list(np.linspace(10.0, 0.1, 12))) if not out.solvable]
    ok &= check(not bad, f"d=0: solvable on t in [0.1, 10] ({len(bad)} failures)")
    check(True, f"runtime {time.perf_counter() - t0:.2f}s")
    if not quick:
        frame = grid_convergence([32, 64])
        ratio = float(frame['ratio'].iloc[-1])
        ok &= check(3.5 <= ratio <= 4.5, f"second-order convergence, ratio {ratio:.3f}")
    return ok


# ── pairs ───────────────────────────────────────────────────────────────────

def _hand_oriented(d1, d2, phi, d_phi):
    mu = Fraction(d1 + d2, 2)
    if any(phi):
        return STABLE if d_phi < mu else NOT_POLYSTABLE
    return POLYSTABLE_NOT_STABLE if d1 == d2 else NOT_POLYSTABLE


def suite_pairs():
    _header("split pairs: exhaustive grid")
    cases, off = 0, 0
    for d1, d2 in itertools.product(range(-3, 4), repeat=2):
        for phi in itertools.product((False, True), repeat=2):
            d_phis = [None] if not any(phi) else range(0, 4)
            for d_phi in d_phis:
                if d_phi is not None and d_phi > min(d for d, nz in zip((d1, d2), phi) if nz):
                    continue
                p = split_pair([d1, d2], phi, d_phi)
                cases += 1
                if oriented_pair_classify(p).cls != _hand_oriented(d1, d2, phi, d_phi or 0):
                    off += 1
    ok = check(off == 0, f"oriented classifier matches the slope rule on {cases} cases ({off} off)")
    q_cases, q_off = 0, 0
    for d1, d2 in itertools.product(range(-3, 4), repeat=2):
        for phi in itertools.product((False, True), repeat=2):
            for tau in (Fraction(-3), Fraction(-1, 2), Fraction(0), Fraction(5, 2)):
                p = split_pair([d1, d2], phi, tau=tau)
                got = quot_pair_classify(p).cls
                q_cases += 1
                if got != _hand_quot(d1, d2, phi, tau):
                    q_off += 1
    ok &= check(q_off == 0, f"quot classifier matches the hand rule on {q_cases} cases ({q_off} off)")
    return ok


def _hand_quot(d1, d2, phi, tau):
    """Rank-2 rule: quotient slopes above -tau for every subsheaf, kernel slopes below."""
    b = -tau
    if not Fraction(d1 + d2, 2) > b:                        # F = 0
        return NOT_POLYSTABLE
    for keep, quot in ((d1, d2), (d2, d1)):
        if not quot > b:                                    # F = O(keep), E/F = O(quot)
            return NOT_POLYSTABLE
    # twists O(d_i - k) have quotient degree d1 + d2 - d_i + k > b once the untwisted one is
    if not any(phi):
        if not Fraction(d1 + d2, 2) < b:
            return NOT_POLYSTABLE
    for d, nz in zip((d1, d2), phi):
        if not nz and not d < b:
            return NOT_POLYSTABLE
    return STABLE


# ── entry point ─────────────────────────────────────────────────────────────

def run_all(quick=False):
    rng = np.random.default_rng(SEED)
    scale = 10 if quick else 1
    print("=" * 60, file=sys.stderr)
    print("  SELFTEST" + ("  (quick)" if quick else ""), file=sys.stderr)
    print("=" * 60, file=sys.stderr)
    results = [
        suite_differential_inequalities(rng, 1000 // scale),
        suite_dexp_finite_difference(rng, 200 // scale),
        suite_matrix_functions(rng, 300 // scale),
        suite_equivariance(rng, 500 // scale),
        suite_monotonicity(rng, 500 // scale),
        suite_triple_oracle(rng, 2000 // scale, solver_every=20),
        suite_solver_closed_forms(),
        suite_vortex(quick),
        suite_pairs(),
    ]
    passed = sum(bool(r) for r in results)
    print(f"\n{passed}/{len(results)} suites passed", file=sys.stderr)
    return all(results)
