# solver.py
# Continuity method for moment-map zeros.
#
#   solve iμ(e^s x0) + ε s = 0 for s ∈ i𝔨_{x0}^⊥, continue ε -> 0
#
# x0 = e^{-s1} x with s1 = -iμ(x), so (ε = 1, s = s1) solves the equation exactly.
# A bounded path ends in a moment-map zero (PolystableCert); a path whose ‖s‖
# keeps growing gives a destabilising direction σ = s/‖s‖ (UnstableCert).
# Growth like log(1/ε) with ε‖s‖ -> 0 marks a semistable point that is not
# polystable; σ is then the slope of s against log(1/ε).
#
# All work happens in real coordinates z on an orthonormal basis Q of i𝔨_{x0}^⊥.

from dataclasses import dataclass, field
import math
import time

import numpy as np

import config
from actions import (apply_hermitian, from_coords, fundamental_field, maximal_weight,
                     moment_coords, moment_derivative_coords, moment_value, rho_star,
                     WeightValue)
from core.errors import ActionOverflow, SingularJacobian
from core.log import get_logger
from lie_core import dexp_factor, hermitian_basis, hermitian_type_vector, weyl_representative

log = get_logger('solver')

EXACT = 'exact'
FINITE_DIFFERENCE = 'fd'


# -- options and outcomes ------------------------------------------------------

def _cfg(name):
    return field(default_factory=lambda: getattr(config, name))


@dataclass(frozen=True)
class SolveOptions:
    eps_start: float = _cfg('EPS_START')
    eps_min: float = _cfg('EPS_MIN')
    newton_tol: float = _cfg('NEWTON_TOL')
    newton_max_iter: int = _cfg('NEWTON_MAX_ITER')
    step_shrink: float = _cfg('STEP_SHRINK')
    divergence_factor: float = _cfg('DIVERGENCE_FACTOR')
    jacobian_mode: str = _cfg('JACOBIAN_MODE')
    stab_tol: float = _cfg('STAB_TOL')
    max_continuation: int = _cfg('MAX_CONTINUATION')
    max_newton_total: int = _cfg('MAX_NEWTON_TOTAL')
    trace: bool = False

    def __post_init__(self):
        for name in ('eps_start', 'eps_min', 'newton_tol', 'newton_max_iter',
                     'divergence_factor', 'stab_tol', 'max_continuation', 'max_newton_total'):
            if not getattr(self, name) > 0:
                raise ValueError(f"SolveOptions.{name} must be positive")
        if not self.eps_min < self.eps_start:
            raise ValueError("SolveOptions.eps_min must be below eps_start")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("SolveOptions.step_shrink must lie in (0, 1)")
        if self.jacobian_mode not in (EXACT, FINITE_DIFFERENCE):
            raise ValueError(f"jacobian_mode must be '{EXACT}' or '{FINITE_DIFFERENCE}'")


@dataclass(frozen=True, eq=False)
class PolystableCert:
    s_final: np.ndarray
    x_star: object
    mu_residual: float
    path: list
    s1: np.ndarray = None
    x0: object = None
    trace: list = field(default_factory=list)

    variant = 'PolystableCert'


@dataclass(frozen=True, eq=False)
class UnstableCert:
    sigma: np.ndarray
    weight_at_sigma: WeightValue
    norm_history: list
    source: str = 'divergence'          # divergence | stalled | stabilizer
    moment_decay: float = None          # ε‖s‖ at the last continuation point
    sigma_weyl: np.ndarray = None
    x0: object = None
    trace: list = field(default_factory=list)

    variant = 'UnstableCert'

    @property
    def boundary(self):
        """|λ^σ| within BOUNDARY_WEIGHT_TOL: reported without claiming strictness."""
        w = self.weight_at_sigma
        return (not w.plus_inf) and abs(w.finite) <= config.BOUNDARY_WEIGHT_TOL


@dataclass(frozen=True, eq=False)
class Inconclusive:
    reason: str
    norm_history: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    variant = 'Inconclusive'


@dataclass(frozen=True, eq=False)
class PerturbedResidual:
    value: np.ndarray      # Hermitian matrix in i𝔨_{x0}^⊥
    coords: np.ndarray     # coordinates on the complement basis
    norm: float


# -- stabilizer ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StabilizerSplit:
    """i𝔨 = i𝔨_x ⊕ complement, as orthonormal coordinate columns."""
    complement: np.ndarray     # dim × r
    stabilizer: np.ndarray     # dim × (dim - r)
    singular_values: np.ndarray

    @property
    def trivial(self):
        return self.stabilizer.shape[1] == 0


def stabilizer_complement(a, x, stab_tol=None):
    """Null space of ξ ↦ ξ^#_x on i𝔨 (singular values ≤ stab_tol·max(1, σ_max))."""
    stab_tol = config.STAB_TOL if stab_tol is None else stab_tol
    basis = hermitian_basis(a.group)
    dim = len(basis)
    if dim == 0:
        empty = np.zeros((0, 0))
        return StabilizerSplit(empty, empty, np.zeros(0))
    cols = []
    for e in basis:
        w = fundamental_field(a, e, x)
        cols.append(np.concatenate([w.real, w.imag]))
    m = np.array(cols).T
    _, sv, vt = np.linalg.svd(m, full_matrices=True)
    thr = stab_tol * max(1.0, float(sv.max()) if sv.size else 0.0)
    rank = int(np.sum(sv > thr))
    v = vt.T
    return StabilizerSplit(complement=v[:, :rank], stabilizer=v[:, rank:], singular_values=sv)


def complement_basis(a, x, stab_tol=None):
    """h-orthonormal basis of i𝔨_x^⊥ as Hermitian matrices."""
    split = stabilizer_complement(a, x, stab_tol)
    return [from_coords(a, split.complement[:, j]) for j in range(split.complement.shape[1])]


# -- the perturbed equation ----------------------------------------------------

class _Equation:
    """l(ε, s) on the complement coordinates of one base point x0."""

    def __init__(self, a, x0, opts):
        self.a = a
        self.x0 = x0
        self.opts = opts
        self.split = stabilizer_complement(a, x0, opts.stab_tol)
        self.q = self.split.complement
        self.mu0 = moment_value(a, x0)

    @property
    def size(self):
        return self.q.shape[1]

    def s_of(self, z):
        return from_coords(self.a, self.q @ z) if self.size else np.zeros_like(self.mu0)

    def z_of(self, s):
        return self.q.T @ self.a.group.coords(s) if self.size else np.zeros(0)

    def point_at(self, z):
        return apply_hermitian(self.a, self.s_of(z), self.x0)

    def residual(self, eps, z):
        y = self.point_at(z)
        return self.q.T @ moment_coords(self.a, y) + eps * z

    def jacobian(self, eps, z, mode=None):
        mode = self.opts.jacobian_mode if mode is None else mode
        if self.size == 0:
            return np.zeros((0, 0))
        if mode == FINITE_DIFFERENCE:
            jac = self._jacobian_fd(eps, z)
        else:
            jac = self._jacobian_exact(eps, z)
        cond = np.linalg.cond(jac)
        if not math.isfinite(cond) or cond > config.COND_MAX:
            raise SingularJacobian(f"Jacobian condition number {cond:.3g} at eps={eps:.3g}")
        return jac

    def _jacobian_exact(self, eps, z):
        s = self.s_of(z)
        y = self.point_at(z)
        htv = hermitian_type_vector(0.5 * (s + s.conj().T))
        cols = []
        for b in range(self.size):
            sdot = from_coords(self.a, self.q[:, b])
            sigma = dexp_factor(htv, sdot).sigma
            w = rho_star(self.a, sigma) @ y.vector
            cols.append(self.q.T @ moment_derivative_coords(self.a, y, w))
        return np.array(cols).T + eps * np.eye(self.size)

    def _jacobian_fd(self, eps, z):
        h = config.FD_STEP * (1.0 + float(np.linalg.norm(z)))
        cols = []
        for b in range(self.size):
            dz = np.zeros(self.size)
            dz[b] = h
            cols.append((self.residual(eps, z + dz) - self.residual(eps, z - dz)) / (2.0 * h))
        return np.array(cols).T

    def newton(self, eps, z):
        """Damped Newton with Armijo backtracking. Returns (ok, z, iters, ‖r‖)."""
        opts = self.opts
        try:
            r = self.residual(eps, z)
        except ActionOverflow:
            return False, z, 0, math.inf
        rn = float(np.linalg.norm(r))
        for it in range(opts.newton_max_iter):
            if rn <= opts.newton_tol:
                return True, z, it, rn
            try:
                dz = np.linalg.solve(self.jacobian(eps, z), -r)
            except (SingularJacobian, np.linalg.LinAlgError):
                return False, z, it, rn
            t = 1.0
            for _ in range(config.ARMIJO_MAX_HALVINGS):
                try:
                    r_new = self.residual(eps, z + t * dz)
                    rn_new = float(np.linalg.norm(r_new))
                except ActionOverflow:
                    rn_new = math.inf
                if rn_new <= (1.0 - config.ARMIJO_C * t) * rn:
                    break
                t *= 0.5
            else:
                return False, z, it, rn
            z, r, rn = z + t * dz, r_new, rn_new
        return rn <= opts.newton_tol, z, opts.newton_max_iter, rn


# -- public operations ---------------------------------------------------------

def initialize(a, x):
    """s1 = -iμ(x), x0 = e^{-s1}x."""
    s1 = -moment_value(a, x)
    x0 = apply_hermitian(a, -s1, x)
    return x0, s1


def residual(a, x0, eps, s, opts=None):
    """l(ε, s) = proj_{i𝔨_{x0}^⊥} iμ(e^s x0) + ε s, with s projected on entry."""
    eq = _Equation(a, x0, opts or SolveOptions())
    z = eq.z_of(s)
    r = eq.residual(eps, z)
    return PerturbedResidual(value=eq.s_of(r), coords=r, norm=float(np.linalg.norm(r)))


@dataclass(frozen=True, eq=False)
class JacobianOperator:
    matrix: np.ndarray      # on complement coordinates
    basis: np.ndarray       # dim × r coordinate columns of the complement
    group: object

    def apply(self, sdot):
        """J(ṡ) for a Hermitian ṡ, returned as a Hermitian matrix."""
        z = self.basis.T @ self.group.coords(sdot)
        out = self.basis @ (self.matrix @ z)
        return sum((c * e for c, e in zip(out, hermitian_basis(self.group))),
                   np.zeros((self.group.ambient_dim,) * 2, dtype=complex))


def jacobian(a, x0, eps, s, opts=None, mode=None):
    """∂l/∂s at (ε, s) as an operator on i𝔨_{x0}^⊥. Raises SingularJacobian."""
    eq = _Equation(a, x0, opts or SolveOptions())
    jac = eq.jacobian(eps, eq.z_of(s), mode)
    return JacobianOperator(matrix=jac, basis=eq.q, group=a.group)


def _monotone(norms, window):
    if len(norms) < window + 1:
        return False
    tail = norms[-(window + 1):]
    return all(b > a for a, b in zip(tail, tail[1:]))


def _log_growth(history):
    """Indices (A, M, B) of a window where ‖s‖ grows like log(1/ε) and ε‖s‖ -> 0, else None.

    B is the last point; each half of the window spans at least LOG_GROWTH_SPAN in ε.
    Growth like 1/ε gives a late/early slope ratio near the span and is rejected.
    """
    b = len(history) - 1
    e_b, n_b = history[b]
    if b < 2 or not 0.0 < e_b <= config.LOG_GROWTH_EPS:
        return None
    m = next((i for i in range(b - 1, -1, -1)
              if history[i][0] >= config.LOG_GROWTH_SPAN * e_b), None)
    if m is None:
        return None
    e_m, n_m = history[m]
    a_ = next((i for i in range(m - 1, -1, -1)
               if history[i][0] >= config.LOG_GROWTH_SPAN * e_m), None)
    if a_ is None or history[a_][0] > config.LOG_GROWTH_EPS:
        return None
    e_a, n_a = history[a_]
    norms = [h[1] for h in history[a_:b + 1]]
    if not all(y > x for x, y in zip(norms, norms[1:])):
        return None
    slope1 = (n_m - n_a) / math.log(e_a / e_m)
    slope2 = (n_b - n_m) / math.log(e_m / e_b)
    lo, hi = config.LOG_GROWTH_RATIO
    if slope2 < config.LOG_GROWTH_MIN_SLOPE or not lo * slope1 <= slope2 <= hi * slope1:
        return None
    if e_b * n_b > 0.25 * e_a * n_a:
        return None
    return a_, m, b


def _log_direction(history, zs, window):
    """Least-squares slope of z against log(1/ε) over the window."""
    a_, _, b = window
    logs = np.array([-math.log(history[i][0]) for i in range(a_, b + 1)])
    design = np.column_stack([np.ones_like(logs), logs])
    coef, *_ = np.linalg.lstsq(design, np.array(zs[a_:b + 1]), rcond=None)
    return coef[1]


def _unstable(eq, z, history, source, trace, direction=None, drop_tol=None):
    d = z if direction is None else direction
    s = eq.s_of(d)
    nrm = float(np.linalg.norm(d))
    sigma = s / nrm
    sigma = 0.5 * (sigma + sigma.conj().T)
    weight = maximal_weight(eq.a, sigma, eq.x0, drop_tol=drop_tol, eig_tol=config.SIGMA_EIG_TOL)
    decay = history[-1][0] * float(np.linalg.norm(z)) if history else None
    log.debug(f"    unstable certificate ({source}): ‖s‖={float(np.linalg.norm(z)):.4g}  "
              f"weight={weight}")
    return UnstableCert(sigma=sigma, weight_at_sigma=weight, norm_history=history, source=source,
                        moment_decay=decay, sigma_weyl=weyl_representative(sigma), x0=eq.x0,
                        trace=trace)


def _predict(z, z_prev, eps, eps_prev, target):
    """Secant step in log ε from the last two path points."""
    if z_prev is None:
        return None
    return z + (z - z_prev) * (math.log(eps / target) / math.log(eps_prev / eps))


def solve_moment_zero(a, x, opts=None):
    """Run the continuity method from x. Returns PolystableCert, UnstableCert or Inconclusive."""
    opts = opts or SolveOptions()
    t_start = time.perf_counter()
    x0, s1 = initialize(a, x)
    eq = _Equation(a, x0, opts)
    trace = []
    mu_tol = 10.0 * opts.newton_tol

    # stabilizer directions are not moved by the continuation; a nonzero moment
    # component there is an obstruction on its own
    if eq.split.stabilizer.shape[1]:
        c = eq.split.stabilizer.T @ moment_coords(a, x0)
        if float(np.linalg.norm(c)) > opts.newton_tol:
            c_full = eq.split.stabilizer @ c
            sigma = -from_coords(a, c_full) / float(np.linalg.norm(c))
            weight = maximal_weight(a, sigma, x0, eig_tol=config.SIGMA_EIG_TOL)
            return UnstableCert(sigma=sigma, weight_at_sigma=weight, norm_history=[],
                                source='stabilizer', sigma_weyl=weyl_representative(sigma),
                                x0=x0, trace=trace)

    if eq.size == 0:
        mu_res = float(a.group.norm(moment_value(a, x0)))
        if mu_res > mu_tol:
            return Inconclusive(f"moment residual {mu_res:.3g} at a point with full stabilizer",
                                [], trace)
        return PolystableCert(s_final=np.zeros_like(s1), x_star=x0, mu_residual=mu_res,
                              path=[(opts.eps_start, 0.0)], s1=s1, x0=x0, trace=trace)

    mu0_norm = float(np.linalg.norm(eq.q.T @ moment_coords(a, x0)))
    bound_slack = 1.0 + 1e-6
    eps = opts.eps_start
    z = eq.z_of(s1)
    history = [(eps, float(np.linalg.norm(z)))]
    zs = [z]
    r1 = float(np.linalg.norm(eq.residual(eps, z)))
    if r1 > 1e-8 * (1.0 + mu0_norm):
        log.warning(f"WARN: l(1, s1) = {r1:.3g}, starting point is off the path")

    steps = 0
    newton_total = 0
    z_prev = eps_prev = None
    while eps > opts.eps_min:
        steps += 1
        if steps > opts.max_continuation:
            return Inconclusive("continuation step budget exhausted", history, trace)
        target = max(eps * opts.step_shrink, opts.eps_min)
        ok = False
        for _ in range(config.MAX_STEP_RETRIES):
            guess = _predict(z, z_prev, eps, eps_prev, target)
            for start in ([guess] if guess is not None else []) + [z]:
                ok, z_new, iters, rn = eq.newton(target, start)
                newton_total += iters
                if ok:
                    break
            if ok:
                break
            if newton_total > opts.max_newton_total:
                return Inconclusive("Newton work budget exhausted", history, trace)
            target = eps - 0.5 * (eps - target)
        else:
            return Inconclusive(f"Newton failed to converge below eps={eps:.3g}", history, trace)
        if newton_total > opts.max_newton_total:
            return Inconclusive("Newton work budget exhausted", history, trace)
        z_prev, eps_prev = z, eps
        eps, z = target, z_new
        s_norm = float(np.linalg.norm(z))
        history.append((eps, s_norm))
        zs.append(z)
        if opts.trace:
            trace.append({'eps': eps, 's_norm': s_norm, 'residual_norm': rn, 'newton_iters': iters})
        if s_norm > mu0_norm / eps * bound_slack + 1e-9:
            log.debug(f"    a priori bound exceeded at eps={eps:.3g}: ‖s‖={s_norm:.4g}")
        norms = [h[1] for h in history]
        if (s_norm > opts.divergence_factor * (1.0 + mu0_norm)
                and _monotone(norms, config.MONOTONE_WINDOW)):
            return _unstable(eq, z, history, 'divergence', trace)
        window = _log_growth(history)
        if window is not None:
            log.debug(f"    ‖s‖ grows like log(1/eps) below eps={history[window[0]][0]:.3g}")
            return _unstable(eq, z, history, 'stalled', trace,
                             direction=_log_direction(history, zs, window),
                             drop_tol=config.STALL_DROP_TOL)

    # polish at ε = 0; a bounded path must land on a zero close by
    ok, z_pol, iters, rn = eq.newton(0.0, z)
    step = float(np.linalg.norm(z_pol - z))
    if ok and step <= config.POLISH_STEP_TOL * (1.0 + float(np.linalg.norm(z))):
        x_star = eq.point_at(z_pol)
        mu_res = float(a.group.norm(moment_value(a, x_star)))
        history.append((0.0, float(np.linalg.norm(z_pol))))
        if opts.trace:
            trace.append({'eps': 0.0, 's_norm': history[-1][1], 'residual_norm': rn,
                          'newton_iters': iters})
        if mu_res > mu_tol * (1.0 + mu0_norm):
            return Inconclusive(f"moment residual {mu_res:.3g} at the polished point",
                                history, trace)
        log.debug(f"    polystable: ‖s‖={history[-1][1]:.6g}  residual={mu_res:.3g}  "
                  f"{time.perf_counter() - t_start:.3f}s")
        return PolystableCert(s_final=eq.s_of(z_pol), x_star=x_star, mu_residual=mu_res,
                              path=history, s1=s1, x0=x0, trace=trace)

    norms = [h[1] for h in history]
    if float(np.linalg.norm(z)) > 0 and _monotone(norms, config.MONOTONE_WINDOW):
        window = _log_growth(history)
        if window is None:
            return _unstable(eq, z, history, 'stalled', trace)
        return _unstable(eq, z, history, 'stalled', trace,
                         direction=_log_direction(history, zs, window),
                         drop_tol=config.STALL_DROP_TOL)
    return Inconclusive(f"no zero at eps=0 (polish step {step:.3g}) and ‖s‖ not growing",
                        history, trace)


def kempf_ness_functional(a, x0, s, nodes=32):
    """∫_0^1 ⟨iμ(e^{ts}x0), s⟩ dt by Gauss–Legendre quadrature."""
    s = np.asarray(s, dtype=complex)
    cs = a.group.coords(s)
    t, w = np.polynomial.legendre.leggauss(nodes)
    t, w = 0.5 * (t + 1.0), 0.5 * w
    total = 0.0
    for ti, wi in zip(t, w):
        y = apply_hermitian(a, ti * s, x0)
        total += wi * float(np.dot(moment_coords(a, y), cs))
    return total
