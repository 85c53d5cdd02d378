# vortex.py
# Rank-one Hermitian–Einstein (abelian vortex) equation on the flat unit torus.
#
#   G(u) = Δu - ½ m e^{2u} + (t - 2πd) = 0,   h = h0 e^{2u}
#
# Δ is the 5-point periodic Laplacian (rows sum to zero), so summing G over the
# grid gives the discrete Chern–Weil identity ½ Σ m e^{2u} hc² = t - 2πd.
# No solution exists for t ≤ 2πd; the Newton iteration then drives u to -∞.

from dataclasses import dataclass
import math
import time

import numpy as np
import pandas as pd
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

import config
from core.errors import InvalidVortexProblem, LinearSolveFailure
from core.log import get_logger

log = get_logger('vortex')


@dataclass(frozen=True, eq=False)
class VortexProblem:
    grid_n: int
    degree: int
    phi0_sq: np.ndarray     # m = |φ|²_{h0} on the N×N grid
    t_param: float

    def __post_init__(self):
        m = np.asarray(self.phi0_sq, dtype=float)
        if self.grid_n < 3:
            raise InvalidVortexProblem("grid_n must be at least 3")
        if m.shape != (self.grid_n, self.grid_n):
            raise InvalidVortexProblem(f"phi0_sq must be {self.grid_n}x{self.grid_n}, got {m.shape}")
        if self.degree < 0:
            raise InvalidVortexProblem("degree must be >= 0")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise InvalidVortexProblem("phi0_sq must be finite and nonnegative")
        if m.max() <= 0:
            raise InvalidVortexProblem("phi0_sq vanishes identically (φ = 0)")
        m.setflags(write=False)
        object.__setattr__(self, 'phi0_sq', m)

    @property
    def hc(self):
        return 1.0 / self.grid_n

    @property
    def background(self):
        """c0 = 2πd, the integrated background curvature per unit volume."""
        return 2.0 * math.pi * self.degree

    def with_t(self, t):
        return VortexProblem(self.grid_n, self.degree, self.phi0_sq, float(t))

    def scaled(self, factor):
        return VortexProblem(self.grid_n, self.degree, self.phi0_sq * factor, self.t_param)


@dataclass(frozen=True, eq=False)
class VortexSolution:
    u: np.ndarray
    residual_inf: float
    mass_identity_error: float
    newton_iters: int
    elapsed_s: float = 0.0

    solvable = True

    @property
    def min_u(self):
        return float(self.u.min())


@dataclass(frozen=True, eq=False)
class Insolvable:
    reason: str
    min_u: float
    newton_iters: int
    mass_gap: float         # t - 2πd; ≤ 0 means ½ Σ m e^{2u} hc² = t - 2πd has no solution
    residual_inf: float = math.nan

    solvable = False


# -- discretisation ------------------------------------------------------------

def laplacian_apply(u, hc):
    """(u_{i+1,j} + u_{i-1,j} + u_{i,j+1} + u_{i,j-1} - 4u_{ij}) / hc², periodic."""
    return (np.roll(u, 1, 0) + np.roll(u, -1, 0) + np.roll(u, 1, 1) + np.roll(u, -1, 1)
            - 4.0 * u) / (hc * hc)


def laplacian_matrix(n):
    """Sparse periodic 5-point Laplacian on row-major flattened N×N fields."""
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    d1 = sp.diags([off, main, off], [-1, 0, 1], format='lil')
    d1[0, n - 1] += 1.0
    d1[n - 1, 0] += 1.0
    d1 = d1.tocsr()
    eye = sp.identity(n, format='csr')
    return (sp.kron(eye, d1) + sp.kron(d1, eye)).tocsr() * float(n * n)


def assemble_equation(p, u):
    """Residual field G(u)."""
    u = np.asarray(u, dtype=float)
    return (laplacian_apply(u, p.hc) - 0.5 * p.phi0_sq * np.exp(2.0 * u)
            + (p.t_param - p.background))


def mass_identity_error(p, u):
    total = 0.5 * float(np.sum(p.phi0_sq * np.exp(2.0 * u))) * p.hc ** 2
    return abs(total - (p.t_param - p.background))


def _fft_preconditioner(n, shift):
    """Inverse of (-Δ + shift) diagonalised by the 2-D FFT."""
    k = np.arange(n)
    lam1 = 4.0 * np.sin(np.pi * k / n) ** 2 * n * n
    symbol = lam1[:, None] + lam1[None, :] + shift

    def solve(r):
        r = np.asarray(r).reshape(n, n)
        return np.real(scipy.fft.ifft2(scipy.fft.fft2(r) / symbol)).ravel()

    return spla.LinearOperator((n * n, n * n), matvec=solve, dtype=float)


def _newton_direction(p, u, g, lap):
    """Solve (Δ - diag(m e^{2u})) du = -g through the SPD system with the opposite sign."""
    n = p.grid_n
    w = (p.phi0_sq * np.exp(2.0 * u)).ravel()
    neg_jac = (-lap + sp.diags(w)).tocsc()
    rhs = g.ravel()
    if n <= config.VORTEX_DIRECT_MAX_N:
        du = spla.spsolve(neg_jac, rhs)
    else:
        shift = max(float(w.mean()), 1e-300)
        du, info = spla.cg(neg_jac, rhs, rtol=config.VORTEX_CG_RTOL, atol=0.0,
                           maxiter=10 * n * n, M=_fft_preconditioner(n, shift))
        if info != 0:
            raise LinearSolveFailure(f"CG did not converge (info={info}) on an SPD system")
    if not np.all(np.isfinite(du)):
        raise LinearSolveFailure("vortex Newton direction is not finite")
    return du.reshape(n, n)


def initial_guess(p):
    """Constant û with ½ mean(m) e^{2û} = max(t - c0, δ)."""
    gap = max(p.t_param - p.background, config.VORTEX_DELTA)
    u_hat = 0.5 * math.log(2.0 * gap / float(p.phi0_sq.mean()))
    return np.full((p.grid_n, p.grid_n), u_hat)


def solve_vortex(p, tol=None, max_iter=None, u0=None):
    """Damped Newton with Armijo backtracking on ‖G‖₂.

    Returns VortexSolution, or Insolvable when min u falls below VORTEX_U_FLOOR,
    the line search stalls, or the iteration budget runs out.
    """
    tol = config.VORTEX_TOL if tol is None else tol
    max_iter = config.VORTEX_MAX_ITER if max_iter is None else max_iter
    t0 = time.perf_counter()
    lap = laplacian_matrix(p.grid_n)
    u = initial_guess(p) if u0 is None else np.array(u0, dtype=float)
    gap = p.t_param - p.background
    g = assemble_equation(p, u)
    gn = float(np.linalg.norm(g))
    for it in range(max_iter + 1):
        res_inf = float(np.max(np.abs(g)))
        if res_inf <= tol:
            err = mass_identity_error(p, u)
            log.debug(f"    vortex t={p.t_param:.6g}: converged in {it} iterations, "
                      f"residual {res_inf:.3g}, mass error {err:.3g}")
            return VortexSolution(u=u, residual_inf=res_inf, mass_identity_error=err,
                                  newton_iters=it, elapsed_s=time.perf_counter() - t0)
        if float(u.min()) < config.VORTEX_U_FLOOR:
            return Insolvable(f"min u below {config.VORTEX_U_FLOOR:g}: e^(2u) underflows",
                              float(u.min()), it, gap, res_inf)
        if it == max_iter:
            break
        du = _newton_direction(p, u, g, lap)
        step = 1.0
        for _ in range(config.ARMIJO_MAX_HALVINGS):
            u_try = u + step * du
            with np.errstate(over='ignore'):
                g_try = assemble_equation(p, u_try)
            gn_try = float(np.linalg.norm(g_try))
            if math.isfinite(gn_try) and gn_try <= (1.0 - config.ARMIJO_C * step) * gn:
                break
            step *= 0.5
        else:
            return Insolvable("line search stalled", float(u.min()), it, gap, res_inf)
        u, g, gn = u_try, g_try, gn_try
    return Insolvable("iteration budget exhausted", float(u.min()), max_iter, gap,
                      float(np.max(np.abs(g))))


# -- threshold scans -----------------------------------------------------------

def continuation_in_t(p, t_list, tol=None, max_iter=None):
    """Warm-started solves over descending t. Rows are (t, outcome, min_u)."""
    t_list = [float(t) for t in t_list]
    if any(b > a for a, b in zip(t_list, t_list[1:])):
        raise ValueError("t_list must be sorted descending")
    rows, warm = [], None
    for t in t_list:
        out = solve_vortex(p.with_t(t), tol, max_iter, u0=warm)
        if out.solvable:
            warm = out.u
        log.debug(f"    t={t:.6g}  {'solved' if out.solvable else 'Insolvable'}  min u={out.min_u:.4g}")
        rows.append((t, out, out.min_u))
    return rows


def scan_threshold(rows):
    """(t*, first insolvable t): t* is the last solvable t before the first Insolvable."""
    t_star, first_bad = None, None
    for t, out, _ in rows:
        if out.solvable:
            t_star = t
        else:
            first_bad = t
            break
    return t_star, first_bad


def scan_frame(rows):
    return pd.DataFrame(
        [{'t': t, 'solvable': out.solvable, 'min_u': mu,
          'residual_inf': out.residual_inf,
          'mass_identity_error': getattr(out, 'mass_identity_error', math.nan),
          'newton_iters': out.newton_iters} for t, out, mu in rows],
        columns=['t', 'solvable', 'min_u', 'residual_inf', 'mass_identity_error', 'newton_iters'])


# -- densities and diagnostics -------------------------------------------------

def grid_points(n):
    x = np.arange(n) / n
    return np.meshgrid(x, x, indexing='ij')


def gaussian_bump(n, mass=2.0, center=(0.5, 0.5), width=0.1):
    """Periodic Gaussian normalised to Σ m hc² = mass."""
    xx, yy = grid_points(n)
    dx = (xx - center[0] + 0.5) % 1.0 - 0.5
    dy = (yy - center[1] + 0.5) % 1.0 - 0.5
    m = np.exp(-(dx * dx + dy * dy) / (2.0 * width * width))
    return m * mass / (float(m.sum()) / (n * n))


def manufactured_density(n, mass=2.0):
    """Smooth positive periodic density with exact mean mass (no discrete renormalisation)."""
    xx, yy = grid_points(n)
    return mass * (1.0 + 0.5 * np.sin(2.0 * np.pi * xx) * np.cos(2.0 * np.pi * yy))


def random_density(n, mass=2.0, seed=None, modes=3):
    """Positive periodic density from random low Fourier modes, mean exactly mass.

    Modes stay below n so every nonconstant term sums to zero on the grid.
    """
    rng = np.random.default_rng(seed)
    modes = min(modes, n - 1)
    xx, yy = grid_points(n)
    f = np.zeros((n, n))
    total = 0.0
    for kx in range(-modes, modes + 1):
        for ky in range(0, modes + 1):
            if ky == 0 and kx <= 0:
                continue
            c, s = rng.standard_normal(2)
            phase = 2.0 * np.pi * (kx * xx + ky * yy)
            f += c * np.cos(phase) + s * np.sin(phase)
            total += abs(c) + abs(s)
    # |f| <= 1/2 keeps the density positive
    return mass * (1.0 + 0.5 * f / total)


def field_frame(p, solution):
    """Long-format DataFrame of (i, j, x, y, m, u) for CSV dumps."""
    n = p.grid_n
    xx, yy = grid_points(n)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing='ij')
    return pd.DataFrame({
        'i': ii.ravel(), 'j': jj.ravel(), 'x': xx.ravel(), 'y': yy.ravel(),
        'm': p.phi0_sq.ravel(), 'u': solution.u.ravel(),
    })


def grid_convergence(n_list, degree=1, t_param=10.0, density=manufactured_density, tol=None):
    """‖u_N - u_2N‖_∞ on the coarse points for each N, with successive ratios."""
    cache = {}

    def solve_at(n):
        if n not in cache:
            p = VortexProblem(n, degree, density(n), t_param)
            out = solve_vortex(p, tol)
            if not out.solvable:
                raise LinearSolveFailure(f"grid-convergence solve failed at N={n}: {out.reason}")
            cache[n] = out.u
        return cache[n]

    rows = []
    for n in n_list:
        diff = float(np.max(np.abs(solve_at(n) - solve_at(2 * n)[::2, ::2])))
        rows.append({'N': n, 'diff_inf': diff})
    frame = pd.DataFrame(rows, columns=['N', 'diff_inf'])
    frame['ratio'] = frame['diff_inf'].shift(1) / frame['diff_inf']
    return frame
