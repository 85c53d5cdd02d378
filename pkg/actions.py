# actions.py
# Linear and projective Hamiltonian actions: moment maps, fundamental vector fields,
# weights along rays and maximal weights.
#
# An action is stored by ρ_*(e_a) for the orthonormal Hermitian basis {e_a} of i𝔨,
# which is also a complex basis of 𝔤, so ρ_*(ξ) = Σ c_a ρ_*(e_a) for any ξ ∈ 𝔤.
#
# moment map conventions (see DESIGN.md):
#   linear      ⟨iμ_τ(v), ξ⟩ = ½ v*ρ_*(ξ)v + ⟨τ, ξ⟩_h
#   projective  ⟨iμ([v]), ξ⟩ = (1/2π) v*ρ_*(ξ)v / ‖v‖²

from dataclasses import dataclass
from functools import cached_property, total_ordering
from math import comb, pi, sqrt
import math

import numpy as np
import scipy.linalg
from scipy.special import logsumexp, softmax

import config
from core.errors import ActionOverflow, DivergentRay, InvalidAction, NonRationalWeights
from core.utils import to_fraction
from lie_core import (diagonal_torus, general_linear, hermitian_basis,
                      hermitian_type_vector, special_linear)

LINEAR = 'linear'
PROJECTIVE = 'projective'
TWO_PI = 2.0 * pi


# -- weight values -------------------------------------------------------------

@total_ordering
@dataclass(frozen=True)
class WeightValue:
    """Element of ℝ ∪ {+∞}; +∞ absorbs addition."""
    finite: float = 0.0
    plus_inf: bool = False

    @classmethod
    def infinity(cls):
        return cls(0.0, True)

    def _key(self):
        return (1, 0.0) if self.plus_inf else (0, self.finite)

    def __lt__(self, other):
        other = other if isinstance(other, WeightValue) else WeightValue(float(other))
        return self._key() < other._key()

    def __eq__(self, other):
        if not isinstance(other, WeightValue):
            if isinstance(other, (int, float)):
                other = WeightValue(float(other)) if math.isfinite(other) else WeightValue.infinity()
            else:
                return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        other = other if isinstance(other, WeightValue) else WeightValue(float(other))
        if self.plus_inf or other.plus_inf:
            return WeightValue.infinity()
        return WeightValue(self.finite + other.finite)

    __radd__ = __add__

    def __float__(self):
        return math.inf if self.plus_inf else float(self.finite)

    def __str__(self):
        return '+inf' if self.plus_inf else f'{self.finite:.12g}'


# -- descriptors ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ActionDescriptor:
    """A unitary representation ρ of G on V = ℂ^dim_V, acting linearly or on ℙ(V).

    rep[a] = ρ_*(e_a) for the orthonormal basis of i𝔨. `weights` is set for torus
    actions given by a weight list; entries are Fractions when they parse exactly.
    `tau` is the central parameter as a Hermitian matrix in i𝔷(𝔨); `tau_exact` keeps
    the covector form ⟨τ, ξ⟩_h = t·ξ for weight-list actions.
    """
    group: object
    kind: str
    rep: tuple
    dim_V: int
    tau: np.ndarray = None
    weights: tuple = None
    tau_exact: tuple = None
    label: str = ''

    @cached_property
    def rep_stack(self):
        if not self.rep:
            return np.zeros((0, self.dim_V, self.dim_V), dtype=complex)
        return np.array(self.rep, dtype=complex)

    @cached_property
    def basis_stack(self):
        return np.array(hermitian_basis(self.group), dtype=complex)

    @cached_property
    def tau_coords(self):
        if self.tau is None:
            return np.zeros(self.group.dim)
        return self.group.coords(self.tau)

    @property
    def is_linear(self):
        return self.kind == LINEAR

    @property
    def is_torus_weights(self):
        return self.weights is not None


def _check_action(group, kind, rep, dim_V, tau, tol):
    if kind not in (LINEAR, PROJECTIVE):
        raise InvalidAction(f"action kind must be 'linear' or 'projective', got {kind!r}")
    basis = hermitian_basis(group)
    if len(rep) != len(basis):
        raise InvalidAction(f"need {len(basis)} representation matrices for {group.label()}, got {len(rep)}")
    for idx, r in enumerate(rep):
        if r.shape != (dim_V, dim_V):
            raise InvalidAction(f"rep[{idx}] has shape {r.shape}, expected {(dim_V, dim_V)}")
        if np.linalg.norm(r - r.conj().T) > tol * max(1.0, np.linalg.norm(r)):
            raise InvalidAction(f"rep[{idx}] is not Hermitian: K must act unitarily")
    # Lie homomorphism on basis pairs: ρ_*([e_a, e_b]) = [ρ_*(e_a), ρ_*(e_b)]
    stack = np.array(rep, dtype=complex) if rep else None
    for a in range(len(basis)):
        for b in range(a + 1, len(basis)):
            br = basis[a] @ basis[b] - basis[b] @ basis[a]
            if np.linalg.norm(br) == 0.0:
                lhs = np.zeros((dim_V, dim_V))
            else:
                lhs = np.tensordot(group.complex_coords(br), stack, 1)
            rhs = rep[a] @ rep[b] - rep[b] @ rep[a]
            if np.linalg.norm(lhs - rhs) > tol * max(1.0, np.linalg.norm(rhs)):
                raise InvalidAction(f"bracket mismatch on basis pair ({a}, {b}): not a Lie-algebra homomorphism")
    if tau is not None:
        if kind == PROJECTIVE and np.linalg.norm(tau) > 0:
            raise InvalidAction("tau is only defined for linear actions")
        if not group.in_algebra(tau) or np.linalg.norm(tau - tau.conj().T) > tol * max(1.0, np.linalg.norm(tau)):
            raise InvalidAction("tau must be a Hermitian element of the Lie algebra")
        for e in basis:
            if np.linalg.norm(tau @ e - e @ tau) > tol * max(1.0, np.linalg.norm(tau)):
                raise InvalidAction("tau is not central")


def matrix_action(group, rep, kind=LINEAR, tau=None, label=''):
    """Action from explicit matrices ρ_*(e_a), checked at construction."""
    rep = tuple(np.asarray(r, dtype=complex) for r in rep)
    dim_V = rep[0].shape[0] if rep else 0
    tau = None if tau is None else np.asarray(tau, dtype=complex)
    _check_action(group, kind, rep, dim_V, tau, config.BRACKET_TOL)
    return ActionDescriptor(group=group, kind=kind, rep=rep, dim_V=dim_V, tau=tau, label=label)


def _parse_weight(x):
    try:
        return to_fraction(x)
    except NonRationalWeights:
        return float(x)


def weight_rep(weights, tau=None, kind=LINEAR, rank=None, pairing_scale=1.0, label=''):
    """Torus T^rank acting on ℂ^len(weights) with the given weight covectors.

    A weight may be a scalar for rank one. tau is a covector t with ⟨τ, ξ⟩_h = t·ξ.
    """
    rows = [tuple(w) if isinstance(w, (list, tuple)) else (w,) for w in weights]
    if rank is None:
        if not rows:
            raise InvalidAction("an empty weight list needs an explicit rank")
        rank = len(rows[0])
    if any(len(r) != rank for r in rows):
        raise InvalidAction(f"every weight covector must have length {rank}")
    exact = tuple(tuple(_parse_weight(x) for x in r) for r in rows)
    group = diagonal_torus(rank, pairing_scale)
    root = sqrt(pairing_scale)
    rep = []
    for k in range(rank):
        rep.append(np.diag([float(r[k]) / root for r in exact]).astype(complex))
    tau_exact, tau_mat = None, None
    if tau is not None:
        tvals = [tau] if not isinstance(tau, (list, tuple)) else list(tau)
        if len(tvals) != rank:
            raise InvalidAction(f"tau must have {rank} entries")
        tau_exact = tuple(_parse_weight(x) for x in tvals)
        tau_mat = np.diag([float(q) / pairing_scale for q in tau_exact]).astype(complex)
        if kind == PROJECTIVE and any(float(q) != 0 for q in tau_exact):
            raise InvalidAction("tau is only defined for linear actions")
    return ActionDescriptor(group=group, kind=kind, rep=tuple(rep), dim_V=len(rows),
                            tau=tau_mat, weights=exact, tau_exact=tau_exact, label=label)


def standard_rep(group, kind=LINEAR, tau=None, label=''):
    """G ⊂ GL(n) acting on ℂ^n by matrix multiplication."""
    return matrix_action(group, hermitian_basis(group), kind, tau, label or f'std {group.label()}')


def sym_power_matrix(x, d):
    """Sym^d of the 2×2 matrix x as a derivation, in the unitary basis √C(d,k) e1^{d-k} e2^k."""
    m = np.zeros((d + 1, d + 1), dtype=complex)
    for k in range(d + 1):
        m[k, k] = (d - k) * x[0, 0] + k * x[1, 1]
        if k + 1 <= d:
            m[k + 1, k] = (d - k) * x[1, 0]
        if k >= 1:
            m[k - 1, k] = k * x[0, 1]
    dd = np.array([sqrt(comb(d, k)) for k in range(d + 1)])
    return (m * dd[None, :]) / dd[:, None]


def symmetric_power_rep(d, group_kind='SL', kind=PROJECTIVE, tau=None):
    """SL(2) or GL(2) acting on binary forms of degree d."""
    if d < 1:
        raise InvalidAction("degree must be >= 1")
    group = special_linear(2) if group_kind == 'SL' else general_linear(2)
    rep = [sym_power_matrix(e, d) for e in hermitian_basis(group)]
    return matrix_action(group, rep, kind, tau, label=f'Sym^{d} {group.label()}')


def binary_form_vector(coeffs):
    """Coefficients a_k of x^{d-k} y^k as coordinates in the unitary monomial basis."""
    d = len(coeffs) - 1
    return np.array([complex(a) / sqrt(comb(d, k)) for k, a in enumerate(coeffs)])


# -- points --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointState:
    vector: np.ndarray
    projective: bool = False

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))


def point(a, v):
    """Validate v for the action; projective representatives are unit-normalised."""
    v = np.array(v, dtype=complex).reshape(-1)
    if v.shape[0] != a.dim_V:
        raise InvalidAction(f"point has {v.shape[0]} coordinates, the action needs {a.dim_V}")
    if not np.all(np.isfinite(v)):
        raise ActionOverflow("point has non-finite coordinates")
    if a.kind == PROJECTIVE:
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise InvalidAction("projective point must be nonzero")
        v = v / nrm
    v.setflags(write=False)
    return PointState(vector=v, projective=(a.kind == PROJECTIVE))


# -- representation maps -------------------------------------------------------

def rho_star(a, xi):
    """ρ_*(ξ) for any ξ ∈ 𝔤."""
    xi = np.asarray(xi, dtype=complex)
    if a.group.dim == 0:
        return np.zeros((a.dim_V, a.dim_V), dtype=complex)
    return np.tensordot(a.group.complex_coords(xi), a.rep_stack, 1)


def apply_group(a, s, x):
    """e^{ρ_*(s)}·x for s ∈ 𝔤, renormalised on ℙ(V)."""
    y = scipy.linalg.expm(rho_star(a, s)) @ x.vector
    if not np.all(np.isfinite(y)):
        raise ActionOverflow("group element overflowed on the point")
    return point(a, y)


def apply_hermitian(a, s, x):
    """e^{ρ_*(s)}·x for s ∈ i𝔨 through the eigendecomposition of ρ_*(s).

    Projective points are rescaled by the top exponent first, so only linear
    actions can overflow.
    """
    r = rho_star(a, s)
    w, vecs = np.linalg.eigh(0.5 * (r + r.conj().T))
    c = vecs.conj().T @ x.vector
    live = np.abs(c) > 0.0
    if a.kind == PROJECTIVE:
        shift = float(np.max(w[live])) if np.any(live) else 0.0
    else:
        shift = 0.0
        if np.any(live) and float(np.max(w[live])) > 700.0:
            raise ActionOverflow("e^s overflows on the point; the continuation has left the safe range")
    y = vecs @ (np.exp(np.minimum(w - shift, 700.0)) * c)
    return point(a, y)


def act_by_matrix(a, g, x):
    """Apply a representation-space matrix (e.g. ρ(k) for k ∈ K) to x."""
    return point(a, np.asarray(g) @ x.vector)


# -- moment maps ---------------------------------------------------------------

def _quadratic_coords(a, v):
    """Re v*ρ_*(e_a)v for every basis element."""
    if a.group.dim == 0:
        return np.zeros(0)
    return np.real(np.einsum('i,aij,j->a', v.conj(), a.rep_stack, v))


def moment_coords(a, x):
    """Coordinates of iμ(x) in the orthonormal basis of i𝔨."""
    v = x.vector
    q = _quadratic_coords(a, v)
    if a.kind == LINEAR:
        return 0.5 * q + a.tau_coords
    nrm2 = float(np.real(np.vdot(v, v)))
    return q / (TWO_PI * nrm2)


def from_coords(a, c):
    if a.group.dim == 0:
        return np.zeros((a.group.ambient_dim, a.group.ambient_dim), dtype=complex)
    return np.tensordot(np.asarray(c, dtype=complex), a.basis_stack, 1)


def moment_value(a, x):
    """iμ(x) ∈ i𝔨 as a Hermitian matrix."""
    return from_coords(a, moment_coords(a, x))


def moment_derivative_coords(a, x, w):
    """Directional derivative of iμ at x along a tangent vector w of V."""
    v = x.vector
    if a.group.dim == 0:
        return np.zeros(0)
    cross = np.real(np.einsum('i,aij,j->a', v.conj(), a.rep_stack, w))
    if a.kind == LINEAR:
        return cross
    nrm2 = float(np.real(np.vdot(v, v)))
    q = _quadratic_coords(a, v)
    return (2.0 * cross / nrm2 - 2.0 * q * float(np.real(np.vdot(v, w))) / nrm2 ** 2) / TWO_PI


def fundamental_field(a, u, x):
    """u^# at x: ρ_*(u)v, projected orthogonally to v on ℙ(V)."""
    v = x.vector
    w = rho_star(a, u) @ v
    if a.kind == PROJECTIVE:
        w = w - np.vdot(v, w) / np.vdot(v, v) * v
    return w


# -- weights -------------------------------------------------------------------

def _ray_data(a, xi, x):
    """Clustered eigenvalues of ρ_*(ξ) with the squared norms of v's components."""
    r = rho_star(a, xi)
    htv = hermitian_type_vector(0.5 * (r + r.conj().T))
    v = x.vector
    norms = np.array([float(np.real(np.vdot(p @ v, p @ v))) for p in htv.eigenprojections])
    return htv, np.asarray(htv.cluster_values), norms


def weight_along_ray(a, xi, x, t):
    """⟨iμ(e^{tξ}x), ξ⟩, evaluated on rescaled eigencomponents so large t cannot overflow."""
    xi = np.asarray(xi, dtype=complex)
    _, lam, norms = _ray_data(a, xi, x)
    keep = norms > 0.0
    lam, norms = lam[keep], norms[keep]
    if a.kind == LINEAR:
        base = a.group.pairing(a.tau, xi) if a.tau is not None else 0.0
        if lam.size == 0:
            return base
        logs = 2.0 * t * lam + np.log(norms)
        with np.errstate(divide='ignore'):
            lse, sign = logsumexp(logs, b=lam, return_sign=True)
        if sign == 0:
            return base
        if lse > 700.0:
            return math.copysign(math.inf, sign)
        return base + 0.5 * float(sign) * math.exp(lse)
    if lam.size == 0:
        return 0.0
    p = softmax(2.0 * t * lam + np.log(norms))
    return float(np.dot(p, lam)) / TWO_PI


def maximal_weight(a, xi, x, drop_tol=None, eig_tol=None):
    """λ^ξ(x) ∈ ℝ ∪ {+∞}.

    Linear: +∞ if v has a nonzero component on a positive eigenvalue of ρ_*(ξ),
    else ⟨τ, ξ⟩_h. Projective: (1/2π)·the largest eigenvalue carrying a nonzero
    component. "Nonzero" means norm above drop_tol·‖v‖; eigenvalues at most
    eig_tol (default: the clustering tolerance) count as zero.
    """
    drop_tol = config.DROP_TOL if drop_tol is None else drop_tol
    xi = np.asarray(xi, dtype=complex)
    htv, lam, norms = _ray_data(a, xi, x)
    eig_tol = htv.cluster_tol if eig_tol is None else max(eig_tol, htv.cluster_tol)
    vnorm = x.norm
    present = np.sqrt(norms) > drop_tol * vnorm if vnorm > 0 else np.zeros(len(lam), dtype=bool)
    if a.kind == LINEAR:
        if np.any(present & (lam > eig_tol)):
            return WeightValue.infinity()
        return WeightValue(a.group.pairing(a.tau, xi) if a.tau is not None else 0.0)
    if not np.any(present):
        return WeightValue(0.0)
    top = float(np.max(lam[present]))
    if abs(top) <= eig_tol:
        top = 0.0
    return WeightValue(top / TWO_PI)


def weight_limit_consistency(a, xi, x):
    """|weight_along_ray(t_big) - maximal_weight| with t_big = RAY_T_SCALE / min gap."""
    mw = maximal_weight(a, xi, x)
    if mw.plus_inf:
        raise DivergentRay("maximal weight is +inf; the ray has no finite limit")
    _, lam, _ = _ray_data(a, xi, x)
    gaps = np.diff(np.sort(lam))
    gaps = gaps[gaps > 0]
    t_big = config.RAY_T_SCALE / float(gaps.min()) if gaps.size else config.RAY_T_SCALE
    return abs(weight_along_ray(a, xi, x, t_big) - mw.finite)


def hilbert_weight_sign(a, xi, x, tol=None):
    """Sign of λ^ξ(x): +1 (including +∞), 0 within tol, -1."""
    tol = config.BOUNDARY_WEIGHT_TOL if tol is None else tol
    mw = maximal_weight(a, xi, x)
    if mw.plus_inf or mw.finite > tol:
        return 1
    return -1 if mw.finite < -tol else 0
