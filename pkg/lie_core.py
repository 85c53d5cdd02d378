# lie_core.py
# matrix Lie-theoretic substrate: groups, Hermitian-type vectors, ad-spectral data,
# parabolic subalgebras, spectral calculus and the differential of exp.
#
# conventions:
#   every element of H(G) is stored by its Hermitian representative in i𝔨
#   the pairing is h(a, b) = scale * Re tr(a b*), summed block by block for products
#   eigenvalues are sorted descending; clusters merge values within cluster_tol

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
import math

import numpy as np
import scipy.linalg

import config
from core.errors import NotInAlgebra, NotHermitianType


# -- groups --------------------------------------------------------------------

@dataclass(frozen=True)
class GroupDescriptor:
    """A matrix reductive group: GL(n), SL(n), the diagonal torus, or a block product.

    kind is one of 'GL', 'SL', 'T', 'product'. For products `factors` holds the
    blocks in order and `n` is ignored.
    """
    kind: str
    n: int = 0
    pairing_scale: float = 1.0
    factors: tuple = ()

    def __post_init__(self):
        if self.kind not in ('GL', 'SL', 'T', 'product'):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.pairing_scale <= 0:
            raise ValueError("pairing_scale must be positive")
        if self.kind == 'product' and not self.factors:
            raise ValueError("product group needs at least one factor")
        if self.kind != 'product' and self.n < 1:
            raise ValueError("matrix size must be >= 1")

    @property
    def ambient_dim(self):
        if self.kind == 'product':
            return sum(f.ambient_dim for f in self.factors)
        return self.n

    @property
    def dim(self):
        """Real dimension of i𝔨 (= complex dimension of 𝔤)."""
        return len(hermitian_basis(self))

    @property
    def is_torus(self):
        if self.kind == 'product':
            return all(f.is_torus for f in self.factors)
        return self.kind == 'T' or (self.kind == 'GL' and self.n == 1)

    def blocks(self):
        """Flattened list of (offset, size, simple_factor)."""
        if self.kind != 'product':
            return [(0, self.n, self)]
        out, off = [], 0
        for f in self.factors:
            for o, size, simple in f.blocks():
                out.append((off + o, size, simple))
            off += f.ambient_dim
        return out

    def label(self):
        if self.kind == 'product':
            return ' x '.join(f.label() for f in self.factors)
        return {'GL': 'GL', 'SL': 'SL', 'T': 'T'}[self.kind] + f'({self.n})'

    # -- pairings and coordinates --

    def pairing(self, a, b):
        """h(a, b) = sum over blocks of scale * Re tr(a_blk b_blk*)."""
        total = 0.0
        for off, size, simple in self.blocks():
            sl = slice(off, off + size)
            total += simple.pairing_scale * float(np.real(np.vdot(b[sl, sl], a[sl, sl])))
        return total

    def complex_pairing(self, a, b):
        """Hermitian pairing scale * tr(a b*), blockwise."""
        total = 0j
        for off, size, simple in self.blocks():
            sl = slice(off, off + size)
            total += simple.pairing_scale * np.vdot(b[sl, sl], a[sl, sl])
        return complex(total)

    def norm(self, a):
        return math.sqrt(max(self.pairing(a, a), 0.0))

    def coords(self, m):
        """Real coordinates of the i𝔨-projection of m in the orthonormal basis."""
        return np.array([self.pairing(m, e) for e in hermitian_basis(self)])

    def complex_coords(self, a):
        """Complex coordinates of a ∈ 𝔤 in the same basis (a = Σ c_a e_a)."""
        return np.array([self.complex_pairing(a, e) for e in hermitian_basis(self)])

    def from_coords(self, c):
        basis = hermitian_basis(self)
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        for coef, e in zip(c, basis):
            out = out + coef * e
        return out

    def project_ik(self, m):
        """Orthogonal projection of any matrix onto i𝔨."""
        return self.from_coords(self.coords(m))

    def in_algebra(self, m, tol=None):
        tol = config.HERMITIAN_TOL if tol is None else tol
        m = np.asarray(m)
        n = self.ambient_dim
        if m.shape != (n, n):
            return False
        scale = tol * max(1.0, np.linalg.norm(m))
        mask = np.zeros((n, n), dtype=bool)
        for off, size, simple in self.blocks():
            blk = m[off:off + size, off:off + size]
            if simple.kind == 'SL' and abs(np.trace(blk)) > scale:
                return False
            if simple.kind == 'T' and np.linalg.norm(blk - np.diag(np.diag(blk))) > scale:
                return False
            mask[off:off + size, off:off + size] = True
        return np.linalg.norm(m[~mask]) <= scale

    # -- sampling helpers used by tests and the selftest --

    def random_hermitian(self, rng, scale=1.0):
        return self.from_coords(scale * rng.standard_normal(self.dim))

    def random_unitary(self, rng):
        """e^{iH} for random H ∈ i𝔨, an element of K."""
        return scipy.linalg.expm(1j * self.random_hermitian(rng))

    def identity(self):
        return np.eye(self.ambient_dim, dtype=complex)


def general_linear(n, pairing_scale=1.0):
    return GroupDescriptor('GL', n, pairing_scale)


def special_linear(n, pairing_scale=1.0):
    return GroupDescriptor('SL', n, pairing_scale)


def diagonal_torus(n, pairing_scale=1.0):
    return GroupDescriptor('T', n, pairing_scale)


def product(*factors):
    return GroupDescriptor('product', 0, 1.0, tuple(factors))


def _simple_basis(kind, n):
    """Unnormalised-by-scale orthonormal Hermitian basis of i𝔨 for a simple factor."""
    basis = []
    if kind == 'T':
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[k, k] = 1.0
            basis.append(e)
        return basis
    if kind == 'GL':
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[k, k] = 1.0
            basis.append(e)
    else:
        # traceless diagonal: normalised Helmert vectors
        for k in range(1, n):
            d = np.zeros(n)
            d[:k] = 1.0
            d[k] = -k
            basis.append(np.diag(d / np.linalg.norm(d)).astype(complex))
    r2 = math.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = e[k, j] = 1.0 / r2
            basis.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[j, k] = 1j / r2
            f[k, j] = -1j / r2
            basis.append(f)
    return basis


@lru_cache(maxsize=64)
def _basis_cached(group):
    n = group.ambient_dim
    out = []
    for off, size, simple in group.blocks():
        for e in _simple_basis(simple.kind, size):
            full = np.zeros((n, n), dtype=complex)
            full[off:off + size, off:off + size] = e / math.sqrt(simple.pairing_scale)
            full.setflags(write=False)
            out.append(full)
    return tuple(out)


def hermitian_basis(group):
    """h-orthonormal basis of i𝔨 (it is also a complex basis of 𝔤)."""
    return _basis_cached(group)


# -- Hermitian-type vectors ----------------------------------------------------

def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def default_cluster_tol(eigenvalues):
    radius = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return config.CLUSTER_REL_TOL * (1.0 + radius)


def _cluster_descending(values, tol):
    """Group a descending sequence into runs whose neighbours differ by <= tol."""
    groups = []
    for idx, v in enumerate(values):
        if groups and values[groups[-1][-1]] - v <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


@dataclass(frozen=True, eq=False)
class HermitianTypeVector:
    """ξ ∈ H(G) by its Hermitian representative, with cached spectral data."""
    matrix: np.ndarray
    eigenvalues: np.ndarray        # raw spectrum, descending, with multiplicity
    cluster_values: np.ndarray     # one mean value per cluster, descending
    multiplicities: tuple
    eigenprojections: tuple        # orthogonal projection per cluster
    cluster_tol: float

    @cached_property
    def ad(self):
        return AdSpectralData.build(self)

    @property
    def n(self):
        return self.matrix.shape[0]

    def reconstruct(self):
        return sum(lam * p for lam, p in zip(self.cluster_values, self.eigenprojections))


def hermitian_type_vector(m, cluster_tol=None):
    """Build ξ from a Hermitian matrix. Raises NotHermitianType for non-Hermitian input."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianType(f"need a square matrix, got shape {m.shape}")
    if np.linalg.norm(m - m.conj().T) > config.HERMITIAN_TOL * max(1.0, np.linalg.norm(m)):
        raise NotHermitianType("matrix is not Hermitian; conjugate to a Hermitian representative first")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    w, v = w[::-1], v[:, ::-1]
    tol = default_cluster_tol(w) if cluster_tol is None else cluster_tol
    groups = _cluster_descending(w, tol)
    values, mults, projs = [], [], []
    for g in groups:
        vecs = v[:, g]
        values.append(float(np.mean(w[g])))
        mults.append(len(g))
        projs.append(_frozen(vecs @ vecs.conj().T))
    return HermitianTypeVector(
        matrix=_frozen(h),
        eigenvalues=_frozen(w),
        cluster_values=_frozen(values),
        multiplicities=tuple(mults),
        eigenprojections=tuple(projs),
        cluster_tol=tol,
    )


def _as_htv(xi):
    return xi if isinstance(xi, HermitianTypeVector) else hermitian_type_vector(xi)


# -- ad-spectral data ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdSpectralData:
    """Spectral decomposition of [ξ, ·] on gl(n).

    P_λ(A) = Σ_{λi-λj=λ} P_i A P_j; the ad-eigenvalues are clustered differences.
    """
    base: HermitianTypeVector
    ad_eigenvalues: np.ndarray
    pairs: tuple                 # per ad-eigenvalue: tuple of (i, j) cluster pairs
    zero_index: int              # index of the cluster containing the diagonal pairs

    @classmethod
    def build(cls, xi):
        vals = xi.cluster_values
        k = len(vals)
        diffs = sorted(((vals[i] - vals[j], i, j) for i in range(k) for j in range(k)),
                       key=lambda t: -t[0])
        tol = config.AD_CLUSTER_MULT * xi.cluster_tol
        groups = _cluster_descending([d for d, _, _ in diffs], tol)
        ad_vals, pairs, zero_index = [], [], -1
        for gi, g in enumerate(groups):
            members = tuple((diffs[t][1], diffs[t][2]) for t in g)
            if any(i == j for i, j in members):
                zero_index = gi
                ad_vals.append(0.0)
            else:
                ad_vals.append(float(np.mean([diffs[t][0] for t in g])))
            pairs.append(members)
        return cls(base=xi, ad_eigenvalues=_frozen(ad_vals), pairs=tuple(pairs),
                   zero_index=zero_index)

    def component(self, idx, a):
        """P_λ(a) for the idx-th ad-eigenvalue."""
        p = self.base.eigenprojections
        out = np.zeros_like(a, dtype=complex)
        for i, j in self.pairs[idx]:
            out = out + p[i] @ a @ p[j]
        return out

    def components(self, a):
        return [(lam, self.component(idx, a)) for idx, lam in enumerate(self.ad_eigenvalues)]

    def apply(self, f, a):
        """f([ξ,·])(a) = Σ f(λ) P_λ(a)."""
        out = np.zeros_like(a, dtype=complex)
        for lam, comp in self.components(a):
            out = out + f(lam) * comp
        return out

    def signed_part(self, a, sign):
        """Sum of the components with ad-eigenvalue of the given sign (-1, 0, +1)."""
        out = np.zeros_like(a, dtype=complex)
        for idx, lam in enumerate(self.ad_eigenvalues):
            s = 0 if idx == self.zero_index else (1 if lam > 0 else -1)
            if s == sign:
                out = out + self.component(idx, a)
        return out


@dataclass(frozen=True, eq=False)
class ParabolicData:
    """𝔲(ξ), 𝔷(ξ), 𝔤(ξ) = 𝔷(ξ) ⊕ 𝔲(ξ) as orthonormal bases inside 𝔤."""
    ad: AdSpectralData
    u_basis: tuple
    z_basis: tuple
    p_basis: tuple


def _range_basis(group, linear_map):
    """Orthonormal basis (complex pairing) of the range of an orthogonal projector on 𝔤."""
    basis = hermitian_basis(group)
    cols = [group.complex_coords(linear_map(e)) for e in basis]
    proj = np.array(cols).T
    proj = 0.5 * (proj + proj.conj().T)
    w, v = np.linalg.eigh(proj)
    out = []
    for idx in np.argsort(-w):
        if w[idx] < 0.5:
            break
        out.append(_frozen(group.from_coords(v[:, idx])))
    return tuple(out)


def parabolic_data(xi, group):
    xi = _as_htv(xi)
    ad = xi.ad
    u = _range_basis(group, lambda a: ad.signed_part(a, -1))
    z = _range_basis(group, lambda a: ad.signed_part(a, 0))
    p = _range_basis(group, lambda a: ad.signed_part(a, -1) + ad.signed_part(a, 0))
    return ParabolicData(ad=ad, u_basis=u, z_basis=z, p_basis=p)


# -- checks --------------------------------------------------------------------

def hermitian_type_check(m, group, tol=None):
    """True iff m ∈ 𝔤 is Hermitian (the canonical representative convention)."""
    tol = config.HERMITIAN_TOL if tol is None else tol
    m = np.asarray(m, dtype=complex)
    if not group.in_algebra(m, tol=max(tol, config.HERMITIAN_TOL)):
        raise NotInAlgebra(f"matrix is not in the Lie algebra of {group.label()}")
    scale = np.linalg.norm(m)
    return bool(np.linalg.norm(m - m.conj().T) <= tol * max(scale, 1e-300))


def _general_spectrum(m, tol):
    """Clustered real spectrum and Riesz projections of a diagonalizable matrix."""
    m = np.asarray(m, dtype=complex)
    w, v = scipy.linalg.eig(m)
    if np.max(np.abs(w.imag), initial=0.0) > tol * (1.0 + np.max(np.abs(w), initial=0.0)):
        raise NotHermitianType("spectrum is not real")
    order = np.argsort(-w.real)
    w, v = w.real[order], v[:, order]
    winv = np.linalg.inv(v)
    groups = _cluster_descending(w, default_cluster_tol(w) + tol * (1.0 + np.max(np.abs(w))))
    values = [float(np.mean(w[g])) for g in groups]
    projs = [v[:, g] @ winv[g, :] for g in groups]
    return values, projs


def _unipotent_part(values, projs, a, tol):
    out = np.zeros_like(a, dtype=complex)
    for i, li in enumerate(values):
        for j, lj in enumerate(values):
            if li - lj < -tol:
                out = out + projs[i] @ a @ projs[j]
    return out


def equivalence_check(xi, zeta, tol=1e-8):
    """ξ ~ ζ iff ζ - ξ ∈ 𝔲(ξ). ξ may be a HermitianTypeVector or any diagonalizable matrix."""
    zeta = np.asarray(zeta, dtype=complex)
    _general_spectrum(zeta, tol)      # real-spectrum precondition
    if isinstance(xi, HermitianTypeVector):
        values = list(xi.cluster_values)
        projs = list(xi.eigenprojections)
        base = xi.matrix
    else:
        base = np.asarray(xi, dtype=complex)
        values, projs = _general_spectrum(base, tol)
    diff = zeta - base
    radius = max(abs(v) for v in values) if values else 0.0
    ad_tol = config.AD_CLUSTER_MULT * max(default_cluster_tol([radius]), tol)
    resid = diff - _unipotent_part(values, projs, diff, ad_tol)
    scale = 1.0 + np.linalg.norm(base) + np.linalg.norm(zeta)
    return bool(np.linalg.norm(resid) <= tol * scale)


def weyl_representative(xi):
    """Sorted spectrum, clustered values repeated with their multiplicity."""
    xi = _as_htv(xi)
    return np.repeat(np.asarray(xi.cluster_values), xi.multiplicities)


def conjugacy_invariants(m):
    """Characteristic-polynomial coefficients, leading 1 first."""
    return np.poly(np.asarray(m, dtype=complex)).astype(complex)


# -- spectral calculus ---------------------------------------------------------

def matrix_function(f, h):
    """f(h) = Σ f(λ_i) P_i for Hermitian h."""
    h = np.asarray(h, dtype=complex)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    vals = np.array([float(f(x)) for x in w])
    return (v * vals) @ v.conj().T


def ad_ops(xi, f, a):
    """f([ξ,·])(a) through the ad-spectral projections."""
    return _as_htv(xi).ad.apply(f, np.asarray(a, dtype=complex))


def ad_matrix(xi):
    """[ξ,·] as an n²×n² matrix on row-major vec(A)."""
    xi = np.asarray(xi.matrix if isinstance(xi, HermitianTypeVector) else xi, dtype=complex)
    eye = np.eye(xi.shape[0])
    return np.kron(xi, eye) - np.kron(eye, xi.T)


def psi(t):
    """(e^t - 1)/t, 1 at 0."""
    if abs(t) < config.TAYLOR_CUTOFF:
        return 1.0 + t / 2.0 + t * t / 6.0 + t ** 3 / 24.0
    return math.expm1(t) / t


def eta(t):
    """sqrt((1 - e^{-t})/t), 1 at 0."""
    return math.sqrt(psi(-t))


def theta(t):
    """2t/(e^t - e^{-t}), 1 at 0."""
    if abs(t) < config.TAYLOR_CUTOFF:
        t2 = t * t
        return 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0 - 31.0 * t2 ** 3 / 15120.0
    if abs(t) > 700.0:
        return 0.0
    return t / math.sinh(t)


def phi_sqrtinv(t):
    return 1.0 / math.sqrt(t) if t > 0 else 0.0


# -- differential of exp -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DexpFactor:
    """(d_s exp)(ṡ) e^{-s} = λ + k - Ad_{e^s}k with its Hermitian/anti-Hermitian parts."""
    sigma: np.ndarray
    sigma_h: np.ndarray
    sigma_a: np.ndarray
    lam: np.ndarray
    k: np.ndarray


def dexp_factor(s, sdot):
    xi = _as_htv(s)
    sdot = np.asarray(sdot, dtype=complex)
    ad = xi.ad
    lam = np.zeros_like(sdot)
    k = np.zeros_like(sdot)
    sigma = np.zeros_like(sdot)
    for idx, rho in enumerate(ad.ad_eigenvalues):
        comp = ad.component(idx, sdot)
        if idx == ad.zero_index:
            lam = lam + comp
            sigma = sigma + comp
            continue
        k_rho = -comp / rho
        k = k + k_rho
        # (1 - e^rho) k_rho, with expm1 for small rho
        sigma = sigma - math.expm1(rho) * k_rho
    sigma_h = 0.5 * (sigma + sigma.conj().T)
    sigma_a = 0.5 * (sigma - sigma.conj().T)
    return DexpFactor(sigma=sigma, sigma_h=sigma_h, sigma_a=sigma_a, lam=lam, k=k)


def real_inner(a, b):
    """Re tr(a b*) on full matrices (scale 1)."""
    return float(np.real(np.vdot(b, a)))
