# stability.py
# Stability classification.
#   torus actions      exact, by Fourier–Motzkin on the weight cones (cones.py)
#   everything else    from the continuity-method certificate (solver.py)

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import pandas as pd

import config
from actions import from_coords, maximal_weight, point
from cones import Halfspace, RationalCone
from core.errors import InvalidAction
from core.log import get_logger
from core.utils import to_fraction
from lie_core import weyl_representative
from solver import (Inconclusive, PolystableCert, SolveOptions, UnstableCert,
                    solve_moment_zero, stabilizer_complement)

log = get_logger('stability')

STABLE = 'Stable'
POLYSTABLE_NOT_STABLE = 'PolystableNotStable'
SEMISTABLE_NOT_POLYSTABLE = 'SemistableNotPolystable'
UNSTABLE = 'Unstable'
INCONCLUSIVE = 'Inconclusive'

EXACT_CONE = 'ExactCone'
CERTIFICATE = 'Certificate'


@dataclass(frozen=True, eq=False)
class StabilityVerdict:
    cls: str
    witness: np.ndarray = None          # destabilising / boundary direction as a Hermitian matrix
    witness_exact: tuple = None         # torus coordinates, exact
    stabilizer_basis: list = field(default_factory=list)
    method: str = EXACT_CONE
    diagnostics: dict = field(default_factory=dict)
    certificate: object = None          # SolveOutcome behind a Certificate verdict

    @property
    def is_stable(self):
        return self.cls == STABLE

    @property
    def is_polystable(self):
        return self.cls in (STABLE, POLYSTABLE_NOT_STABLE)

    @property
    def is_semistable(self):
        return self.cls in (STABLE, POLYSTABLE_NOT_STABLE, SEMISTABLE_NOT_POLYSTABLE)


# -- exact torus classification ------------------------------------------------

def exact_weights(a):
    """Weights and τ of a weight-list action as Fractions. Raises NonRationalWeights."""
    if not a.is_torus_weights:
        raise InvalidAction("exact classification needs a torus action given by a weight list")
    rank = a.group.ambient_dim
    weights = [tuple(to_fraction(c) for c in w) for w in a.weights]
    if a.tau_exact is None:
        tau = tuple(Fraction(0) for _ in range(rank))
    else:
        tau = tuple(to_fraction(c) for c in a.tau_exact)
    return weights, tau


def support(v, drop_tol=None):
    drop_tol = config.DROP_TOL if drop_tol is None else drop_tol
    v = np.asarray(v, dtype=complex)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        return []
    return [j for j, c in enumerate(v) if abs(c) > drop_tol * nrm]


def _neg(row):
    return tuple(-c for c in row)


def direction_matrix(xi):
    return np.diag([float(c) for c in xi]).astype(complex)


def rational_nullspace(rows, dim):
    """Basis of {ξ : r·ξ = 0 for every row}, by exact row reduction."""
    m = [list(r) for r in rows]
    pivots, r = [], 0
    for col in range(dim):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [c * inv for c in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [ci - f * cr for ci, cr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * dim
        vec[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            vec[pcol] = -m[i][fcol]
        basis.append(tuple(vec))
    return basis


def torus_classify(a, v, drop_tol=None):
    """Exact verdict for a weight-list torus action on ℂ^N (linear)."""
    weights, tau = exact_weights(a)
    rank = len(tau)
    supp = support(v, drop_tol)
    on_supp = [Halfspace(weights[j]) for j in supp]
    base = RationalCone(rank, tuple(on_supp))
    stab = rational_nullspace([weights[j] for j in supp], rank)
    stab_mats = [direction_matrix(b) for b in stab]
    diag = {'support': supp}

    # unstable: χ ≤ 0 on supp and ⟨τ, ξ⟩ < 0
    xi = base.add(Halfspace(tau, strict=True)).witness()
    if xi is not None:
        diag['weight'] = float(sum(t * c for t, c in zip(tau, xi)))
        return StabilityVerdict(UNSTABLE, direction_matrix(xi), xi, stab_mats, EXACT_CONE, diag)

    # stable: the closed cone with ⟨τ, ξ⟩ ≤ 0 is {0}
    closed = base.add(Halfspace(tau))
    if closed.nonzero_witness() is None:
        return StabilityVerdict(STABLE, None, None, [], EXACT_CONE, diag)

    # polystable: τ vanishes on the stabilizer and no boundary direction leaves it
    tau_on_stab = all(sum(t * c for t, c in zip(tau, b)) == 0 for b in stab)
    flat = closed.add(Halfspace(_neg(tau)))
    for j in supp:
        xi = flat.add(Halfspace(weights[j], strict=True)).witness()
        if xi is not None:
            diag['weight'] = 0.0
            return StabilityVerdict(SEMISTABLE_NOT_POLYSTABLE, direction_matrix(xi), xi, stab_mats,
                                    EXACT_CONE, diag)
    if not tau_on_stab:
        # semistable excludes this; kept so the verdict never claims more than was checked
        return StabilityVerdict(SEMISTABLE_NOT_POLYSTABLE, None, None, stab_mats, EXACT_CONE, diag)
    return StabilityVerdict(POLYSTABLE_NOT_STABLE, None, None, stab_mats, EXACT_CONE, diag)


def torus_test_set(a):
    """One rational point in every nonempty C_A ∩ {⟨τ, ξ⟩ ≤ 0, ξ ≠ 0}, A ⊆ R in bitmask order.

    C_A = {χ ≤ 0 on A, χ > 0 off A}. v is stable iff maximal_weight > 0 on all of them.
    """
    weights, tau = exact_weights(a)
    rank = len(tau)
    half = Halfspace(tau)
    if not weights:
        out = []
        for k in range(rank):
            for sign in (1, -1):
                e = tuple(Fraction(sign * int(i == k)) for i in range(rank))
                if half.holds(e):
                    out.append(e)
        return out
    out, seen = [], set()
    n = len(weights)
    for mask in range(1 << n):
        rows = [half]
        for j in range(n):
            if mask >> j & 1:
                rows.append(Halfspace(weights[j]))
            else:
                rows.append(Halfspace(_neg(weights[j]), strict=True))
        xi = RationalCone(rank, tuple(rows)).nonzero_witness()
        if xi is not None and xi not in seen:
            seen.add(xi)
            out.append(xi)
    log.debug(f"    test set: {len(out)} points from {1 << n} weight subsets")
    return out


def classify_by_test_set(a, v, test_set=None):
    """Stable iff every test direction has positive maximal weight."""
    test_set = torus_test_set(a) if test_set is None else test_set
    x = point(a, v)
    for xi in test_set:
        mw = maximal_weight(a, direction_matrix(xi), x)
        if not (mw.plus_inf or mw.finite > 0):
            return False
    return True


# -- certificate-based classification ------------------------------------------

def general_classify(a, x, solver_opts=None):
    """Verdict from solve_moment_zero.

    PolystableCert gives Stable when the stabilizer at x_star is trivial, else
    PolystableNotStable. UnstableCert is read through the sign of λ^σ: negative
    is Unstable, boundary (|λ| ≤ BOUNDARY_WEIGHT_TOL) is SemistableNotPolystable,
    positive contradicts the certificate and is reported as Inconclusive.

    A 'stalled' certificate comes from a path with ε‖s‖ -> 0, which already
    certifies semistability; its weight only decides Unstable when it is
    finite and negative, and is otherwise kept as a diagnostic.
    """
    opts = solver_opts or SolveOptions()
    outcome = solve_moment_zero(a, x, opts)
    diag = {'variant': outcome.variant}
    if isinstance(outcome, PolystableCert):
        split = stabilizer_complement(a, outcome.x_star, opts.stab_tol)
        stab = [from_coords(a, split.stabilizer[:, j]) for j in range(split.stabilizer.shape[1])]
        diag.update(mu_residual=outcome.mu_residual,
                    min_singular_value=float(split.singular_values.min()) if split.singular_values.size else 0.0)
        cls = STABLE if split.trivial else POLYSTABLE_NOT_STABLE
        return StabilityVerdict(cls, None, None, stab, CERTIFICATE, diag, outcome)
    if isinstance(outcome, UnstableCert):
        w = outcome.weight_at_sigma
        diag.update(source=outcome.source, weight=float(w),
                    sigma_weyl=[float(c) for c in outcome.sigma_weyl])
        if outcome.source == 'stalled':
            diag['moment_decay'] = outcome.moment_decay
            strict = (not w.plus_inf) and w.finite < -config.BOUNDARY_WEIGHT_TOL
            cls = UNSTABLE if strict else SEMISTABLE_NOT_POLYSTABLE
            return StabilityVerdict(cls, outcome.sigma, None, [], CERTIFICATE, diag, outcome)
        if w.plus_inf or w.finite > config.BOUNDARY_WEIGHT_TOL:
            diag['reason'] = 'certificate direction has positive weight'
            return StabilityVerdict(INCONCLUSIVE, outcome.sigma, None, [], CERTIFICATE, diag, outcome)
        cls = UNSTABLE if w.finite < -config.BOUNDARY_WEIGHT_TOL else SEMISTABLE_NOT_POLYSTABLE
        return StabilityVerdict(cls, outcome.sigma, None, [], CERTIFICATE, diag, outcome)
    diag['reason'] = outcome.reason
    return StabilityVerdict(INCONCLUSIVE, None, None, [], CERTIFICATE, diag, outcome)


def hilbert_mumford_scan(a, x, directions):
    """Maximal weights of x along the given Hermitian directions, one row each."""
    rows = []
    for idx, xi in enumerate(directions):
        xi = np.asarray(xi, dtype=complex)
        mw = maximal_weight(a, xi, x)
        rows.append({
            'direction': idx,
            'spectrum': ' '.join(f'{c:.6g}' for c in weyl_representative(0.5 * (xi + xi.conj().T))),
            'maximal_weight': float(mw),
            'sign': 1 if (mw.plus_inf or mw.finite > config.BOUNDARY_WEIGHT_TOL)
                    else (-1 if mw.finite < -config.BOUNDARY_WEIGHT_TOL else 0),
        })
    return pd.DataFrame(rows, columns=['direction', 'spectrum', 'maximal_weight', 'sign'])
