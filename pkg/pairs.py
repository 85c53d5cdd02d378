# pairs.py
# Exact stability arithmetic for split holomorphic pairs over a curve.
#
#   E = O(d_1) ⊕ ... ⊕ O(d_r),   φ : E -> E0 = O(e_1) ⊕ ... ⊕ O(e_s)
#
# oriented pairs (rank 2):  φ ≠ 0 is stable iff deg D_φ < μ(E)
# quot pairs:               μ(E/F) > -τ for rk F < r,   μ(F) < -τ for F ⊆ ker φ
#
# Subsheaf candidates are the split ones: sums of summands plus line twists
# O(d_i - k) ⊂ O(d_i). Everything is Fraction arithmetic; no tolerances.

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
import math

from core.errors import InvalidPairData, RankMismatch
from core.log import get_logger
from core.utils import to_fraction

log = get_logger('pairs')

STABLE = 'Stable'
POLYSTABLE_NOT_STABLE = 'PolystableNotStable'
NOT_POLYSTABLE = 'NotPolystable'


@dataclass(frozen=True)
class SplitPairData:
    summand_degrees: tuple
    phi_nonzero: tuple              # per summand: φ_i ≢ 0
    d_phi: int = None               # deg D_φ, rank-2 oriented pairs only
    target_degrees: tuple = ()      # e_j of E0
    phi_map: tuple = ()             # phi_map[j][i]: component O(d_i) -> O(e_j) is nonzero
    tau: Fraction = None

    @property
    def rank(self):
        return len(self.summand_degrees)

    @property
    def degree(self):
        return sum(self.summand_degrees)

    @property
    def phi_is_zero(self):
        return not any(self.phi_nonzero)

    def in_kernel(self, i):
        """Summand i is killed by φ."""
        return not self.phi_nonzero[i]


@dataclass(frozen=True)
class Subsheaf:
    kind: str                       # 'zero' | 'sum' | 'twist'
    summands: tuple
    rank: int
    degree: int
    twist: int = 0

    @property
    def slope(self):
        return Fraction(self.degree, self.rank)

    def describe(self):
        if self.kind == 'zero':
            return '0'
        if self.kind == 'twist':
            return f'O({self.degree}) = O(d_{self.summands[0] + 1} - {self.twist})'
        return ' + '.join(f'O(d_{i + 1})' for i in self.summands) + f'  (deg {self.degree})'

    def as_dict(self):
        return {'kind': self.kind, 'summands': list(self.summands), 'rank': self.rank,
                'degree': self.degree, 'twist': self.twist}


@dataclass(frozen=True)
class PairVerdict:
    cls: str
    reason: str
    violated: dict = None
    diagnostics: dict = field(default_factory=dict)


def split_pair(summand_degrees, phi_nonzero=None, d_phi=None, target_degrees=(),
               phi_map=None, tau=None):
    """Validated SplitPairData.

    phi_map, when given, determines phi_nonzero (a summand is outside ker φ iff one
    of its components is nonzero). A nonzero component O(d_i) -> O(e_j) needs e_j ≥ d_i.
    """
    degrees = tuple(int(d) for d in summand_degrees)
    if any(Fraction(d) != Fraction(x) for d, x in zip(degrees, summand_degrees)):
        raise InvalidPairData("summand degrees must be integers")
    if not degrees:
        raise InvalidPairData("E needs at least one summand")
    targets = tuple(int(e) for e in target_degrees)
    if phi_map is not None:
        pm = tuple(tuple(bool(c) for c in row) for row in phi_map)
        if len(pm) != len(targets) or any(len(row) != len(degrees) for row in pm):
            raise InvalidPairData("phi_map must be len(target_degrees) x len(summand_degrees)")
        for j, row in enumerate(pm):
            for i, nonzero in enumerate(row):
                if nonzero and targets[j] < degrees[i]:
                    raise InvalidPairData(
                        f"no nonzero map O({degrees[i]}) -> O({targets[j]}): target degree is lower")
        derived = tuple(any(pm[j][i] for j in range(len(pm))) for i in range(len(degrees)))
        if phi_nonzero is not None and tuple(bool(b) for b in phi_nonzero) != derived:
            raise InvalidPairData("phi_nonzero disagrees with phi_map")
        phi_nonzero = derived
    else:
        pm = ()
    if phi_nonzero is None:
        raise InvalidPairData("give phi_nonzero or phi_map")
    phi_nonzero = tuple(bool(b) for b in phi_nonzero)
    if len(phi_nonzero) != len(degrees):
        raise InvalidPairData("phi_nonzero needs one flag per summand")
    if d_phi is not None:
        d_phi = int(d_phi)
        if not any(phi_nonzero):
            raise InvalidPairData("deg D_φ is undefined when φ = 0")
        bound = min(d for d, nz in zip(degrees, phi_nonzero) if nz)
        if not 0 <= d_phi <= bound:
            raise InvalidPairData(f"deg D_φ must lie in [0, {bound}], got {d_phi}")
    tau = None if tau is None else to_fraction(tau)
    return SplitPairData(degrees, phi_nonzero, d_phi, targets, pm, tau)


# -- oriented pairs ------------------------------------------------------------

def oriented_pair_classify(p):
    if p.rank != 2:
        raise RankMismatch(f"oriented pairs are rank 2, got rank {p.rank}")
    d1, d2 = p.summand_degrees
    mu = Fraction(d1 + d2, 2)
    if not p.phi_is_zero:
        if p.d_phi is None:
            raise InvalidPairData("an oriented pair with nonzero φ needs deg D_φ")
        d_phi = p.d_phi
        diag = {'deg_D_phi': d_phi, 'slope_E': mu}
        if d_phi < mu:
            return PairVerdict(STABLE, f"deg D_phi = {d_phi} < mu(E) = {mu}", None, diag)
        return PairVerdict(NOT_POLYSTABLE, f"deg D_phi = {d_phi} >= mu(E) = {mu}",
                           {'kind': 'divisor', 'degree': d_phi}, diag)
    # split bundles are never stable; equal slopes make them polystable
    if d1 == d2:
        return PairVerdict(POLYSTABLE_NOT_STABLE, f"phi = 0 and E = O({d1}) + O({d2}) has equal slopes",
                           None, {'slope_E': mu})
    big = 0 if d1 > d2 else 1
    sub = Subsheaf('sum', (big,), 1, p.summand_degrees[big])
    return PairVerdict(NOT_POLYSTABLE, f"phi = 0 and O({sub.degree}) has slope > mu(E) = {mu}",
                       sub.as_dict(), {'slope_E': mu})


# -- quot pairs ----------------------------------------------------------------

def subset_candidates(p):
    """Sums of nonempty summand subsets, in size then lexicographic order."""
    out = []
    for size in range(1, p.rank + 1):
        for idx in combinations(range(p.rank), size):
            out.append(Subsheaf('sum', idx, size, sum(p.summand_degrees[i] for i in idx)))
    return out


def twist_candidates(p, tau):
    """O(d_i - k) for 1 ≤ k ≤ max(0, d_i - floor(-τ)), capped at 4·max(1, max|d_i|) in total.

    Candidates are taken round-robin in k so the cap is shared by every summand.
    """
    cap = 4 * max(1, max(abs(d) for d in p.summand_degrees))
    floor_bound = math.floor(-tau)
    kmax = [max(0, d - floor_bound) for d in p.summand_degrees]
    out = []
    for k in range(1, max(kmax, default=0) + 1):
        for i, d in enumerate(p.summand_degrees):
            if k > kmax[i]:
                continue
            if len(out) >= cap:
                return out
            out.append(Subsheaf('twist', (i,), 1, d - k, k))
    return out


def _in_kernel(p, sub):
    return all(p.in_kernel(i) for i in sub.summands)


def quot_pair_classify(p, tau=None):
    """τ-stability over the split candidate set, exact."""
    tau = p.tau if tau is None else to_fraction(tau)
    if tau is None:
        raise InvalidPairData("quot stability needs tau")
    r, deg = p.rank, p.degree
    bound = -tau
    zero = Subsheaf('zero', (), 0, 0)
    candidates = [zero] + subset_candidates(p) + twist_candidates(p, tau)
    diag = {'tau': tau, 'candidates': len(candidates)}
    for sub in candidates:
        if sub.rank < r:
            q_slope = Fraction(deg - sub.degree, r - sub.rank)
            if not q_slope > bound:
                return PairVerdict(NOT_POLYSTABLE,
                                   f"mu(E/F) = {q_slope} <= -tau = {bound} for F = {sub.describe()}",
                                   dict(sub.as_dict(), condition=1), diag)
        if sub.rank > 0 and _in_kernel(p, sub):
            if not sub.slope < bound:
                return PairVerdict(NOT_POLYSTABLE,
                                   f"F = {sub.describe()} lies in ker phi with mu(F) = {sub.slope} >= -tau = {bound}",
                                   dict(sub.as_dict(), condition=2), diag)
    return PairVerdict(STABLE, f"both slope conditions hold strictly on {len(candidates)} candidates",
                       None, diag)


def kernel_summand_sums(p):
    return [sub for sub in subset_candidates(p) if _in_kernel(p, sub)]


def quot_tau_walls(p):
    """Values of τ where the quot verdict can change: -μ(E/F) and -μ(F) for F ⊆ ker φ."""
    r, deg = p.rank, p.degree
    walls = set()
    for sub in [Subsheaf('zero', (), 0, 0)] + subset_candidates(p):
        if sub.rank < r:
            walls.add(-Fraction(deg - sub.degree, r - sub.rank))
    for sub in kernel_summand_sums(p):
        walls.add(-sub.slope)
    return sorted(walls)


def large_tau_bound(p):
    """B such that for every τ > B the verdict is Stable iff no summand sum lies in ker φ."""
    walls = quot_tau_walls(p)
    return walls[-1] if walls else Fraction(0)
