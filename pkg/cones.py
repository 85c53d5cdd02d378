# cones.py
# Exact Fourier–Motzkin elimination for homogeneous rational cones.
#
# A cone is a list of half-spaces c·ξ ≤ 0 (or c·ξ < 0 when strict). Everything
# is Fraction arithmetic; rows are rescaled to primitive integer vectors so the
# elimination does not blow up coefficients. Feasibility and a witness point come
# from the same elimination: the stages are kept and back-substituted.

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from core.log import get_logger

log = get_logger('cones')


@dataclass(frozen=True)
class Halfspace:
    coeffs: tuple
    strict: bool = False

    def value(self, xi):
        return sum(c * x for c, x in zip(self.coeffs, xi))

    def holds(self, xi):
        val = self.value(xi)
        return val < 0 if self.strict else val <= 0


def primitive(coeffs):
    """Scale a rational row by a positive factor to a primitive integer vector."""
    coeffs = [Fraction(c) for c in coeffs]
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        return tuple(Fraction(0) for _ in ints)
    return tuple(Fraction(v // g) for v in ints)


def _normalise(rows):
    """Primitive rows, trivial rows dropped, duplicates merged. None if 0 < 0 appears."""
    out = {}
    for h in rows:
        c = primitive(h.coeffs)
        if all(x == 0 for x in c):
            if h.strict:
                return None
            continue
        out[c] = out.get(c, False) or h.strict
    return [Halfspace(c, s) for c, s in sorted(out.items())]


@dataclass(frozen=True)
class RationalCone:
    """{ξ ∈ ℚ^dim : every half-space holds}."""
    dim: int
    rows: tuple = ()

    def add(self, *rows):
        return RationalCone(self.dim, self.rows + tuple(rows))

    def contains(self, xi):
        return all(h.holds(xi) for h in self.rows)

    # -- elimination --

    def _stages(self):
        """Run the elimination. Returns (stages, feasible); stage k constrains ξ_k..ξ_{dim-1}."""
        rows = _normalise(self.rows)
        if rows is None:
            return [], False
        stages = []
        for col in range(self.dim):
            stages.append(rows)
            zero, pos, neg = [], [], []
            for h in rows:
                c = h.coeffs[col]
                (pos if c > 0 else neg if c < 0 else zero).append(h)
            combined = list(zero)
            for p in pos:
                for n in neg:
                    a, b = p.coeffs[col], -n.coeffs[col]
                    coeffs = tuple(x / a + y / b for x, y in zip(p.coeffs, n.coeffs))
                    combined.append(Halfspace(coeffs, p.strict or n.strict))
            log.debug(f"  eliminate col {col}: z={len(zero)} p={len(pos)} n={len(neg)}")
            rows = _normalise(combined)
            if rows is None:
                return stages, False
        return stages, True

    def feasible(self):
        return self._stages()[1]

    def witness(self):
        """A rational point of the cone, or None if it is empty."""
        stages, ok = self._stages()
        if not ok:
            return None
        xi = [Fraction(0)] * self.dim
        for col in range(self.dim - 1, -1, -1):
            lower, lower_strict = None, False
            upper, upper_strict = None, False
            for h in stages[col]:
                c = h.coeffs[col]
                if c == 0:
                    continue
                rest = sum(h.coeffs[j] * xi[j] for j in range(col + 1, self.dim))
                bound = -rest / c
                if c > 0:
                    if upper is None or bound < upper or (bound == upper and h.strict):
                        upper, upper_strict = bound, h.strict
                else:
                    if lower is None or bound > lower or (bound == lower and h.strict):
                        lower, lower_strict = bound, h.strict
            if lower is not None and upper is not None:
                xi[col] = lower if lower == upper else (lower + upper) / 2
            elif lower is not None:
                xi[col] = lower + 1 if lower_strict else lower
            elif upper is not None:
                xi[col] = upper - 1 if upper_strict else upper
        return tuple(xi)

    def nonzero_witness(self):
        """A nonzero point of the cone, or None if the cone is {0}.

        Splits ξ ≠ 0 into the 2·dim open half-spaces ±ξ_k > 0, tried in order.
        """
        for k in range(self.dim):
            for sign in (1, -1):
                row = [Fraction(0)] * self.dim
                row[k] = Fraction(-sign)
                pt = self.add(Halfspace(tuple(row), True)).witness()
                if pt is not None:
                    return pt
        return None
