# core/errors.py
# Every exception the toolkit raises on purpose. The CLI maps these to exit codes.


class ToolkitError(Exception):
    """Base class for anything the toolkit raises deliberately."""


# ── lie_core ─────────────────────────────────────────────────────────────────
class NotInAlgebra(ToolkitError, ValueError):
    pass


class NotHermitianType(ToolkitError, ValueError):
    pass


# ── actions ──────────────────────────────────────────────────────────────────
class InvalidAction(ToolkitError, ValueError):
    """Representation data failed a construction check (bracket, unitarity, centrality)."""


class DivergentRay(ToolkitError):
    """The maximal weight along the ray is +inf, so there is no finite limit to compare."""


class ActionOverflow(ToolkitError, ArithmeticError):
    pass


# ── stability ────────────────────────────────────────────────────────────────
class NonRationalWeights(ToolkitError, ValueError):
    pass


# ── solver ───────────────────────────────────────────────────────────────────
class SingularJacobian(ToolkitError, ArithmeticError):
    pass


# ── vortex ───────────────────────────────────────────────────────────────────
class InvalidVortexProblem(ToolkitError, ValueError):
    pass


class LinearSolveFailure(ToolkitError, ArithmeticError):
    """The vortex Jacobian is negative definite, so this signals a bug or corrupt input."""


# ── pairs ────────────────────────────────────────────────────────────────────
class RankMismatch(ToolkitError, ValueError):
    pass


class InvalidPairData(ToolkitError, ValueError):
    pass


# ── cli ──────────────────────────────────────────────────────────────────────
class SchemaError(ToolkitError, ValueError):
    pass
