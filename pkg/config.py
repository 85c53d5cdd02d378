# config.py
# All configuration lives here. Change a tolerance in one place, affects everything.

import os
from dotenv import load_dotenv

load_dotenv()

# ── LOGGING ──────────────────────────────────────────────────────────────────
# The only environment variable the toolkit reads.
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()

# ── VERSIONS ─────────────────────────────────────────────────────────────────
TOOL_VERSION   = "0.4.0"
SCHEMA_VERSION = "1"

# ── SPECTRAL CALCULUS (lie_core.py) ─────────────────────────────────────────
CLUSTER_REL_TOL  = 1e-8    # eigenvalue clusters: tol = CLUSTER_REL_TOL * (1 + spectral radius)
AD_CLUSTER_MULT  = 2.0     # ad-eigenvalues are differences, so clustered with 2x the tolerance
HERMITIAN_TOL    = 1e-10   # relative tolerance for "m is Hermitian" / algebra membership
TAYLOR_CUTOFF    = 1e-4    # |t| below this: eta, psi, theta use their Taylor series

# ── ACTIONS (actions.py) ────────────────────────────────────────────────────
DROP_TOL         = 1e-12   # relative norm below which a weight component counts as zero
BRACKET_TOL      = 1e-10   # Lie-homomorphism check on matrix representations
RAY_T_SCALE      = 40.0    # weight_limit_consistency evaluates at t = RAY_T_SCALE / min gap

# ── STABILITY (stability.py) ────────────────────────────────────────────────
STAB_TOL         = 1e-8    # singular values below this (relative) span the stabilizer
BOUNDARY_WEIGHT_TOL = 1e-6 # |weight_at_sigma| below this is "boundary semistable"

# ── CONTINUITY SOLVER (solver.py) ───────────────────────────────────────────
EPS_START         = 1.0
EPS_MIN           = 1e-10
NEWTON_TOL        = 1e-11  # on the norm of the perturbed residual l(eps, s)
NEWTON_MAX_ITER   = 50
STEP_SHRINK       = 0.5
DIVERGENCE_FACTOR = 1e3    # ||s|| > factor * (1 + ||i mu(x0)||) counts as divergence
MONOTONE_WINDOW   = 5      # ||s|| must have grown over this many accepted steps
MAX_STEP_RETRIES  = 30     # eps-step halvings before giving up on one continuation step
MAX_CONTINUATION  = 400    # accepted continuation steps before Inconclusive
JACOBIAN_MODE     = "exact"   # "exact" | "fd"
FD_STEP           = 1e-6   # central-difference step, scaled by (1 + ||s||)
COND_MAX          = 1e12   # condition number above which the Jacobian is singular
POLISH_STEP_TOL   = 1e-4   # eps = 0 polish may move s by at most this * (1 + ||s||)
SIGMA_EIG_TOL     = 1e-6   # eigenvalues of rho(sigma) in (0, tol] count as zero for the weight
LOG_GROWTH_EPS    = 1e-3   # log-growth test only looks at eps at or below this
LOG_GROWTH_SPAN   = 4.0    # each half of the test window spans at least this factor in eps
LOG_GROWTH_RATIO  = (0.5, 2.0)  # late/early slope of ||s|| against log(1/eps) for log growth
LOG_GROWTH_MIN_SLOPE = 1e-2
STALL_DROP_TOL    = 1e-3   # drop tolerance for the weight of a log-growth direction
MAX_NEWTON_TOTAL  = 3000   # Newton iterations over the whole solve before Inconclusive

# ── VORTEX (vortex.py) ──────────────────────────────────────────────────────
VORTEX_TOL        = 1e-10
VORTEX_MAX_ITER   = 100
VORTEX_DELTA      = 1e-3   # floor for (t - c0) in the constant initial guess
VORTEX_U_FLOOR    = -50.0  # min(u) below this: e^{2u} underflows, report Insolvable
VORTEX_DIRECT_MAX_N = 64   # sparse direct solve up to this grid size, FFT-preconditioned CG above
VORTEX_CG_RTOL    = 1e-13
ARMIJO_C          = 1e-4
ARMIJO_MAX_HALVINGS = 40

# ── CLI / REPORTS ────────────────────────────────────────────────────────────
FLOAT_DIGITS  = 17         # canonical JSON: significant digits for every float
BATCH_WORKERS = 4
PROBLEM_KINDS = ("linear_action", "projective_action", "torus_action", "vortex", "split_pair")

# Names accepted by `run.py --tol key=value`.
TOL_KEYS = {
    "drop_tol":          "DROP_TOL",
    "stab_tol":          "STAB_TOL",
    "cluster_rel_tol":   "CLUSTER_REL_TOL",
    "boundary_weight_tol": "BOUNDARY_WEIGHT_TOL",
    "eps_start":         "EPS_START",
    "eps_min":           "EPS_MIN",
    "newton_tol":        "NEWTON_TOL",
    "newton_max_iter":   "NEWTON_MAX_ITER",
    "step_shrink":       "STEP_SHRINK",
    "divergence_factor": "DIVERGENCE_FACTOR",
    "vortex_tol":        "VORTEX_TOL",
    "vortex_max_iter":   "VORTEX_MAX_ITER",
}
