# reports/registry.py
# Mapping of subcommand → (handler, accepted problem kinds).
# This is the single place to add a subcommand; run.py only dispatches through it.
#
# A handler receives (problem, payload, args) and returns a HandlerResult:
# the outcome dict for the JSON report, an optional DataFrame for --format csv,
# and whether the result is inconclusive (exit code 3).

from dataclasses import dataclass
import os
import time

import pandas as pd

import config
from actions import LINEAR
from core.errors import SchemaError
from core.log import get_logger
from core.paths import field_csv, run_dir
from core.utils import digest
from pairs import (large_tau_bound, oriented_pair_classify, quot_pair_classify,
                   quot_tau_walls)
from reports.base import (frame_records, outcome_dict, pair_dict, verdict_dict,
                          vortex_dict)
from solver import SolveOptions, solve_moment_zero
from stability import (INCONCLUSIVE, direction_matrix, general_classify,
                       hilbert_mumford_scan, torus_classify, torus_test_set)
from vortex import (continuation_in_t, field_frame, scan_frame, scan_threshold,
                    solve_vortex)

log = get_logger('registry')

ACTION_KINDS = ('torus_action', 'linear_action', 'projective_action')


@dataclass
class HandlerResult:
    outcome: dict
    table: pd.DataFrame = None
    inconclusive: bool = False
    timings_ms: dict = None


def solver_options(args):
    return SolveOptions(jacobian_mode=getattr(args, 'jacobian', config.JACOBIAN_MODE),
                        trace=bool(getattr(args, 'trace', False)))


def _action_and_point(problem, payload):
    if problem.kind == 'torus_action':
        a = payload.to_action()
    else:
        a = payload.to_action('linear' if problem.kind == 'linear_action' else 'projective')
    return a, payload.to_point(a)


def _timed(timings, name, fn, *fn_args):
    t0 = time.perf_counter()
    out = fn(*fn_args)
    timings[name] = round((time.perf_counter() - t0) * 1000.0, 3)
    return out


# -- handlers ------------------------------------------------------------------

def handle_classify(problem, payload, args):
    timings = {}
    a, x = _timed(timings, 'build', _action_and_point, problem, payload)
    if problem.kind == 'torus_action' and a.kind == LINEAR:
        verdict = _timed(timings, 'classify', torus_classify, a, x.vector)
    else:
        verdict = _timed(timings, 'classify', general_classify, a, x, solver_options(args))
    outcome = verdict_dict(verdict)
    if verdict.certificate is not None and getattr(args, 'trace', False):
        outcome['certificate'] = outcome_dict(verdict.certificate)
    return HandlerResult(outcome, None, verdict.cls == INCONCLUSIVE, timings)


def handle_solve(problem, payload, args):
    timings = {}
    a, x = _timed(timings, 'build', _action_and_point, problem, payload)
    out = _timed(timings, 'solve', solve_moment_zero, a, x, solver_options(args))
    table = pd.DataFrame(out.trace) if out.trace else None
    return HandlerResult(outcome_dict(out), table, out.variant == 'Inconclusive', timings)


def handle_weights(problem, payload, args):
    timings = {}
    a, x = _timed(timings, 'build', _action_and_point, problem, payload)
    directions = payload.direction_matrices()
    source = 'payload'
    if not directions:
        if problem.kind != 'torus_action':
            raise SchemaError("weights needs 'directions' for non-torus actions")
        directions = [direction_matrix(xi) for xi in torus_test_set(a)]
        source = 'torus_test_set'
    table = _timed(timings, 'scan', hilbert_mumford_scan, a, x, directions)
    outcome = {'directions_from': source, 'rows': frame_records(table)}
    return HandlerResult(outcome, table, False, timings)


def handle_vortex(problem, payload, args):
    timings = {}
    p = _timed(timings, 'build', payload.to_problem, problem.seed)
    if payload.t_scan:
        rows = _timed(timings, 'scan', continuation_in_t, p, payload.t_scan)
        t_star, first_bad = scan_threshold(rows)
        table = scan_frame(rows)
        outcome = {'grid_n': p.grid_n, 'degree': p.degree, 'background': p.background,
                   'threshold': t_star, 'first_insolvable': first_bad,
                   'rows': frame_records(table)}
        return HandlerResult(outcome, table, False, timings)
    out = _timed(timings, 'solve', solve_vortex, p)
    outcome = vortex_dict(p, out)
    table = None
    if out.solvable:
        table = field_frame(p, out)
        if payload.dump_field:
            path = field_csv(digest(problem.model_dump()))
            os.makedirs(run_dir(), exist_ok=True)
            table.to_csv(path, index=False, float_format=f'%.{config.FLOAT_DIGITS}g')
            log.info(f"    field written -> {path}")
            outcome['field_csv'] = path
    return HandlerResult(outcome, table, False, timings)


def handle_pair(problem, payload, args):
    timings = {}
    p = _timed(timings, 'build', payload.to_pair)
    mode = payload.mode
    if mode == 'auto':
        mode = 'quot' if p.tau is not None else 'oriented'
    if mode == 'oriented':
        verdict = _timed(timings, 'classify', oriented_pair_classify, p)
        outcome = dict(pair_dict(verdict), mode='oriented')
    else:
        verdict = _timed(timings, 'classify', quot_pair_classify, p)
        outcome = dict(pair_dict(verdict), mode='quot',
                       tau_walls=quot_tau_walls(p), large_tau_bound=large_tau_bound(p))
    return HandlerResult(outcome, None, False, timings)


# Each entry: subcommand → (handler, accepted problem kinds)
SUBCOMMAND_REGISTRY = {
    'classify': (handle_classify, ACTION_KINDS),
    'solve':    (handle_solve,    ACTION_KINDS),
    'weights':  (handle_weights,  ACTION_KINDS),
    'vortex':   (handle_vortex,   ('vortex',)),
    'pair':     (handle_pair,     ('split_pair',)),
}


def _validate_registry():
    for name, (handler, kinds) in SUBCOMMAND_REGISTRY.items():
        assert callable(handler), f"Registry entry '{name}' has no handler"
        for kind in kinds:
            assert kind in config.PROBLEM_KINDS, \
                f"Registry mismatch: '{name}' accepts unknown problem kind '{kind}'"


_validate_registry()
