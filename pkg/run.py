# run.py
# Single entry-point for the toolkit: classify, solve, weights, vortex, pair, selftest.
# argparse front end, per-problem timing, batch mode and clean error output.
#
# Usage:
#   python run.py solve problems/torus_balanced.json
#   python run.py classify problems/*.json --workers 4
#   python run.py vortex problems/vortex_scan.json --format csv
#   python run.py solve problems/binary_cubic.json --jacobian fd --trace
#   python run.py classify p.json --tol newton_tol=1e-12 --tol stab_tol=1e-9
#   python run.py selftest [--quick]
#   cat p.json | python run.py pair -
#
# Exit codes: 0 ok, 1 failure, 2 schema / usage error, 3 inconclusive outcome.

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime

import numpy as np

import config
from core import log as klog
from core.errors import SchemaError, ToolkitError
from core.paths import run_log
from core.utils import digest
from reports.base import make_record, record_frame, render_csv, render_json
from reports.registry import SUBCOMMAND_REGISTRY
from reports.schema import load_problem, parse_problem

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_SCHEMA = 2
EXIT_INCONCLUSIVE = 3

SUBCOMMANDS = ('classify', 'solve', 'weights', 'vortex', 'pair', 'selftest')

log = klog.get_logger('run')


class _Tee:
    """Write output to both a stream and a log file simultaneously."""
    def __init__(self, stream, logfile):
        self._stream  = stream
        self._logfile = logfile

    def write(self, data):
        try:
            self._stream.write(data)
        except UnicodeEncodeError:
            enc = getattr(self._stream, 'encoding', 'utf-8') or 'utf-8'
            self._stream.write(data.encode(enc, errors='replace').decode(enc))
        self._logfile.write(data)

    def flush(self):
        self._stream.flush()
        self._logfile.flush()

    def isatty(self):
        return False


# ── tolerance overrides ───────────────────────────────────────────────────────

def apply_tolerances(pairs):
    """--tol key=value → config attribute. Raises SchemaError on unknown keys."""
    for item in pairs or []:
        key, sep, raw = item.partition('=')
        key = key.strip().lower()
        if not sep or key not in config.TOL_KEYS:
            raise SchemaError(f'unknown tolerance "{item}". Valid: {", ".join(sorted(config.TOL_KEYS))}')
        name = config.TOL_KEYS[key]
        current = getattr(config, name)
        try:
            value = int(raw) if isinstance(current, int) else float(raw)
        except ValueError:
            raise SchemaError(f'--tol {key}: "{raw}" is not a number')
        setattr(config, name, value)
        log.info(f'  tol  {name} = {value}')


# ── one problem ───────────────────────────────────────────────────────────────

def _load_inputs(paths):
    """Expand paths (or '-' for stdin) into (label, raw problem dict) items."""
    items = []
    for path in paths:
        if path == '-':
            try:
                raw = json.load(sys.stdin)
            except json.JSONDecodeError as exc:
                raise SchemaError(f'stdin: invalid JSON ({exc})') from exc
            raws = raw if isinstance(raw, list) else [raw]
        else:
            raws = load_problem(path)
        for idx, raw in enumerate(raws):
            label = path if len(raws) == 1 else f'{path}[{idx}]'
            items.append((label, raw))
    return items


def run_one(subcommand, label, raw, args):
    """Returns (status, record | None, table | None, message)."""
    t0 = time.perf_counter()
    try:
        problem, payload, extras = parse_problem(raw)
        if extras:
            msg = f'{label}: unknown fields {", ".join(extras)}'
            if args.strict_schema:
                raise SchemaError(msg)
            log.warning(f'WARN: {msg} (ignored)')
        handler, kinds = SUBCOMMAND_REGISTRY[subcommand]
        if problem.kind not in kinds:
            raise SchemaError(f'{label}: "{subcommand}" does not accept problem kind "{problem.kind}" '
                              f'(accepts {", ".join(kinds)})')
        result = handler(problem, payload, args)
    except SchemaError as exc:
        return EXIT_SCHEMA, None, None, f'ERROR: {exc}'
    except ToolkitError as exc:
        return EXIT_FAIL, None, None, f'ERROR: {label}: {type(exc).__name__}: {exc}'
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        return EXIT_FAIL, None, None, f'ERROR: {label}: {type(exc).__name__}: {exc}'
    except ValueError as exc:
        return EXIT_FAIL, None, None, f"ERROR: {label}: {exc}"
    timings = dict(result.timings_ms or {})
    timings['total'] = round((time.perf_counter() - t0) * 1000.0, 3)
    record = make_record(digest(problem.model_dump()), subcommand, problem.kind,
                         result.outcome, timings)
    status = EXIT_INCONCLUSIVE if result.inconclusive else EXIT_OK
    log.info(f'    OK  {label}  ({timings["total"]:.1f} ms)')
    return status, record, result.table, ''


def _emit(results, fmt):
    records = [r for _, r, _, _ in results if r is not None]
    if fmt == 'json':
        for rec in records:
            sys.stdout.write(render_json(rec) + '\n')
        return
    tables = [t for _, r, t, _ in results if r is not None and t is not None]
    if len(tables) == len(records) and len(tables) == 1:
        sys.stdout.write(render_csv(tables[0]))
    elif records:
        sys.stdout.write(render_csv(record_frame(records)))


def _exit_code(statuses):
    if EXIT_SCHEMA in statuses:
        return EXIT_SCHEMA
    if EXIT_FAIL in statuses:
        return EXIT_FAIL
    if EXIT_INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        description='Kobayashi–Hitchin toolkit: stability, moment-map zeros, vortices, pairs',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f'Tolerance keys: {", ".join(sorted(config.TOL_KEYS))}'
    )
    parser.add_argument('subcommand', choices=SUBCOMMANDS)
    parser.add_argument('paths', nargs='*', metavar='PROBLEM',
                        help="problem JSON files ('-' reads stdin); several run as a batch")
    parser.add_argument('--tol', action='append', default=[], metavar='KEY=VALUE',
                        help='override a tolerance (repeatable)')
    parser.add_argument('--jacobian', choices=('exact', 'fd'), default=None,
                        help='solver Jacobian: exact bilinear formula or central differences')
    parser.add_argument('--trace', action='store_true', help='include the continuation trace')
    parser.add_argument('--strict-schema', action='store_true', help='reject unknown fields')
    parser.add_argument('--format', choices=('json', 'csv'), default='json')
    parser.add_argument('--workers', type=int, default=None,
                        help=f'batch worker threads (default {config.BATCH_WORKERS})')
    parser.add_argument('--log', action='store_true', help='mirror stderr to runs/<date>/run.log')
    parser.add_argument('--verbose', '-v', action='store_true', help='progress lines on stderr')
    parser.add_argument('--quick', action='store_true', help='selftest: reduced sample counts')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        klog.set_level('INFO')
    try:
        apply_tolerances(args.tol)
    except SchemaError as exc:
        print(f'ERROR: {exc}', file=sys.stderr)
        return EXIT_SCHEMA
    if args.jacobian is None:
        args.jacobian = config.JACOBIAN_MODE

    today_str = datetime.today().strftime('%Y-%m-%d')
    log_file, handler, saved_stderr = None, None, sys.stderr
    if args.log:
        path = run_log(today_str)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        log_file = open(path, 'a', encoding='utf-8', buffering=1)
        handler = klog.attach_stream(log_file)
        sys.stderr = _Tee(saved_stderr, log_file)
    # always restore stderr and close the log handle
    try:
        if args.subcommand == 'selftest':
            import selftest
            ok = selftest.run_all(quick=args.quick)
            return EXIT_OK if ok else EXIT_FAIL

        if not args.paths:
            print('ERROR: no problem files given', file=sys.stderr)
            return EXIT_SCHEMA
        try:
            items = _load_inputs(args.paths)
        except SchemaError as exc:
            print(f'ERROR: {exc}', file=sys.stderr)
            return EXIT_SCHEMA

        log.info(f'[{args.subcommand}] {len(items)} problem(s)  --  {today_str}')
        workers = args.workers or config.BATCH_WORKERS
        if len(items) == 1 or workers <= 1:
            results = [run_one(args.subcommand, label, raw, args) for label, raw in items]
        else:
            # map keeps input order in the report
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda it: run_one(args.subcommand, it[0], it[1], args), items))
        for _, _, _, msg in results:
            if msg:
                print(msg, file=sys.stderr)
        _emit(results, args.format)
        sys.stdout.flush()
        return _exit_code([status for status, _, _, _ in results])
    finally:
        sys.stderr = saved_stderr
        if handler is not None:
            klog.detach_stream(handler)
        if log_file is not None:
            log_file.close()


if __name__ == '__main__':
    sys.exit(main())
