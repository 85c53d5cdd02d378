import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import config
import run
from core import log as klog
from core.paths import problem_file
from core.utils import canonical_json, digest
from reports.base import reparse
from reports.schema import parse_problem


def _problem(name):
    return problem_file(name)


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding='utf-8')
    return str(path)


def _records(out):
    return [json.loads(line) for line in out.strip().splitlines()]


@pytest.fixture(autouse=True)
def _restore_config(monkeypatch):
    # --tol writes into config; restore every tolerance after each test
    for name in config.TOL_KEYS.values():
        monkeypatch.setattr(config, name, getattr(config, name))


def test_solve_balanced_torus(capsys):
    code = run.main(['solve', _problem('torus_balanced.json')])
    assert code == run.EXIT_OK
    (rec,) = _records(capsys.readouterr().out)
    assert rec['outcome']['variant'] == 'PolystableCert'
    assert rec['kind'] == 'torus_action'
    assert rec['tool_version'] == config.TOOL_VERSION


def test_classify_boundary_point(capsys):
    assert run.main(['classify', _problem('torus_origin.json')]) == run.EXIT_OK
    (rec,) = _records(capsys.readouterr().out)
    assert rec['outcome']['class'] == 'SemistableNotPolystable'
    assert rec['outcome']['method'] == 'ExactCone'


def test_classify_binary_cubic(capsys):
    assert run.main(['classify', _problem('binary_cubic.json')]) == run.EXIT_OK
    (rec,) = _records(capsys.readouterr().out)
    assert rec['outcome']['class'] == 'Stable'


def test_pair_problems(capsys):
    assert run.main(['pair', _problem('pair_oriented.json'), _problem('pair_quot.json')]) == run.EXIT_OK
    oriented, quot = _records(capsys.readouterr().out)
    assert oriented['outcome']['class'] == 'Stable'
    assert quot['outcome']['class'] == 'Stable'
    assert quot['outcome']['mode'] == 'quot'
    assert 'large_tau_bound' in quot['outcome']


def test_weights_csv(capsys):
    assert run.main(['weights', _problem('torus_rank2.json'), '--format', 'csv']) == run.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == 'direction,spectrum,maximal_weight,sign'
    assert len(lines) == 4


def test_vortex_scan(capsys):
    assert run.main(['vortex', _problem('vortex_scan.json')]) == run.EXIT_OK
    (rec,) = _records(capsys.readouterr().out)
    assert rec['outcome']['threshold'] == 6.3
    assert rec['outcome']['first_insolvable'] == 6.2


def test_random_density_follows_seed(tmp_path, capsys):
    obj = {'version': '1', 'kind': 'vortex', 'seed': 3,
           'payload': {'grid_n': 16, 'degree': 0, 't_param': 5.0,
                       'density': {'kind': 'random', 'mass': 2.0}}}
    problem, payload, _ = parse_problem(obj)
    assert_allclose(payload.to_problem(problem.seed).phi0_sq, payload.to_problem(3).phi0_sq)
    assert not np.allclose(payload.to_problem(3).phi0_sq, payload.to_problem(4).phi0_sq)
    assert run.main(['vortex', _write(tmp_path, 'seeded.json', obj)]) == run.EXIT_OK
    (rec,) = _records(capsys.readouterr().out)
    assert rec['kind'] == 'vortex'
    del obj['seed']
    assert run.main(['vortex', _write(tmp_path, 'unseeded.json', obj)]) == run.EXIT_SCHEMA


def test_reruns_are_identical_except_timings(capsys):
    path = _problem('torus_balanced.json')
    run.main(['solve', path])
    first = _records(capsys.readouterr().out)[0]
    run.main(['solve', path])
    second = _records(capsys.readouterr().out)[0]
    first.pop('timings_ms')
    second.pop('timings_ms')
    assert canonical_json(first) == canonical_json(second)


def test_report_reparses_and_digest_matches(capsys):
    path = _problem('pair_oriented.json')
    run.main(['pair', path])
    line = capsys.readouterr().out.strip()
    rec = reparse(line)
    with open(path, encoding='utf-8') as fh:
        problem, _, _ = parse_problem(json.load(fh))
    assert rec.input_digest == digest(problem.model_dump())


def test_schema_errors_exit_2(tmp_path, capsys):
    bad = _write(tmp_path, 'bad.json', {'version': '1', 'kind': 'torus_action', 'payload': {}})
    assert run.main(['classify', bad]) == run.EXIT_SCHEMA
    assert 'ERROR' in capsys.readouterr().err
    assert run.main(['classify', str(tmp_path / 'missing.json')]) == run.EXIT_SCHEMA
    assert run.main(['classify', _problem('vortex_bump.json')]) == run.EXIT_SCHEMA
    assert run.main(['classify', '--tol', 'nonsense=1', _problem('torus_origin.json')]) == run.EXIT_SCHEMA


def test_unknown_fields_warn_or_fail(tmp_path):
    obj = {'version': '1', 'kind': 'split_pair',
           'payload': {'summand_degrees': [1, 1], 'phi_pattern': [True, True], 'colour': 'red'}}
    path = _write(tmp_path, 'extra.json', obj)
    buf = io.StringIO()
    handler = klog.attach_stream(buf)
    try:
        assert run.main(['pair', path]) == run.EXIT_OK
    finally:
        klog.detach_stream(handler)
    assert 'payload.colour' in buf.getvalue()
    assert run.main(['pair', path, '--strict-schema']) == run.EXIT_SCHEMA


def test_domain_error_exits_1(tmp_path):
    obj = {'version': '1', 'kind': 'split_pair',
           'payload': {'summand_degrees': [1, 1, 1], 'phi_pattern': [True, True, True], 'mode': 'oriented'}}
    assert run.main(['pair', _write(tmp_path, 'rank3.json', obj)]) == run.EXIT_FAIL


def test_inconclusive_exits_3(monkeypatch, capsys):
    monkeypatch.setattr(config, 'MAX_CONTINUATION', 2)
    assert run.main(['solve', _problem('torus_balanced.json')]) == run.EXIT_INCONCLUSIVE
    (rec,) = _records(capsys.readouterr().out)
    assert rec['outcome']['variant'] == 'Inconclusive'


def test_batch_keeps_input_order(tmp_path, capsys):
    problems = [
        {'version': '1', 'kind': 'split_pair', 'payload': {'summand_degrees': [d, 0], 'phi_pattern': [True, True],
                                                   'D_phi_degree': 0}}
        for d in range(4)
    ]
    path = _write(tmp_path, 'batch.json', problems)
    assert run.main(['pair', path, '--workers', '3']) == run.EXIT_OK
    recs = _records(capsys.readouterr().out)
    assert [r['outcome']['diagnostics']['slope_E'] for r in recs] == [0, '1/2', 1, '3/2']


def test_numerical_failure_in_one_problem(tmp_path, capsys, monkeypatch):
    handler, kinds = run.SUBCOMMAND_REGISTRY['pair']

    def flaky(problem, payload, args):
        if payload.summand_degrees[0] == 1:
            raise ZeroDivisionError('division by zero')
        if payload.summand_degrees[0] == 2:
            raise np.linalg.LinAlgError('Singular matrix')
        return handler(problem, payload, args)

    monkeypatch.setitem(run.SUBCOMMAND_REGISTRY, 'pair', (flaky, kinds))
    problems = [
        {'version': '1', 'kind': 'split_pair',
         'payload': {'summand_degrees': [d, 0], 'phi_pattern': [False, False]}}
        for d in range(4)
    ]
    path = _write(tmp_path, 'batch.json', problems)
    assert run.main(['pair', path]) == run.EXIT_FAIL
    captured = capsys.readouterr()
    recs = _records(captured.out)
    assert [r['outcome']['diagnostics']['slope_E'] for r in recs] == [0, '3/2']
    assert 'ZeroDivisionError' in captured.err
    assert 'LinAlgError' in captured.err


def test_selftest_suites_quick():
    import selftest
    assert selftest.suite_pairs()
    assert selftest.suite_solver_closed_forms()
