# reports/base.py
# Turns domain results into plain report dicts and writes them out.
# JSON goes through core.utils.canonical_json so reruns are byte-identical;
# tabular outcomes (weight tables, t-scans) can be written as CSV with pandas.

import io
import json

import numpy as np
import pandas as pd

import config
from core.utils import canonical_json, encode_matrix, encode_vector
from reports.schema import ReportRecord
from lie_core import weyl_representative


# -- domain objects -> dicts ---------------------------------------------------

def weight_value(w):
    return '+inf' if w.plus_inf else float(w.finite)


def point_dict(x):
    return {'vector': encode_vector(x.vector), 'projective': bool(x.projective)}


def verdict_dict(v):
    out = {
        'class': v.cls,
        'method': v.method,
        'witness': None if v.witness is None else encode_matrix(v.witness),
        'stabilizer_dim': len(v.stabilizer_basis),
        'diagnostics': v.diagnostics,
    }
    if v.witness_exact is not None:
        out['witness_exact'] = list(v.witness_exact)
    if v.witness is not None:
        out['witness_spectrum'] = weyl_representative(v.witness)
    return out


def outcome_dict(o):
    """SolveOutcome -> dict; trace rows are included when the solver recorded them."""
    out = {'variant': o.variant}
    if o.variant == 'PolystableCert':
        out.update(
            s_final=encode_matrix(o.s_final),
            s1=encode_matrix(o.s1),
            x0=point_dict(o.x0),
            x_star=point_dict(o.x_star),
            mu_residual=o.mu_residual,
            path=[[e, n] for e, n in o.path],
        )
    elif o.variant == 'UnstableCert':
        out.update(
            sigma=encode_matrix(o.sigma),
            sigma_spectrum=o.sigma_weyl,
            weight_at_sigma=weight_value(o.weight_at_sigma),
            boundary=o.boundary,
            source=o.source,
            moment_decay=o.moment_decay,
            norm_history=[[e, n] for e, n in o.norm_history],
        )
    else:
        out.update(reason=o.reason, norm_history=[[e, n] for e, n in o.norm_history])
    if o.trace:
        out['trace'] = o.trace
    return out


def vortex_dict(p, out):
    base = {'grid_n': p.grid_n, 'degree': p.degree, 't_param': p.t_param,
            'background': p.background, 'solvable': out.solvable,
            'newton_iters': out.newton_iters, 'min_u': out.min_u}
    if out.solvable:
        base.update(residual_inf=out.residual_inf, mass_identity_error=out.mass_identity_error,
                    u=out.u.ravel())
    else:
        base.update(reason=out.reason, mass_gap=out.mass_gap,
                    diagnosis=('integral obstruction: 1/2 sum m e^(2u) hc^2 > 0 '
                               'cannot equal t - 2*pi*d <= 0') if out.mass_gap <= 0 else
                              'no convergence within the iteration budget')
    return base


def pair_dict(v):
    return {'class': v.cls, 'reason': v.reason, 'violated': v.violated,
            'diagnostics': v.diagnostics}


# -- records -------------------------------------------------------------------

def make_record(digest_hex, subcommand, kind, outcome, timings_ms):
    return {
        'input_digest': digest_hex,
        'subcommand': subcommand,
        'kind': kind,
        'outcome': outcome,
        'timings_ms': timings_ms,
        'tool_version': config.TOOL_VERSION,
        'schema_version': config.SCHEMA_VERSION,
    }


def render_json(record):
    return canonical_json(record)


def reparse(text):
    """A rendered report must parse back under the report schema."""
    return ReportRecord.model_validate(json.loads(text))


def render_csv(table):
    buf = io.StringIO()
    table.to_csv(buf, index=False, float_format=f'%.{config.FLOAT_DIGITS}g')
    return buf.getvalue()


def record_frame(records):
    """Flatten records into one CSV-able frame (non-tabular outcomes)."""
    rows = []
    for rec in records:
        flat = pd.json_normalize(json.loads(canonical_json(rec)), sep='.')
        rows.append(flat)
    return pd.concat(rows, ignore_index=True) if rows else pd.DataFrame()


def frame_records(table):
    """DataFrame -> list of row dicts with plain Python scalars."""
    out = []
    for row in table.to_dict(orient='records'):
        out.append({k: (v.item() if isinstance(v, np.generic) else v) for k, v in row.items()})
    return out
