# core/utils.py
# Single home for shared helper functions used across the toolkit.
# Import from here instead of defining locally in each module.

import hashlib
import json
import math
from fractions import Fraction

import numpy as np

import config
from core.errors import NonRationalWeights, SchemaError


# ── number / text formatters ─────────────────────────────────────────────────

def fmt_float(val, digits=None):
    """Format a float with a fixed number of significant digits ('%.17g')."""
    digits = config.FLOAT_DIGITS if digits is None else digits
    v = float(val)
    if math.isinf(v):
        return '"+inf"' if v > 0 else '"-inf"'
    if math.isnan(v):
        return '"nan"'
    out = f"{v:.{digits}g}"
    # keep floats recognisable as floats after a round trip
    if all(ch not in out for ch in '.en'):
        out += '.0'
    return out


# ── canonical JSON ───────────────────────────────────────────────────────────

def _to_plain(obj):
    """Turn numpy / Fraction values into plain JSON-able Python values."""
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_matrix(obj) if obj.ndim == 2 else encode_vector(obj)
        return _to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    return obj


def _dump(obj, out):
    if obj is None:
        out.append('null')
    elif isinstance(obj, bool):
        out.append('true' if obj else 'false')
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, str):
        out.append(_json_str(obj))
    elif isinstance(obj, list):
        out.append('[')
        for i, v in enumerate(obj):
            if i:
                out.append(',')
            _dump(v, out)
        out.append(']')
    elif isinstance(obj, dict):
        out.append('{')
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(',')
            out.append(_json_str(k))
            out.append(':')
            _dump(obj[k], out)
        out.append('}')
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def _json_str(s):
    return json.dumps(s, ensure_ascii=True)


def canonical_json(obj):
    """Sorted keys, no whitespace, floats at FLOAT_DIGITS significant digits.
    Byte-stable for identical inputs, so digests and reruns compare equal."""
    out = []
    _dump(_to_plain(obj), out)
    return ''.join(out)


def digest(obj):
    """sha256 of the canonical JSON of obj."""
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


# ── matrix (de)serialisation ─────────────────────────────────────────────────
# Matrices travel as row-major arrays of [re, im] pairs; plain real numbers are
# accepted on input as a convenience.

def _entry(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise SchemaError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def decode_matrix(rows):
    try:
        m = np.array([[_entry(x) for x in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad matrix: {exc}") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SchemaError(f"matrix must be square, got shape {m.shape}")
    return m


def decode_vector(vals):
    try:
        return np.array([_entry(x) for x in vals], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad vector: {exc}") from exc


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_vector(v):
    v = np.asarray(v, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in v]


# ── exact rationals ──────────────────────────────────────────────────────────

def to_fraction(x):
    """Exact rational from int, Fraction, 'p/q' string or an integral float.
    Non-integral floats are rejected rather than rounded."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise NonRationalWeights(f"boolean is not a weight: {x!r}")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise NonRationalWeights(f"cannot parse rational {x!r}") from exc
    if isinstance(x, (float, np.floating)):
        if math.isfinite(x) and float(x).is_integer():
            return Fraction(int(x))
        raise NonRationalWeights(f"floating weight {x!r} rejected; give an integer or 'p/q' string")
    raise NonRationalWeights(f"unsupported weight entry {x!r}")