# reports/schema.py
# Problem-file schema. A problem file is
#   {"version": "1", "kind": <kind>, "payload": {...}, "seed": <int, optional>}
# and each kind has its own payload model. Unknown fields are kept by pydantic
# (extra='allow') and collected so the CLI can warn or, with --strict-schema, reject.

import json
from typing import Any, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

import config
from actions import (LINEAR, PROJECTIVE, binary_form_vector, matrix_action, point,
                     standard_rep, symmetric_power_rep, weight_rep)
from core.errors import NonRationalWeights, SchemaError
from core.utils import decode_matrix, decode_vector, to_fraction
from lie_core import diagonal_torus, general_linear, product, special_linear
from pairs import split_pair
from vortex import VortexProblem, gaussian_bump, manufactured_density, random_density

Number = Union[int, float, str]
Entry = Union[float, List[float]]


class _Model(BaseModel):
    model_config = ConfigDict(extra='allow')


# -- payloads ------------------------------------------------------------------

class TorusPayload(_Model):
    """Weight-list torus action. Weights are integers or 'p/q' strings for exact work."""
    weights: List[Union[Number, List[Number]]]
    tau: Optional[Union[Number, List[Number]]] = None
    rank: Optional[int] = None
    pairing_scale: float = 1.0
    projective: bool = False
    point: List[Entry]
    directions: Optional[List[Union[Number, List[Number]]]] = None

    def to_action(self):
        kind = PROJECTIVE if self.projective else LINEAR
        return weight_rep(self.weights, tau=self.tau, kind=kind, rank=self.rank,
                          pairing_scale=self.pairing_scale)

    def to_point(self, a):
        return point(a, decode_vector(self.point))

    def direction_matrices(self):
        out = []
        for d in self.directions or []:
            vals = d if isinstance(d, list) else [d]
            out.append(np.diag([float(_frac(x)) for x in vals]).astype(complex))
        return out


class GroupSpec(_Model):
    kind: Literal['GL', 'SL', 'T', 'product']
    n: int = 0
    pairing_scale: float = 1.0
    factors: List['GroupSpec'] = Field(default_factory=list)

    def build(self):
        if self.kind == 'product':
            return product(*(f.build() for f in self.factors))
        make = {'GL': general_linear, 'SL': special_linear, 'T': diagonal_torus}[self.kind]
        return make(self.n, self.pairing_scale)


class ActionPayload(_Model):
    """Matrix-group action: standard, Sym^d of SL(2)/GL(2), or explicit ρ_*(e_a) matrices."""
    group: Optional[GroupSpec] = None
    representation: Literal['standard', 'sym_power', 'matrices'] = 'standard'
    degree: Optional[int] = None
    matrices: Optional[List[List[List[Entry]]]] = None
    tau: Optional[List[List[Entry]]] = None
    point: Optional[List[Entry]] = None
    binary_form: Optional[List[Number]] = None
    directions: Optional[List[List[List[Entry]]]] = None

    def to_action(self, kind):
        tau = None if self.tau is None else decode_matrix(self.tau)
        if self.representation == 'sym_power':
            if self.degree is None:
                raise SchemaError("sym_power representation needs 'degree'")
            gk = self.group.kind if self.group is not None else 'SL'
            return symmetric_power_rep(self.degree, gk, kind, tau)
        if self.group is None:
            raise SchemaError(f"'{self.representation}' representation needs 'group'")
        group = self.group.build()
        if self.representation == 'standard':
            return standard_rep(group, kind, tau)
        if self.matrices is None:
            raise SchemaError("matrices representation needs 'matrices'")
        return matrix_action(group, [decode_matrix(m) for m in self.matrices], kind, tau)

    def to_point(self, a):
        if self.binary_form is not None:
            return point(a, binary_form_vector([float(_frac(c)) for c in self.binary_form]))
        if self.point is None:
            raise SchemaError("give 'point' or 'binary_form'")
        return point(a, decode_vector(self.point))

    def direction_matrices(self):
        return [decode_matrix(m) for m in self.directions or []]


class DensitySpec(_Model):
    kind: Literal['gaussian', 'constant', 'manufactured', 'random']
    mass: float = 2.0
    width: float = 0.1
    center: List[float] = Field(default_factory=lambda: [0.5, 0.5])


class VortexPayload(_Model):
    grid_n: int
    degree: int
    t_param: float
    phi0_sq: Optional[List[float]] = None          # flat row-major
    density: Optional[DensitySpec] = None
    t_scan: Optional[List[float]] = None
    dump_field: bool = False

    @field_validator('grid_n')
    @classmethod
    def _grid(cls, v):
        if v < 3:
            raise ValueError("grid_n must be at least 3")
        return v

    def to_problem(self, seed=None):
        """Build the VortexProblem; a 'random' density draws from the problem-file seed."""
        n = self.grid_n
        if self.phi0_sq is not None:
            if len(self.phi0_sq) != n * n:
                raise SchemaError(f"phi0_sq needs {n * n} values, got {len(self.phi0_sq)}")
            m = np.array(self.phi0_sq, dtype=float).reshape(n, n)
        elif self.density is not None:
            d = self.density
            if d.kind == 'gaussian':
                m = gaussian_bump(n, d.mass, tuple(d.center), d.width)
            elif d.kind == 'manufactured':
                m = manufactured_density(n, d.mass)
            elif d.kind == 'random':
                if seed is None:
                    raise SchemaError("a 'random' density needs the problem-file 'seed'")
                m = random_density(n, d.mass, seed)
            else:
                m = np.full((n, n), d.mass)
        else:
            raise SchemaError("vortex payload needs 'phi0_sq' or 'density'")
        return VortexProblem(n, self.degree, m, self.t_param)


class PairPayload(_Model):
    summand_degrees: List[int]
    phi_pattern: Optional[List[bool]] = None
    D_phi_degree: Optional[int] = None
    target_degrees: List[int] = Field(default_factory=list)
    phi_map: Optional[List[List[bool]]] = None
    tau: Optional[Number] = None
    mode: Literal['auto', 'oriented', 'quot'] = 'auto'

    def to_pair(self):
        return split_pair(self.summand_degrees, self.phi_pattern, self.D_phi_degree,
                          self.target_degrees, self.phi_map, self.tau)


GroupSpec.model_rebuild()


PAYLOAD_MODELS = {
    'torus_action': TorusPayload,
    'linear_action': ActionPayload,
    'projective_action': ActionPayload,
    'vortex': VortexPayload,
    'split_pair': PairPayload,
}


class ProblemFile(_Model):
    version: str = config.SCHEMA_VERSION
    kind: Literal['linear_action', 'projective_action', 'torus_action', 'vortex', 'split_pair']
    payload: dict
    seed: Optional[int] = None


class ReportRecord(_Model):
    input_digest: str
    subcommand: str
    kind: str
    outcome: Any
    timings_ms: dict
    tool_version: str
    schema_version: str = config.SCHEMA_VERSION


# -- loading -------------------------------------------------------------------

def _frac(x):
    try:
        return to_fraction(x)
    except NonRationalWeights:
        return float(x)


def _extras(model, prefix=''):
    """Dotted names of every unknown field, recursively."""
    out = [f'{prefix}{k}' for k in (model.model_extra or {})]
    for name in type(model).model_fields:
        val = getattr(model, name)
        items = val if isinstance(val, list) else [val]
        for item in items:
            if isinstance(item, BaseModel):
                out.extend(_extras(item, f'{prefix}{name}.'))
    return out


def parse_problem(raw):
    """Validate a decoded problem dict. Returns (ProblemFile, payload model, unknown field names)."""
    try:
        prob = ProblemFile.model_validate(raw)
        payload = PAYLOAD_MODELS[prob.kind].model_validate(prob.payload)
    except ValidationError as exc:
        raise SchemaError(f"problem file does not match the schema:\n{exc}") from exc
    if prob.version != config.SCHEMA_VERSION:
        raise SchemaError(f"schema version {prob.version!r} not supported (expected {config.SCHEMA_VERSION!r})")
    extras = _extras(prob) + _extras(payload, 'payload.')
    return prob, payload, extras


def load_problem(path):
    """Read a problem file; a top-level JSON list is a batch."""
    try:
        with open(path, encoding='utf-8') as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise SchemaError(f"problem file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return raw if isinstance(raw, list) else [raw]
