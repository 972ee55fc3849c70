"""Instance files: a composition of averaged maps plus start point and rate data.

The on-disk format is UTF-8 JSON checked against :data:`INSTANCE_SCHEMA`;
structural problems raise :class:`ParseError`, broken invariants raise
:class:`ValidationError`. Both carry the offending field path.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from .errors import InvalidInput, ParseError, ValidationError
from .operators import (AffineSubspace, AveragedMap, Ball, Box, ConvexSet, Halfspace, LinearMap,
                        LinearMonotone, MonotoneSource, Vector, as_vector, averaged_from_cocoercive,
                        averaged_projection, cocoercivity_constant, compose, rotation)
from .rates import BoundFn, Constant, as_alpha, bound_fn_from_dict, star_many

D_SLACK = 1e-12
FIXED_POINT_TOL = 1e-9
DEFAULT_EPS_GRID = (1.0, 0.1, 0.01)

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}
_mat = {"type": "array", "items": _vec, "minItems": 1}
_pos_or_auto = {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, {"const": "auto"}]}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["id", "dim", "factors", "x0"],
    "additionalProperties": False,
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "dim": {"type": "integer", "minimum": 1, "maximum": 1024},
        "factors": {
            "type": "array", "minItems": 2,
            "items": {
                "type": "object",
                "required": ["alpha", "kind", "params"],
                "additionalProperties": False,
                "properties": {
                    "alpha": {"type": ["number", "string"]},
                    "kind": {"enum": ["projection", "rotation_avg", "linear_resolvent", "averaged_linear"]},
                    "params": {"type": "object"},
                },
            },
        },
        "x0": _vec,
        "K": {
            "oneOf": [
                {"const": "auto"},
                {"type": "object", "required": ["form", "value"], "additionalProperties": False,
                 "properties": {"form": {"const": "constant"}, "value": _num}},
                {"type": "object", "required": ["form", "c0", "c", "k"], "additionalProperties": False,
                 "properties": {"form": {"const": "inverse_power"}, "c0": _num, "c": _num, "k": _num}},
                {"type": "object", "required": ["form", "points"], "additionalProperties": False,
                 "properties": {"form": {"const": "table"},
                                "points": {"type": "array", "minItems": 1,
                                           "items": {"type": "array", "items": _num,
                                                     "minItems": 2, "maxItems": 2}}}},
            ],
        },
        "b": _pos_or_auto,
        "d": _pos_or_auto,
        "eps_grid": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "metadata": {
            "type": "object",
            "required": ["k_justification"],
            "properties": {
                "k_justification": {"type": "string"},
                "common_fixed_point": _vec,
            },
        },
    },
}

_SET_SCHEMAS = {
    "halfspace": {"required": ["normal", "offset"], "properties": {"normal": _vec, "offset": _num}},
    "ball": {"required": ["center", "radius"], "properties": {"center": _vec, "radius": _num}},
    "box": {"required": ["lower", "upper"], "properties": {"lower": _vec, "upper": _vec}},
    "affine": {"required": ["basis", "anchor"], "properties": {"basis": {"type": "array", "items": _vec},
                                                              "anchor": _vec}},
}

_PARAM_SCHEMAS = {
    "projection": {"required": ["set"], "properties": {"set": {"type": "object", "required": ["type"]}}},
    "rotation_avg": {"required": ["theta"], "properties": {
        "theta": _num, "scale": _num,
        "plane": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}}},
    "linear_resolvent": {"required": ["matrix"], "properties": {
        "matrix": _mat, "beta": _pos_or_auto}},
    "averaged_linear": {"required": ["matrix"], "properties": {"matrix": _mat}},
}


@dataclass(frozen=True, eq=False)
class Factor:
    descriptor: dict
    map: AveragedMap
    fixed_point: Vector
    source: MonotoneSource | None = None


@dataclass(frozen=True, eq=False)
class Instance:
    id: str
    dim: int
    factors: tuple[Factor, ...]
    x0: Vector
    K: BoundFn
    b: float
    d: float
    eps_grid: tuple[float, ...]
    metadata: dict = field(default_factory=dict)
    composite: AveragedMap | None = None

    @property
    def m(self) -> int:
        return len(self.factors)

    @property
    def alphas(self) -> tuple[Fraction, ...]:
        return tuple(f.map.alpha for f in self.factors)

    @property
    def alpha(self) -> Fraction:
        return star_many(self.alphas)

    @property
    def common_fixed_point(self) -> Vector | None:
        p = self.metadata.get("common_fixed_point")
        return None if p is None else np.asarray(p, dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "dim": self.dim,
            "factors": [copy.deepcopy(f.descriptor) for f in self.factors],
            "x0": [float(v) for v in self.x0],
            "K": self.K.to_dict(),
            "b": self.b,
            "d": self.d,
            "eps_grid": list(self.eps_grid),
            "metadata": copy.deepcopy(self.metadata),
        }


def _fail(path: str, message: str):
    raise ValidationError(message, path)


def _schema_check(data, schema, path: str) -> None:
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        where = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in exc.absolute_path)
        raise ParseError(exc.message, f"{path}{where}" or "$") from None


def _build_set(spec: dict, dim: int, path: str) -> ConvexSet:
    kind = spec.get("type")
    if kind not in _SET_SCHEMAS:
        raise ParseError(f"unknown set type {kind!r}", f"{path}.type")
    _schema_check(spec, {"type": "object", **_SET_SCHEMAS[kind]}, path)
    if kind == "halfspace":
        cset: ConvexSet = Halfspace(spec["normal"], spec["offset"])
    elif kind == "ball":
        cset = Ball(spec["center"], spec["radius"])
    elif kind == "box":
        cset = Box(spec["lower"], spec["upper"])
    else:
        cset = AffineSubspace(spec["basis"], spec["anchor"])
    if cset.dim != dim:
        _fail(path, f"set dimension {cset.dim} does not match instance dimension {dim}")
    return cset


def _build_factor(desc: dict, dim: int, path: str) -> Factor:
    kind, params = desc["kind"], desc["params"]
    _schema_check(params, {"type": "object", **_PARAM_SCHEMAS[kind]}, f"{path}.params")
    raw_alpha = desc["alpha"]
    if raw_alpha == "auto" and kind != "linear_resolvent":
        _fail(f"{path}.alpha", "alpha 'auto' is only allowed for linear_resolvent factors")
    alpha = None
    if raw_alpha != "auto":
        try:
            alpha = as_alpha(raw_alpha)
        except InvalidInput as exc:
            _fail(f"{path}.alpha", str(exc))

    origin = np.zeros(dim)
    if kind == "projection":
        cset = _build_set(params["set"], dim, f"{path}.params.set")
        return Factor(desc, averaged_projection(cset, alpha), cset.point())
    if kind == "rotation_avg":
        plane = tuple(params.get("plane", (0, 1)))
        inner = rotation(params["theta"], dim, plane, params.get("scale", 1.0))
        return Factor(desc, AveragedMap(alpha, inner), origin)
    if kind == "averaged_linear":
        inner = LinearMap(params["matrix"])
        if inner.dim != dim:
            _fail(f"{path}.params.matrix", f"matrix dimension {inner.dim} does not match {dim}")
        return Factor(desc, AveragedMap(alpha, inner), origin)
    # linear_resolvent
    src = LinearMonotone(params["matrix"])
    if src.dim != dim:
        _fail(f"{path}.params.matrix", f"matrix dimension {src.dim} does not match {dim}")
    raw_beta = params.get("beta", "auto")
    beta = Fraction(cocoercivity_constant(src)) if raw_beta == "auto" else Fraction(raw_beta)
    if raw_beta != "auto":
        src = LinearMonotone(params["matrix"], beta=float(beta))
    tightest = 1 / (1 + beta)
    if alpha is None:
        alpha = tightest
    elif alpha < tightest:
        _fail(f"{path}.alpha", f"alpha {alpha} is below (1+beta)^-1 = {float(tightest)!r}")
    # a larger alpha corresponds to the smaller, still valid, constant 1/alpha - 1
    return Factor(desc, averaged_from_cocoercive(src, 1 / alpha - 1), origin, src)


def instance_from_dict(data: dict) -> Instance:
    """Validate a decoded instance document and build the :class:`Instance`."""
    _schema_check(data, INSTANCE_SCHEMA, "$")
    dim = data["dim"]
    try:
        factors = []
        for i, desc in enumerate(data["factors"]):
            try:
                factors.append(_build_factor(desc, dim, f"$.factors[{i}]"))
            except InvalidInput as exc:
                _fail(f"$.factors[{i}]", str(exc))
        try:
            x0 = as_vector(data["x0"], dim)
        except InvalidInput as exc:
            _fail("$.x0", str(exc))
        composite = compose([f.map for f in factors])

        norm_x0 = float(np.linalg.norm(x0))
        b = data.get("b", "auto")
        if b == "auto":
            b = norm_x0 if norm_x0 > 0 else 1.0
        elif b < norm_x0:
            _fail("$.b", f"b={b!r} is below |x0|={norm_x0!r}")
        disp = float(np.linalg.norm(x0 - composite(x0)))
        d = data.get("d", "auto")
        if d == "auto":
            d = disp + D_SLACK
        elif d < disp:
            _fail("$.d", f"d={d!r} is below |x0 - R x0|={disp!r}")

        k_spec = data.get("K", "auto")
        if k_spec == "auto":
            worst = max(float(np.linalg.norm(f.fixed_point)) for f in factors)
            K = Constant(worst if worst > 0 else 1)
        else:
            try:
                K = bound_fn_from_dict(k_spec)
            except InvalidInput as exc:
                _fail("$.K", str(exc))

        metadata = copy.deepcopy(data.get("metadata", {"k_justification": "default: max fixed-point norm"}))
        if "common_fixed_point" in metadata:
            p = as_vector(metadata["common_fixed_point"], dim)
            for i, f in enumerate(factors):
                if np.linalg.norm(f.map(p) - p) > FIXED_POINT_TOL:
                    _fail("$.metadata.common_fixed_point", f"not a fixed point of factor {i}")
    except InvalidInput as exc:
        raise ValidationError(str(exc), "$") from None

    eps_grid = tuple(float(e) for e in data.get("eps_grid", DEFAULT_EPS_GRID))
    return Instance(id=data["id"], dim=dim, factors=tuple(factors), x0=x0, K=K, b=float(b), d=float(d),
                    eps_grid=eps_grid, metadata=metadata, composite=composite)


def parse_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "$") from None
    return instance_from_dict(data)


def serialize_instance(inst: Instance) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline, auto fields resolved."""
    return json.dumps(inst.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_instance(path: str | Path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))
