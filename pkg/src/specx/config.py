"""Run configuration: YAML parsing, validation and defaults.

A config file is a YAML mapping::

    schema: 1
    model:
      variant: two_body            # see specx.models.VARIANTS
      hopping: {1: 1.0}
      params: {potential: {0: -3.0}}
    tolerances:
      merge_gap: null              # > 0, or null for the adaptive rule
      two_body_tol: 1.0e-10
      limit_tol: 1.0e-6
    oracle:
      sizes: [1000, 4000]          # strictly increasing
      boundary_fraction: 0.1
      boundary_mass: 0.5
      essential_only: null         # null: variant default
      samples: 4096
      metric: null                 # hausdorff | oracle_to_assembled | assembled_to_oracle
      tolerance: null              # declared pass tolerance; null: variant default
    torus:
      sizes: [16]
      operator: random             # random | hermitian | shift | diagonal | localized_projector | position_momentum
      seed: 0
    output:
      json: null
      csv: null

Only ``model`` is required (and only for model commands).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from . import coefficients as cf
from . import limit_solvers as ls
from .errors import ConstraintViolation, InvalidSpec, ParseError, UnknownId, UnsupportedLattice
from .localization import LocalizationConfig
from .models import VARIANTS, ModelSpec, OracleConfig, build

SCHEMA_VERSION = 1

METRICS = ("hausdorff", "oracle_to_assembled", "assembled_to_oracle")
TORUS_OPERATORS = ("random", "hermitian", "shift", "diagonal", "localized_projector",
                   "position_momentum")

# variant -> (oracle sizes, essential_only, metric, declared tolerance)
VARIANT_DEFAULTS = {
    "two_body": ([1000, 4000], True, "hausdorff", 1e-3),
    "slowly_oscillating": ([20000, 100000], False, "hausdorff", 0.05),
    "sparse_klaus": ([10000, 50000], False, "oracle_to_assembled", 0.05),
    "warped_periodic": ([20000, 100000], True, "hausdorff", 0.05),
    "grassmann_nbody": ([30, 60], True, "hausdorff", 0.3),
}

_TOP_KEYS = {"schema", "model", "tolerances", "oracle", "torus", "output"}


@dataclass(frozen=True)
class Tolerances:
    merge_gap: float | None = None
    two_body_tol: float = ls.EDGE_TOL
    limit_tol: float = 1e-6


@dataclass(frozen=True)
class OracleSettings:
    sizes: tuple = ()
    boundary_fraction: float = 0.1
    boundary_mass: float = 0.5
    essential_only: bool = False
    samples: int = 4096
    metric: str = "hausdorff"
    tolerance: float = 0.05

    def filter_cfg(self, merge_gap: float | None = None) -> OracleConfig:
        return OracleConfig(boundary_fraction=self.boundary_fraction,
                            boundary_mass=self.boundary_mass,
                            essential_only=self.essential_only,
                            samples=self.samples, merge_gap=merge_gap)


@dataclass(frozen=True)
class TorusSettings:
    sizes: tuple = (16,)
    operator: str = "random"
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec | None
    tolerances: Tolerances = field(default_factory=Tolerances)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    torus: TorusSettings = field(default_factory=TorusSettings)
    output: dict = field(default_factory=dict)
    schema: int = SCHEMA_VERSION

    def localization_cfg(self) -> LocalizationConfig:
        return LocalizationConfig(tol=self.tolerances.limit_tol, edge_tol=self.tolerances.two_body_tol)

    def to_dict(self) -> dict:
        o, t = self.oracle, self.torus
        return {
            "schema": self.schema,
            "model": self.model.to_dict() if self.model else None,
            "tolerances": {"merge_gap": self.tolerances.merge_gap,
                           "two_body_tol": self.tolerances.two_body_tol,
                           "limit_tol": self.tolerances.limit_tol},
            "oracle": {"sizes": list(o.sizes), "boundary_fraction": o.boundary_fraction,
                       "boundary_mass": o.boundary_mass, "essential_only": o.essential_only,
                       "samples": o.samples, "metric": o.metric, "tolerance": o.tolerance},
            "torus": {"sizes": list(t.sizes), "operator": t.operator, "seed": t.seed},
        }


# ---------------------------------------------------------------------------
# typed accessors with location-aware errors

def _section(data: dict, key: str) -> dict:
    v = data.get(key)
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ParseError(key, "expected a mapping")
    return v


def _unknown_keys(d: dict, allowed: set, where: str):
    extra = sorted(map(str, set(d) - allowed))
    if extra:
        raise ParseError(where, f"unknown keys {extra}")


def _number(d: dict, key: str, where: str, default, positive: bool = True, integer: bool = False):
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ParseError(f"{where}.{key}", f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConstraintViolation(f"{where}.{key} must be > 0, got {v!r}")
    return int(v) if integer else float(v)


def _sizes(d: dict, where: str, default) -> tuple:
    v = d.get("sizes", default)
    if not isinstance(v, (list, tuple)) or not v:
        raise ParseError(f"{where}.sizes", "expected a non-empty list of integers")
    out = []
    for i, s in enumerate(v):
        if isinstance(s, bool) or not isinstance(s, (int, float)) or int(s) != s:
            raise ParseError(f"{where}.sizes[{i}]", f"expected an integer, got {s!r}")
        if s <= 0:
            raise ConstraintViolation(f"{where}.sizes[{i}] must be > 0")
        out.append(int(s))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConstraintViolation(f"{where}.sizes must be strictly increasing, got {out}")
    return tuple(out)


def _check_ids(spec: ModelSpec):
    p = spec.params
    if spec.variant == "slowly_oscillating":
        e = p.get("expr", "sin_sqrt")
        if e not in cf.OSCILLATORS:
            raise UnknownId(f"unknown expression id {e!r}; known: {sorted(cf.OSCILLATORS)}")
    elif spec.variant == "sparse_klaus":
        s = p.get("schedule", "square")
        if s not in cf.SCHEDULES:
            raise UnknownId(f"unknown schedule id {s!r}; known: {sorted(cf.SCHEDULES)}")
    elif spec.variant == "warped_periodic":
        w = p.get("warp", "identity")
        if w not in cf.WARPS:
            raise UnknownId(f"unknown warp id {w!r}; known: {sorted(cf.WARPS)}")


def _model(data: dict) -> ModelSpec | None:
    if "model" not in data or data["model"] is None:
        return None
    m = data["model"]
    if not isinstance(m, dict):
        raise ParseError("model", "expected a mapping")
    _unknown_keys(m, {"variant", "hopping", "params"}, "model")
    variant = m.get("variant")
    if not isinstance(variant, str):
        raise ParseError("model.variant", "expected a string")
    if variant not in VARIANTS:
        raise UnknownId(f"unknown model variant {variant!r}; known: {list(VARIANTS)}")
    hopping = m.get("hopping", {1: 1.0})
    params = m.get("params") or {}
    if not isinstance(hopping, dict):
        raise ParseError("model.hopping", "expected a mapping offset -> weight")
    if not isinstance(params, dict):
        raise ParseError("model.params", "expected a mapping")
    try:
        spec = ModelSpec(variant, hopping, params)
    except (InvalidSpec, TypeError, ValueError) as exc:
        raise ConstraintViolation(f"model: {exc}") from exc
    _check_ids(spec)
    try:
        build(spec)  # surfaces bad parameter values at load time
    except UnsupportedLattice:
        raise
    except (InvalidSpec, TypeError, ValueError, KeyError) as exc:
        raise ConstraintViolation(f"model: {exc}") from exc
    return spec


def parse_config(text: str) -> RunConfig:
    """Parse and validate YAML config text.

    Raises
    ------
    ParseError
        Malformed YAML or a value of the wrong type (with its location).
    UnknownId
        A variant, expression, schedule, warp or torus operator id that is
        not registered.
    ConstraintViolation
        Non-positive tolerances, non-increasing size schedules and
        model parameters rejected by the builders.
    UnsupportedLattice
        Interactions along an axis that the N-body model does not have.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "document"
        raise ParseError(loc, getattr(exc, "problem", None) or str(exc)) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("document", "top level must be a mapping")
    _unknown_keys(data, _TOP_KEYS, "document")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConstraintViolation(f"unsupported schema {schema!r} (this version reads {SCHEMA_VERSION})")

    model = _model(data)
    defaults = VARIANT_DEFAULTS.get(model.variant) if model else None

    t = _section(data, "tolerances")
    _unknown_keys(t, {"merge_gap", "two_body_tol", "limit_tol"}, "tolerances")
    tol = Tolerances(_number(t, "merge_gap", "tolerances", None),
                     _number(t, "two_body_tol", "tolerances", ls.EDGE_TOL),
                     _number(t, "limit_tol", "tolerances", 1e-6))

    o = _section(data, "oracle")
    _unknown_keys(o, {"sizes", "boundary_fraction", "boundary_mass", "essential_only",
                      "samples", "metric", "tolerance"}, "oracle")
    d_sizes, d_ess, d_metric, d_tol = defaults or ([1000], False, "hausdorff", 0.05)
    ess = o.get("essential_only")
    if ess is None:
        ess = d_ess
    elif not isinstance(ess, bool):
        raise ParseError("oracle.essential_only", "expected true, false or null")
    metric = o.get("metric") or d_metric
    if metric not in METRICS:
        raise UnknownId(f"unknown metric {metric!r}; known: {list(METRICS)}")
    bf = _number(o, "boundary_fraction", "oracle", 0.1)
    bm = _number(o, "boundary_mass", "oracle", 0.5)
    if not (bf < 0.5 and bm <= 1):
        raise ConstraintViolation("oracle.boundary_fraction must be < 0.5 and boundary_mass <= 1")
    samples = _number(o, "samples", "oracle", 4096, integer=True)
    if samples < 16:
        raise ConstraintViolation("oracle.samples must be >= 16")
    oracle = OracleSettings(_sizes(o, "oracle", d_sizes), bf, bm, ess, samples, metric,
                            _number(o, "tolerance", "oracle", d_tol))

    tr = _section(data, "torus")
    _unknown_keys(tr, {"sizes", "operator", "seed"}, "torus")
    op = tr.get("operator", "random")
    if op not in TORUS_OPERATORS:
        raise UnknownId(f"unknown torus operator {op!r}; known: {list(TORUS_OPERATORS)}")
    sizes = _sizes(tr, "torus", [16])
    if min(sizes) < 2:
        raise ConstraintViolation("torus.sizes must be >= 2")
    seed = _number(tr, "seed", "torus", 0, positive=False, integer=True)
    torus = TorusSettings(sizes, op, seed)

    out = _section(data, "output")
    _unknown_keys(out, {"json", "csv"}, "output")
    for k, v in out.items():
        if v is not None and not isinstance(v, str):
            raise ParseError(f"output.{k}", "expected a path string")

    return RunConfig(model, tol, oracle, torus, dict(out), schema)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(path, exc.strerror or str(exc)) from exc
    return parse_config(text)
