"""Run configuration: JSON schema, normalization and construction of model objects.

A config is validated against ``RUN_SCHEMA`` (unknown keys rejected),
normalized to a canonical dict with every default filled in, then turned
into algebra, grid, generator, initial state and evolve settings. Physical
checks (power-of-two axes, containment margins, singular parameter
regimes) happen during construction and surface as ConfigurationError.
"""
import copy
import json

import jsonschema

from . import generator as gen
from . import potentials as pot
from .algebra import AXIS_NAMES, AlgebraParams, ObservableId, PacketSpec, gaussian_state, make_grid
from .errors import ConfigurationError
from .propagator import EvolveConfig

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_triple = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}

VSPEC_SCHEMA = {"oneOf": [
    _obj({"type": {"const": "Zero"}}, ["type"]),
    _obj({"type": {"const": "Harmonic"}, "k": _num, "center": _num}, ["type", "k"]),
    _obj({"type": {"const": "Quartic"}, "k": _num, "lam": _num}, ["type", "k", "lam"]),
    _obj({"type": {"const": "Cosine"}, "A": _num, "kappa": _num}, ["type", "A", "kappa"]),
]}

BASE_SCHEMA = {"oneOf": [
    _obj({"type": {"const": "Bilinear"}, "lam": _num}, ["type", "lam"]),
    _obj({"type": {"const": "GaussianWell"}, "lam": _num, "sigma": _pos, "c1": _num, "c2": _num},
         ["type", "lam", "sigma"]),
    _obj({"type": {"const": "PolynomialSum"}, "coefficients": {"type": "array", "items": _triple}},
         ["type", "coefficients"]),
]}

WSPEC_SCHEMA = _obj({"terms": {"type": "array", "items": _obj({"alpha": _num, "base": BASE_SCHEMA},
                                                              ["alpha", "base"])}}, ["terms"])

RAWW_SCHEMA = _obj({"raw": {"type": "array", "items": _obj({
    "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 4, "maxItems": 4},
    "c": _num}, ["exponents", "c"])}}, ["raw"])

FSPEC_SCHEMA = _obj({"pos_part": {"oneOf": [{"type": "null"}, BASE_SCHEMA]},
                     "mom_part": {"type": "array", "items": _triple}})

ALGEBRA_SCHEMA = _obj({"a1": _num, "a2": _num, "hbar": _pos, "m1": _pos, "m2": _pos}, ["a1", "a2"])

AXIS_SCHEMA = _obj({"n": {"type": "integer"}, "L": _num, "c": _num}, ["n", "L"])

PACKET_SCHEMA = _obj({"x": _num, "p": _num, "chi": _num, "pi": _num, "sigma_x": _pos, "sigma_chi": _pos})

RUN_SCHEMA = _obj({
    "algebra": ALGEBRA_SCHEMA,
    "grid": _obj({name: AXIS_SCHEMA for name in AXIS_NAMES}, ["x1", "chi1"]),
    "generator": _obj({
        "variant": {"enum": sorted(gen.VARIANTS)},
        "v1": VSPEC_SCHEMA,
        "v2": VSPEC_SCHEMA,
        "W": WSPEC_SCHEMA,
        "base": {"oneOf": [{"type": "null"}, BASE_SCHEMA]},
        "F": FSPEC_SCHEMA,
    }, ["variant"]),
    "initial": {"type": "array", "items": PACKET_SCHEMA, "minItems": 1, "maxItems": 2},
    "evolve": _obj({
        "dt": _num, "n_steps": {"type": "integer"}, "record_every": {"type": "integer"},
        "observables": {"type": "array", "items": {"enum": [o.name.lower() for o in ObservableId]}},
        "extras": _obj({"norm": {"type": "boolean"}, "moments": {"type": "integer"},
                        "energy": {"type": "boolean"}, "forces": {"type": "boolean"}}),
    }),
    "output": _obj({"dir": {"type": "string"}, "csv": {"type": "string"}, "summary": {"type": "string"}}),
}, ["algebra", "grid", "generator", "initial"])

CHECK_W_SCHEMA = _obj({
    "algebra": ALGEBRA_SCHEMA,
    "W": {"oneOf": [WSPEC_SCHEMA, RAWW_SCHEMA]},
    "bounds": {"type": "array", "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
               "minItems": 4, "maxItems": 4},
    "n_points": {"type": "integer", "minimum": 64},
}, ["algebra"])

DEFAULT_EVOLVE = {"dt": 0.005, "n_steps": 2000, "record_every": 1,
                  "observables": ["x1", "p1", "x2", "p2"],
                  "extras": {"norm": True, "moments": 0, "energy": False, "forces": False}}
DEFAULT_OUTPUT = {"dir": ".", "csv": "timeseries.csv", "summary": "summary.json"}
DEFAULT_PACKET = {"x": 0.0, "p": 0.0, "chi": 0.0, "pi": 0.0, "sigma_x": 1.0, "sigma_chi": 1.0}


def _path(error):
    return ".".join(str(p) for p in error.absolute_path) or "<root>"


def validate(cfg, schema=RUN_SCHEMA):
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        # oneOf failures report the union; point at the deepest offending key instead
        best = jsonschema.exceptions.best_match([exc]) if exc.context else exc
        raise ConfigurationError(f"{_path(best)}: {best.message}", key=_path(best)) from None


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}", key="path") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}", key="path") from None


def _floats(d):
    return {k: (float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) and k not in ("n",) else v)
            for k, v in d.items()}


def normalize(cfg):
    """Validated copy with every default filled in and stable key order."""
    validate(cfg)
    cfg = copy.deepcopy(cfg)
    out = {}
    alg = {"hbar": 1.0, "m1": 1.0, "m2": 1.0, **cfg["algebra"]}
    out["algebra"] = _floats({k: alg[k] for k in ("a1", "a2", "hbar", "m1", "m2")})
    out["grid"] = {name: _floats({"n": ax["n"], "L": ax["L"], "c": ax.get("c", 0.0)})
                   for name, ax in ((n, cfg["grid"][n]) for n in AXIS_NAMES if n in cfg["grid"])}
    g = cfg["generator"]
    gout = {"variant": g["variant"]}
    for key in ("v1", "v2"):
        gout[key] = _norm_v(g.get(key, {"type": "Zero"}))
    if "W" in g:
        gout["W"] = {"terms": [{"alpha": float(t["alpha"]), "base": _norm_base(t["base"])} for t in g["W"]["terms"]]}
    if g.get("base") is not None:
        gout["base"] = _norm_base(g["base"])
    F = g.get("F", {})
    gout["F"] = {"pos_part": _norm_base(F["pos_part"]) if F.get("pos_part") else None,
                 "mom_part": [[int(m), int(n), float(c)] for m, n, c in F.get("mom_part", [])]}
    out["generator"] = gout
    out["initial"] = [_floats({**DEFAULT_PACKET, **p}) for p in cfg["initial"]]
    ev = {**DEFAULT_EVOLVE, **cfg.get("evolve", {})}
    if "observables" not in cfg.get("evolve", {}) and "x2" not in out["grid"]:
        ev["observables"] = ["x1", "p1"]
    ev["extras"] = {**DEFAULT_EVOLVE["extras"], **cfg.get("evolve", {}).get("extras", {})}
    ev["dt"] = float(ev["dt"])
    out["evolve"] = {k: ev[k] for k in ("dt", "n_steps", "record_every", "observables", "extras")}
    out["evolve"]["extras"] = {k: ev["extras"][k] for k in ("norm", "moments", "energy", "forces")}
    out["output"] = {**DEFAULT_OUTPUT, **cfg.get("output", {})}
    return out


def _norm_v(v):
    defaults = {"Zero": {}, "Harmonic": {"center": 0.0}, "Quartic": {}, "Cosine": {}}[v["type"]]
    return _floats({**defaults, **v})


def _norm_base(b):
    if b["type"] == "PolynomialSum":
        return {"type": "PolynomialSum", "coefficients": [[int(m), int(n), float(c)] for m, n, c in b["coefficients"]]}
    defaults = {"Bilinear": {}, "GaussianWell": {"c1": 0.0, "c2": 0.0}}[b["type"]]
    return _floats({**defaults, **b})


# --- construction -------------------------------------------------------------

def build_v(v):
    t = v["type"]
    if t == "Zero":
        return pot.ZeroV()
    if t == "Harmonic":
        return pot.Harmonic(v["k"], v.get("center", 0.0))
    if t == "Quartic":
        return pot.Quartic(v["k"], v["lam"])
    return pot.Cosine(v["A"], v["kappa"])


def build_base(b):
    t = b["type"]
    if t == "Bilinear":
        return pot.Bilinear(b["lam"])
    if t == "GaussianWell":
        return pot.GaussianWell(b["lam"], b["sigma"], b.get("c1", 0.0), b.get("c2", 0.0))
    return pot.PolynomialSum(tuple((int(m), int(n), float(c)) for m, n, c in b["coefficients"]))


def build_w(w):
    """WSpec or polynomial RawW from a W block; None for an absent block."""
    if w is None:
        return pot.WSpec(())
    if "raw" in w:
        mono = {}
        for item in w["raw"]:
            key = tuple(item["exponents"])
            mono[key] = mono.get(key, 0.0) + float(item["c"])
        return pot.PolynomialRawW(mono)
    return pot.WSpec(tuple((t["alpha"], build_base(t["base"])) for t in w["terms"]))


def build_algebra(a):
    try:
        return AlgebraParams(a["a1"], a["a2"], a.get("hbar", 1.0), a.get("m1", 1.0), a.get("m2", 1.0))
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc), key="algebra") from None


def build_spec(g, algebra):
    cls = gen.VARIANTS[g["variant"]]
    F = g.get("F") or {}
    fspec = gen.FSpec(pos_part=build_base(F["pos_part"]) if F.get("pos_part") else None,
                      mom_part=tuple(tuple(t) for t in F.get("mom_part", ())))
    v1, v2 = build_v(g.get("v1", {"type": "Zero"})), build_v(g.get("v2", {"type": "Zero"}))
    if cls in (gen.GeneralIAS, gen.HybridFiniteA):
        if "W" not in g:
            raise ConfigurationError(f"{g['variant']} needs a W block", key="generator.W")
        return cls(algebra, v1, v2, build_w(g["W"]), fspec)
    if "W" in g:
        raise ConfigurationError(f"{g['variant']} takes a 'base' interaction, not W", key="generator.W")
    if cls is gen.NonInteracting:
        if g.get("base") is not None:
            raise ConfigurationError("NonInteracting takes no interaction", key="generator.base")
        return cls(algebra, v1, v2, fspec)
    base = build_base(g["base"]) if g.get("base") is not None else None
    if base is None and cls is not gen.ClassicalClassical:
        raise ConfigurationError(f"{g['variant']} needs a 'base' interaction", key="generator.base")
    return cls(algebra, v1, v2, base, fspec)


def build_run(cfg):
    """(spec, grid, state, EvolveConfig) from a normalized config."""
    algebra = build_algebra(cfg["algebra"])
    grid = make_grid({name: (ax["n"], ax["L"], ax["c"]) for name, ax in cfg["grid"].items()})
    spec = build_spec(cfg["generator"], algebra)
    gen.validate_spec(spec, grid)
    if len(cfg["initial"]) != len(grid.subsystems):
        raise ConfigurationError(f"initial needs {len(grid.subsystems)} packet(s), one per subsystem",
                                 key="initial")
    state = gaussian_state(grid, algebra, [PacketSpec(**p) for p in cfg["initial"]])
    ev = cfg["evolve"]
    observables = tuple(ObservableId.parse(o) for o in ev["observables"])
    for o in observables:
        if o.subsystem not in grid.subsystems:
            raise ConfigurationError(f"observable {o.name.lower()} needs subsystem {o.subsystem} on the grid",
                                     key="evolve.observables")
    ex = ev["extras"]
    evolve_cfg = EvolveConfig(dt=ev["dt"], n_steps=ev["n_steps"], record_every=ev["record_every"],
                              observables=observables, norm=ex["norm"], moments=ex["moments"],
                              energy=ex["energy"], forces=True)
    return spec, grid, state, evolve_cfg
