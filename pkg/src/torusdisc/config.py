"""Sweep configuration documents and the JSON map-expression format.

A map document is either the name of a built-in map or a composition tree
mirroring the expression types one-to-one (no simplification):

    {"compose": [{"shear_y": {"terms": [...]}},
                 {"linear": [[1, 1], [1, 2]]},
                 "identity"]}

Atoms are applied right-to-left, matching written composition order.  A
trig term is {"kind": "cos"|"sin", "coef": c, "freq": n, "var": "x"|"y"};
a tanh term is {"kind": "tanh", "coef": c, "slope": s, "inner": <trig>}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .torusmaps import (
    Identity,
    LinearAuto,
    MapExpr,
    ScalarField,
    ShearX,
    ShearY,
    TanhTerm,
    TrigTerm,
    builtin_map,
)

DEFAULT_MAX_BYTES = 2 * 1024**3
DEFAULT_MAX_SECONDS = 600.0
ANALYSIS_FLAGS = ("stats", "measure", "weakmix", "shadow")


def _require(cond, path, message):
    if not cond:
        raise ConfigError(path, message)


def term_from_doc(doc, path):
    _require(isinstance(doc, dict), path, "term must be an object")
    kind = doc.get("kind")
    if kind in ("cos", "sin"):
        for key in ("coef", "freq", "var"):
            _require(key in doc, f"{path}.{key}", "missing field")
        return TrigTerm(float(doc["coef"]), int(doc["freq"]), kind, doc["var"])
    if kind == "tanh":
        for key in ("coef", "slope", "inner"):
            _require(key in doc, f"{path}.{key}", "missing field")
        inner = term_from_doc(doc["inner"], f"{path}.inner")
        _require(isinstance(inner, TrigTerm), f"{path}.inner", "inner term must be trigonometric")
        return TanhTerm(float(doc["coef"]), float(doc["slope"]), inner)
    raise ConfigError(f"{path}.kind", f"unknown term kind {kind!r}")


def _field_from_doc(doc, path):
    _require(isinstance(doc, dict) and "terms" in doc, path, "expected {'terms': [...]}")
    terms = doc["terms"]
    _require(isinstance(terms, list) and terms, f"{path}.terms", "must be a nonempty list")
    return ScalarField(
        tuple(term_from_doc(t, f"{path}.terms[{n}]") for n, t in enumerate(terms))
    )


def _atom_from_doc(doc, path):
    if doc == "identity":
        return Identity()
    _require(isinstance(doc, dict) and len(doc) == 1, path, "atom must be 'identity' or a one-key object")
    (key, val), = doc.items()
    if key == "shear_y":
        return ShearY(_field_from_doc(val, f"{path}.shear_y"))
    if key == "shear_x":
        return ShearX(_field_from_doc(val, f"{path}.shear_x"))
    if key == "linear":
        _require(
            isinstance(val, list) and len(val) == 2 and all(len(r) == 2 for r in val),
            f"{path}.linear",
            "expected a 2x2 integer matrix",
        )
        return LinearAuto(int(val[0][0]), int(val[0][1]), int(val[1][0]), int(val[1][1]))
    raise ConfigError(path, f"unknown atom {key!r}")


def map_from_doc(doc, path="map") -> MapExpr:
    if isinstance(doc, str):
        return builtin_map(doc)
    _require(isinstance(doc, dict) and "compose" in doc, path, "expected a name or {'compose': [...]}")
    atoms = doc["compose"]
    _require(isinstance(atoms, list) and atoms, f"{path}.compose", "must be a nonempty list")
    return MapExpr(
        tuple(_atom_from_doc(a, f"{path}.compose[{n}]") for n, a in enumerate(atoms))
    )


def map_to_doc(f: MapExpr):
    def term_doc(t):
        if isinstance(t, TrigTerm):
            return {"kind": t.kind, "coef": t.coef, "freq": t.freq, "var": t.var}
        return {"kind": "tanh", "coef": t.coef, "slope": t.slope, "inner": term_doc(t.inner)}

    def atom_doc(a):
        if isinstance(a, Identity):
            return "identity"
        if isinstance(a, ShearY):
            return {"shear_y": {"terms": [term_doc(t) for t in a.field.terms]}}
        if isinstance(a, ShearX):
            return {"shear_x": {"terms": [term_doc(t) for t in a.field.terms]}}
        return {"linear": [[a.a, a.b], [a.c, a.d]]}

    return {"compose": [atom_doc(a) for a in f.atoms]}


@dataclass
class SweepConfig:
    map_doc: object
    schedule: list
    analyses: dict = field(default_factory=lambda: {"stats": True})
    max_bytes: int = DEFAULT_MAX_BYTES
    max_seconds: float = DEFAULT_MAX_SECONDS
    seed: int = 0
    out_dir: str = "sweep-out"
    px: int = 128

    def map_expr(self) -> MapExpr:
        return map_from_doc(self.map_doc)

    def canonical_map_doc(self):
        return self.map_doc if isinstance(self.map_doc, str) else map_to_doc(self.map_expr())


def _schedule_from_doc(doc, path):
    if isinstance(doc, list):
        ks = [int(k) for k in doc]
    elif isinstance(doc, dict) and "base" in doc and "multipliers" in doc:
        base = int(doc["base"])
        _require(base >= 1, f"{path}.base", "must be positive")
        mults = doc["multipliers"]
        _require(isinstance(mults, list) and mults, f"{path}.multipliers", "must be a nonempty list")
        ks = [base * int(m) for m in mults]
    else:
        raise ConfigError(path, "expected a list of k or {'base': ..., 'multipliers': [...]}")
    _require(bool(ks), path, "schedule must be nonempty")
    _require(
        all(b > a for a, b in zip(ks, ks[1:])),
        path,
        "resolutions must be strictly increasing",
    )
    _require(all(k >= 2 for k in ks), path, "resolutions must be >= 2")
    return ks


def parse_config(document) -> SweepConfig:
    """Validate a config document (dict, JSON text, or path to a JSON file)."""
    if isinstance(document, (str, Path)) and Path(document).exists():
        document = json.loads(Path(document).read_text())
    elif isinstance(document, str):
        document = json.loads(document)
    _require(isinstance(document, dict), "$", "config must be a JSON object")
    _require("map" in document, "map", "missing field")
    _require("schedule" in document, "schedule", "missing field")
    map_doc = document["map"]
    map_from_doc(map_doc)  # validate early; raises with field paths
    schedule = _schedule_from_doc(document["schedule"], "schedule")
    analyses = {"stats": True, "measure": False, "weakmix": False, "shadow": False}
    for key, val in document.get("analyses", {}).items():
        _require(key in ANALYSIS_FLAGS, f"analyses.{key}", "unknown analysis flag")
        analyses[key] = bool(val)
    budgets = document.get("budgets", {})
    max_bytes = int(budgets.get("max_bytes", DEFAULT_MAX_BYTES))
    max_seconds = float(budgets.get("max_seconds", DEFAULT_MAX_SECONDS))
    _require(max_bytes > 0, "budgets.max_bytes", "must be positive")
    _require(max_seconds > 0, "budgets.max_seconds", "must be positive")
    px = int(document.get("px", 128))
    _require(px >= 1, "px", "must be positive")
    return SweepConfig(
        map_doc=map_doc,
        schedule=schedule,
        analyses=analyses,
        max_bytes=max_bytes,
        max_seconds=max_seconds,
        seed=int(document.get("seed", 0)),
        out_dir=str(document.get("out", "sweep-out")),
        px=px,
    )
