"""Structures from JSON configs, and the named pairs used by the checks.

A config is a plain dict with a ``kind`` and the parameters of that
builder.  Predicates are predicate specs (``{"dsl": ...}`` or a builtin),
functions are DSL sources over ``i, s``.  The same config always yields
the same structure, so configs are what manifests store.
"""

from __future__ import annotations

import json

from .builders import (
    BlockStructure, BoundedCharSpec, CODERS, DiagPair, EnumerableSet, FromS1Structure, FromSStructure,
    IdentityStructure, PairT4, SFunction, TestClassStructure, UnionStructure, build_bounded, computable_copy,
    build_sigma2_inf, opponent_from_spec,
)
from .core import OMEGA, FinitePartitionStructure, Structure
from .predicates import RELATION_VARS, from_spec, parse


class ConfigError(ValueError):
    pass


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def predicate(spec, variables=RELATION_VARS):
    if isinstance(spec, str):
        return parse(spec, variables)
    if "dsl" in spec and "vars" not in spec:
        spec = dict(spec, vars=list(variables))
    return from_spec(spec)


def sfunction(spec) -> SFunction:
    if isinstance(spec, str):
        return SFunction.from_dsl(spec)
    return SFunction.from_dsl(spec["dsl"], spec.get("kind", "s"))


def omega_or_int(v):
    return OMEGA if v in ("omega", "ω") else int(v)


def enumerable(spec) -> EnumerableSet:
    """``{"dsl": "x mod 2 == 1"}`` lists x at stage x when the predicate holds;
    ``{"schedule": {"x": stage}}`` is a finite set; None is empty."""
    if not spec:
        return EnumerableSet.empty()
    if "schedule" in spec:
        return EnumerableSet.finite({int(x): int(s) for x, s in spec["schedule"].items()})
    p = parse(spec["dsl"], ("x",))
    return EnumerableSet(lambda s: [s] if p(s) else [], spec["dsl"])


def _bounded_spec(cfg) -> BoundedCharSpec:
    return BoundedCharSpec(frozenset(cfg.get("repeat", ())), tuple(tuple(p) for p in cfg.get("fixed", ())),
                           omega_or_int(cfg.get("infinite", 0)))


def _pair_t4(cfg) -> PairT4:
    base = cfg["base"]
    M = enumerable(cfg.get("M"))
    k2 = omega_or_int(cfg["k2"])
    if "bounded" in base:
        return PairT4(_bounded_spec(base["bounded"]), int(cfg["k1"]), k2, M)
    f = SFunction.from_dsl(base["f"], "s1")
    return PairT4(f, int(cfg["k1"]), k2, M, predicate(base["pred"]))


def _diag(cfg) -> DiagPair:
    f = SFunction.from_dsl(cfg["f"], "s1")
    return DiagPair(f, predicate(cfg["pred"]), [opponent_from_spec(o) for o in cfg.get("opponents", ())])


def build(cfg: dict) -> Structure:
    """A fresh structure for ``cfg``."""
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ConfigError("config needs a 'kind'") from None
    try:
        if kind == "identity":
            return IdentityStructure()
        if kind == "blocks":
            return BlockStructure(int(cfg["size"]))
        if kind == "finite":
            return FinitePartitionStructure(cfg["blocks"])
        if kind == "sigma2-inf":
            return build_sigma2_inf(predicate(cfg["pred"]))
        if kind == "bounded":
            return build_bounded(_bounded_spec(cfg))
        if kind == "from-s":
            return FromSStructure(sfunction(cfg["f"]), int(cfg.get("r", 0)))
        if kind == "from-s1":
            return FromS1Structure(SFunction.from_dsl(cfg["f"], "s1"), predicate(cfg["pred"]))
        if kind == "pair-t4":
            return getattr(_pair_t4(cfg), cfg.get("side", "D"))
        if kind == "test-class":
            return TestClassStructure(sfunction(cfg["g"]), predicate(cfg["T"], ("t",)))
        if kind == "diag":
            return getattr(_diag(cfg), cfg.get("side", "B1"))
        if kind == "union":
            coder = CODERS[cfg.get("coder", "dyadic")]()
            return UnionStructure([build(p) for p in cfg["parts"]], coder)
        if kind == "copy":
            return computable_copy(build(cfg["of"]), int(cfg.get("block", 2)))
    except KeyError as e:
        raise ConfigError(f"{kind}: missing parameter {e}") from None
    raise ConfigError(f"unknown structure kind {kind!r}")


# ---------------------------------------------------------------------------
# named configs


R_TABLES = {
    # finite-support R tables: entries (k, n, w, r), r None meaning true for every z
    "single": [[2, 1, 0, None]],
    "two-sizes": [[1, 1, 0, None], [1, 2, 1, None], [3, 1, 0, None]],
    "late-witness": [[2, 1, 0, 5], [2, 1, 2, None], [4, 1, 1, None]],
    "decoys": [[1, 1, 0, 3], [1, 1, 1, 7], [2, 1, 0, None], [2, 2, 0, None], [2, 3, 4, 2]],
    "stacked": [[1, 1, 0, None], [1, 2, 0, None], [1, 3, 0, None], [5, 1, 3, None], [5, 2, 9, 1]],
    "gap": [[3, 1, 0, None], [3, 2, 0, None], [6, 1, 2, None], [7, 4, 0, 4]],
}

DSL_PREDICATES = [
    "w == 0 and n == 1 and k <= 4",
    "k <= 3 and n <= 2 and w == k",
    "k mod 2 == 1 and k <= 5 and n <= k and w == 1",
]


def table(name: str) -> dict:
    return {"builtin": "table", "entries": R_TABLES[name]}


BOUNDED_SPECS = [
    {"repeat": [2], "fixed": [[3, 2]], "infinite": 1},
    {"repeat": [1, 3], "fixed": [], "infinite": 0},
    {"repeat": [], "fixed": [[1, 4], [2, 1], [5, 3]], "infinite": 2},
    {"repeat": [2, 4], "fixed": [[1, 1]], "infinite": "omega"},
    {"repeat": [1], "fixed": [[6, 2], [2, 2]], "infinite": 3},
    {"repeat": [], "fixed": [[1, 1]], "infinite": 0},
]


def diag_config(side: str = "B1") -> dict:
    return {"kind": "diag", "f": "2*i + 1", "pred": {"dsl": "w == 0 and k <= 2"}, "side": side,
            "opponents": [{"kind": "identity", "shift": 0, "settle": 5},
                          {"kind": "change", "first": 0, "second": 2, "switch": 40},
                          {"kind": "identity", "shift": 1, "settle": 0},
                          {"kind": "diverged"}]}


__all__ = [
    "ConfigError", "canonical", "predicate", "sfunction", "enumerable", "build", "R_TABLES", "DSL_PREDICATES",
    "table", "BOUNDED_SPECS", "diag_config",
]
