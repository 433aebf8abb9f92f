"""Experiment configuration: JSON schema validation and system construction.

Config layout::

    {
      "seed": 7,
      "output": "out",
      "systems": [
        {"name": "s2", "kind": "shift", "N": 2},
        {"name": "cat", "kind": "anosov", "k": 3, "m": 3},
        {"name": "p", "kind": "product", "children": ["s2", "s2"]}
      ],
      "checks": [
        {"system": "s2", "check": "chaos", "eps": "1/8"}
      ]
    }

Rationals are written as ``"p/q"`` strings (or JSON integers).
"""
from __future__ import annotations

import json
from fractions import Fraction

from . import systems as S
from .errors import ConfigParse, ConstructorPrecondition
from .exact import rat
from .group_action import SystemHandle, product_system
from .torus_dynamics import AnosovMatrix, anosov_km

SYSTEM_KINDS = ("shift", "anosov", "linked_twist", "disk", "affine", "rotation",
                "identity", "product")
CHECK_KINDS = ("chaos", "transitivity", "closed_orbit_density", "sensitivity",
               "equicontinuity", "finite_orbit", "orbit")


def _need(d: dict, key: str, path: str, where: str):
    if key not in d:
        raise ConfigParse(path, f"{where}.{key}", "missing")
    return d[key]


def _int(d, key, path, where):
    v = _need(d, key, path, where)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigParse(path, f"{where}.{key}", f"expected integer, got {v!r}")
    return v


def _rat(v, path, field):
    try:
        return rat(v)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigParse(path, field, f"expected rational 'p/q', got {v!r}") from e


def build_system(spec: dict, registry: dict | None = None, path: str = "<spec>",
                 where: str = "system") -> SystemHandle:
    """Instantiate one system spec; ``registry`` resolves child names."""
    registry = registry or {}
    if not isinstance(spec, dict):
        raise ConfigParse(path, where, "system spec must be an object")
    kind = _need(spec, "kind", path, where)
    try:
        if kind == "shift":
            sys = S.shift_system(_int(spec, "N", path, where))
        elif kind == "anosov":
            if "a" in spec:
                A = AnosovMatrix(*(_int(spec, c, path, where) for c in "abcd"))
            else:
                A = anosov_km(_int(spec, "k", path, where), _int(spec, "m", path, where))
            sys = S.anosov_system(A)
        elif kind == "linked_twist":
            sys = S.linked_twist_system(_int(spec, "k", path, where), _int(spec, "m", path, where))
        elif kind == "disk":
            sys = S.disk_system(_int(spec, "k", path, where), _int(spec, "m", path, where))
        elif kind == "affine":
            sys = S.affine_example_system(_int(spec, "n", path, where),
                                          _rat(_need(spec, "lambda", path, where), path,
                                               f"{where}.lambda"))
        elif kind == "rotation":
            sys = S.rotation_system(_rat(_need(spec, "alpha", path, where), path,
                                         f"{where}.alpha"))
        elif kind == "identity":
            sys = S.identity_system(_resolve(_need(spec, "base", path, where), registry, path,
                                             f"{where}.base"))
        elif kind == "product":
            weights = spec.get("weights", "dyadic")
            if weights not in ("dyadic", None):
                raise ConfigParse(path, f"{where}.weights",
                                  "only the dyadic weights 2^-i are supported")
            children = _need(spec, "children", path, where)
            if not isinstance(children, list) or not children:
                raise ConfigParse(path, f"{where}.children", "expected a nonempty list")
            sys = product_system([_resolve(c, registry, path, f"{where}.children[{i}]")
                                  for i, c in enumerate(children)])
            sys.spec = {"kind": "product", "children": [c.spec for c in sys.factors]}
        else:
            raise ConfigParse(path, f"{where}.kind", f"unknown system kind {kind!r}")
    except ConstructorPrecondition as e:
        raise ConstructorPrecondition(f"{path}: {where}: {e}") from e
    if "name" in spec:
        sys.name = spec["name"]
    return sys


def _resolve(ref, registry, path, where):
    if isinstance(ref, str):
        if ref not in registry:
            raise ConfigParse(path, where, f"unknown system {ref!r}")
        return registry[ref]
    return build_system(ref, registry, path, where)


def parse_system_arg(text: str) -> SystemHandle:
    """CLI system spec: JSON object or compact ``kind:args`` form.

    Compact forms: ``shift:2``, ``anosov:3,3``, ``anosov:2,1,1,1``,
    ``linked_twist:3,3``, ``disk:3,3``, ``affine:2,2``, ``rotation:1/5``,
    ``product:shift:2+shift:3``.
    """
    text = text.strip()
    if text.startswith("{"):
        return build_system(json.loads(text), path="--system")
    return build_system(compact_spec(text), path="--system")


def compact_spec(text: str) -> dict:
    kind, _, args = text.partition(":")
    kind = kind.strip()
    if kind == "product":
        return {"kind": "product", "children": [compact_spec(c) for c in args.split("+")]}
    if kind == "identity":
        return {"kind": "identity", "base": compact_spec(args)}
    vals = [a.strip() for a in args.split(",") if a.strip()]
    try:
        if kind == "shift":
            return {"kind": "shift", "N": int(vals[0])}
        if kind == "anosov":
            if len(vals) == 4:
                return dict(zip(["kind", "a", "b", "c", "d"], ["anosov", *map(int, vals)]))
            return {"kind": "anosov", "k": int(vals[0]), "m": int(vals[1])}
        if kind in ("linked_twist", "disk"):
            return {"kind": kind, "k": int(vals[0]), "m": int(vals[1])}
        if kind == "affine":
            return {"kind": "affine", "n": int(vals[0]), "lambda": vals[1]}
        if kind == "rotation":
            return {"kind": "rotation", "alpha": vals[0]}
    except (IndexError, ValueError) as e:
        raise ConfigParse("--system", kind, f"bad arguments {args!r}") from e
    raise ConfigParse("--system", "kind", f"unknown system kind {kind!r}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigParse(path, "<file>", str(e)) from e
    except json.JSONDecodeError as e:
        raise ConfigParse(path, "<json>", str(e)) from e
    validate_config(cfg, path)
    return cfg


def validate_config(cfg: dict, path: str = "<config>") -> None:
    if not isinstance(cfg, dict):
        raise ConfigParse(path, "<root>", "config must be an object")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigParse(path, "seed", "expected integer")
    systems = cfg.get("systems", [])
    if not isinstance(systems, list):
        raise ConfigParse(path, "systems", "expected a list")
    names = set()
    for i, spec in enumerate(systems):
        where = f"systems[{i}]"
        if not isinstance(spec, dict):
            raise ConfigParse(path, where, "expected an object")
        name = _need(spec, "name", path, where)
        if name in names:
            raise ConfigParse(path, f"{where}.name", f"duplicate name {name!r}")
        names.add(name)
        if spec.get("kind") not in SYSTEM_KINDS:
            raise ConfigParse(path, f"{where}.kind", f"unknown system kind {spec.get('kind')!r}")
    checks = cfg.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigParse(path, "checks", "expected a list")
    for i, chk in enumerate(checks):
        where = f"checks[{i}]"
        if not isinstance(chk, dict):
            raise ConfigParse(path, where, "expected an object")
        if _need(chk, "system", path, where) not in names:
            raise ConfigParse(path, f"{where}.system", f"unknown system {chk['system']!r}")
        if _need(chk, "check", path, where) not in CHECK_KINDS:
            raise ConfigParse(path, f"{where}.check", f"unknown check {chk['check']!r}")
        for key in ("eps", "delta"):
            if key in chk:
                vals = chk[key] if key == "eps" and isinstance(chk[key], list) else [chk[key]]
                for v in vals:
                    _rat(v, path, f"{where}.{key}")


def build_registry(cfg: dict, path: str = "<config>") -> dict:
    registry: dict = {}
    for i, spec in enumerate(cfg.get("systems", [])):
        registry[spec["name"]] = build_system(spec, registry, path, f"systems[{i}]")
    return registry


def as_fraction_list(values) -> list:
    return [rat(v) if not isinstance(v, Fraction) else v for v in values]
