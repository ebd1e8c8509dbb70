"""Parsing of JSON model documents into engine objects.

Complex entries are written either as plain numbers or as ``[re, im]`` pairs.
Every validation failure is raised as :class:`SpecError` carrying the JSON path
of the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .algebra import FiniteCStarAlgebra, StateFunctional, multi_matrix_algebra
from .errors import InvalidInput
from .groups import FiniteGroup, GroupAction, UnitaryRep, preset, regular_rep

__all__ = ["SpecError", "ModelSpec", "parse_spec", "load_spec", "parse_matrix", "parse_vector"]

KNOWN_KEYS = {"group", "algebra", "action", "unitary_rep", "field_rep", "subgroup", "thermal",
              "measurement", "analyses"}


class SpecError(InvalidInput):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _complex(x, path: str) -> complex:
    if isinstance(x, bool):
        raise SpecError(path, "expected a number")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise SpecError(path, "expected a number or an [re, im] pair")


def parse_vector(data, path: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SpecError(path, "expected a non-empty list")
    return np.array([_complex(x, f"{path}[{i}]") for i, x in enumerate(data)])


def parse_matrix(data, path: str, n: int | None = None) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise SpecError(path, "expected a list of rows")
    rows = [parse_vector(r, f"{path}[{i}]") for i, r in enumerate(data)]
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise SpecError(f"{path}[{i}]", f"row has {len(r)} entries, expected {width}")
    m = np.array(rows)
    if m.shape[0] != m.shape[1]:
        raise SpecError(path, f"matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    if n is not None and m.shape[0] != n:
        raise SpecError(path, f"matrix is {m.shape[0]}x{m.shape[0]}, expected {n}x{n}")
    return m


def _int_list(data, path: str) -> list[int]:
    if not isinstance(data, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
        raise SpecError(path, "expected a list of integers")
    return list(data)


def _object(data, path: str) -> dict:
    if not isinstance(data, dict):
        raise SpecError(path, "expected an object")
    return data


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except SpecError:
        raise
    except InvalidInput as exc:
        raise SpecError(path, str(exc)) from exc


def parse_group(data) -> FiniteGroup:
    data = _object(data, "group")
    if "cayley" in data:
        table = data["cayley"]
        if not isinstance(table, list) or not table:
            raise SpecError("group.cayley", "expected a list of rows")
        for i, row in enumerate(table):
            _int_list(row, f"group.cayley[{i}]")
            if len(row) != len(table):
                raise SpecError(f"group.cayley[{i}]", f"row {i} has {len(row)} entries, expected {len(table)}")
        return _wrap("group.cayley", FiniteGroup, np.array(table, dtype=np.int64), str(data.get("name", "")))
    if "preset" in data:
        n = data.get("n")
        if n is not None and (not isinstance(n, int) or isinstance(n, bool)):
            raise SpecError("group.n", "expected an integer")
        return _wrap("group.preset", preset, str(data["preset"]), n)
    raise SpecError("group", "give either 'preset' or 'cayley'")


def parse_state(data, path: str, n: int, extra: dict | None = None) -> StateFunctional:
    """``{"density": M}``, ``{"vector": v}``, ``"maximally_mixed"`` or an entry of ``extra``."""
    if data == "maximally_mixed":
        return StateFunctional.maximally_mixed(n, "maximally_mixed")
    if isinstance(data, str):
        if extra and data in extra:
            return extra[data]
        raise SpecError(path, f"unknown state '{data}'")
    data = _object(data, path)
    if "density" in data:
        return _wrap(path, StateFunctional, parse_matrix(data["density"], f"{path}.density", n))
    if "vector" in data:
        v = parse_vector(data["vector"], f"{path}.vector")
        if v.shape != (n,) or np.linalg.norm(v) == 0:
            raise SpecError(f"{path}.vector", f"expected a non-zero vector of length {n}")
        return StateFunctional.from_vector(v / np.linalg.norm(v))
    raise SpecError(path, "state needs 'density' or 'vector'")


@dataclass
class ModelSpec:
    raw: dict
    group: FiniteGroup | None = None
    algebra: FiniteCStarAlgebra | None = None
    action: GroupAction | None = None
    unitary_rep: UnitaryRep | None = None
    field_multiplicities: tuple[int, ...] | None = None
    subgroup: tuple[int, ...] | None = None
    analyses: tuple[tuple[str, dict], ...] = ()


def _parse_action(data, group: FiniteGroup, alg: FiniteCStarAlgebra) -> GroupAction:
    data = _object(data, "action")
    gens_raw = _object(data.get("generators", {}), "action.generators")
    gens = {}
    for key, spec in gens_raw.items():
        p = f"action.generators.{key}"
        try:
            g = int(key)
        except ValueError:
            raise SpecError(p, "generator keys are element indices") from None
        if not 0 <= g < group.order:
            raise SpecError(p, f"element {g} outside the group")
        spec = _object(spec, p)
        perm = _int_list(spec.get("perm", list(range(len(alg.block_dims)))), f"{p}.perm")
        if sorted(perm) != list(range(len(alg.block_dims))):
            raise SpecError(f"{p}.perm", "not a permutation of the blocks")
        us_raw = spec.get("unitaries")
        if us_raw is None:
            us = [np.eye(d, dtype=complex) for d in alg.block_dims]
        else:
            if not isinstance(us_raw, list) or len(us_raw) != len(alg.block_dims):
                raise SpecError(f"{p}.unitaries", "one unitary per block")
            us = [parse_matrix(u, f"{p}.unitaries[{k}]", d) for k, (u, d) in enumerate(zip(us_raw, alg.block_dims))]
        gens[g] = (perm, us)
    if not gens and group.order > 1:
        nb = len(alg.block_dims)
        eyes = tuple(np.eye(d, dtype=complex) for d in alg.block_dims)
        return _wrap("action", GroupAction, group, alg, np.tile(np.arange(nb), (group.order, 1)),
                     tuple(eyes for _ in range(group.order)))
    return _wrap("action", GroupAction.from_generators, group, alg, gens)


def _parse_unitary_rep(data, group: FiniteGroup) -> UnitaryRep:
    data = _object(data, "unitary_rep")
    if data.get("regular"):
        return regular_rep(group)
    if "permutations" in data:
        perms = _object(data["permutations"], "unitary_rep.permutations")
        mats = {}
        for key, perm in perms.items():
            perm = _int_list(perm, f"unitary_rep.permutations.{key}")
            m = np.zeros((len(perm), len(perm)))
            if sorted(perm) != list(range(len(perm))):
                raise SpecError(f"unitary_rep.permutations.{key}", "not a permutation")
            m[perm, np.arange(len(perm))] = 1
            mats[int(key)] = m
        return _wrap("unitary_rep", UnitaryRep.from_generators, group, mats)
    if "generators" in data:
        gens = _object(data["generators"], "unitary_rep.generators")
        mats = {int(k): parse_matrix(v, f"unitary_rep.generators.{k}") for k, v in gens.items()}
        return _wrap("unitary_rep", UnitaryRep.from_generators, group, mats)
    raise SpecError("unitary_rep", "give 'regular', 'permutations' or 'generators'")


def parse_spec(doc: Any) -> ModelSpec:
    doc = _object(doc, "$")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise SpecError("$", f"unknown sections {unknown}")
    spec = ModelSpec(raw=doc)
    if "group" in doc:
        spec.group = parse_group(doc["group"])
    if "algebra" in doc:
        blocks = _int_list(_object(doc["algebra"], "algebra").get("blocks"), "algebra.blocks")
        spec.algebra = _wrap("algebra.blocks", multi_matrix_algebra, blocks)
    if "action" in doc:
        if spec.group is None or spec.algebra is None:
            raise SpecError("action", "needs 'group' and 'algebra'")
        spec.action = _parse_action(doc["action"], spec.group, spec.algebra)
    if "unitary_rep" in doc:
        if spec.group is None:
            raise SpecError("unitary_rep", "needs 'group'")
        spec.unitary_rep = _parse_unitary_rep(doc["unitary_rep"], spec.group)
    if "field_rep" in doc:
        if spec.algebra is None:
            raise SpecError("field_rep", "needs 'algebra'")
        mult = _int_list(_object(doc["field_rep"], "field_rep").get("multiplicities"), "field_rep.multiplicities")
        if len(mult) != len(spec.algebra.block_dims):
            raise SpecError("field_rep.multiplicities", "one multiplicity per block")
        spec.field_multiplicities = tuple(mult)
    if "subgroup" in doc:
        if spec.group is None:
            raise SpecError("subgroup", "needs 'group'")
        sub = _int_list(doc["subgroup"], "subgroup")
        if not spec.group.is_subgroup(sub):
            raise SpecError("subgroup", f"{sub} is not a subgroup")
        spec.subgroup = tuple(sorted(set(sub)))
    for key in ("thermal", "measurement"):
        if key in doc:
            _object(doc[key], key)
    analyses = doc.get("analyses", [])
    if not isinstance(analyses, list):
        raise SpecError("analyses", "expected a list")
    out = []
    for i, item in enumerate(analyses):
        if isinstance(item, str):
            out.append((item, {}))
        elif isinstance(item, dict) and isinstance(item.get("name"), str):
            out.append((item["name"], {k: v for k, v in item.items() if k != "name"}))
        else:
            raise SpecError(f"analyses[{i}]", "expected a name or an object with 'name'")
    spec.analyses = tuple(out)
    return spec


def load_spec(text: str) -> ModelSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
    return parse_spec(doc)
