"""JSON documents for every object the command line reads or writes.

Parsers raise ``ParseError`` for anything malformed and leave semantic
errors (cycles, non-functorial maps, ...) to the constructors, which the
CLI maps onto the same exit code.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Any

from .cohomology import AbSheaf, FgAbGroup
from .errors import ParseError, SpaceMismatch
from .finposet import Cover, FinitePoset, _mask
from .lattice import DistributiveLattice, build_lattice
from .sheaf import Presheaf, SetSheaf
from .simplicial import CombComplex, SimplicialSet, from_cells


def read_document(path: str) -> tuple[Any, str]:
    """Parsed JSON and the sha256 of the raw bytes; ``-`` reads stdin."""
    try:
        raw = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from e
    try:
        doc = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: not valid JSON ({e})") from e
    return doc, hashlib.sha256(raw).hexdigest()


def _require(doc: Any, keys: tuple[str, ...], what: str) -> dict:
    if not isinstance(doc, dict):
        raise ParseError(f"{what} document must be an object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"{what} document lacks {', '.join(missing)}")
    return doc


def _int(v: Any, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{what} must be an integer")
    return v


def _pairs(v: Any, bound: int, what: str) -> list[tuple[int, int]]:
    if not isinstance(v, list):
        raise ParseError(f"{what} must be a list of pairs")
    out = []
    for p in v:
        if not isinstance(p, list) or len(p) != 2:
            raise ParseError(f"{what} entries must be pairs")
        a, b = _int(p[0], what), _int(p[1], what)
        if not (0 <= a < bound and 0 <= b < bound):
            raise ParseError(f"{what} entry {p} is out of range")
        out.append((a, b))
    return out


def parse_poset(doc: Any) -> FinitePoset:
    d = _require(doc, ("points", "le"), "poset")
    n = _int(d["points"], "points")
    if n < 0:
        raise ParseError("points must be non-negative")
    return FinitePoset(n, _pairs(d["le"], n, "le"))


def parse_lattice(doc: Any) -> DistributiveLattice:
    d = _require(doc, ("elements", "leq"), "lattice")
    m = _int(d["elements"], "elements")
    return build_lattice(_pairs(d["leq"], m, "leq"), m)


def _point_set(v: Any, X: FinitePoset, what: str) -> frozenset[int]:
    if not isinstance(v, list):
        raise ParseError(f"{what} must be a list of points")
    pts = [_int(p, what) for p in v]
    if any(not 0 <= p < X.n for p in pts):
        raise ParseError(f"{what} names a point outside the space")
    return frozenset(pts)


def parse_cover(doc: Any, X: FinitePoset) -> Cover:
    d = _require(doc, ("cover",), "cover")
    if not isinstance(d["cover"], list):
        raise ParseError("cover must be a list of open sets")
    return Cover(X, tuple(_point_set(m, X, "cover member") for m in d["cover"]))


def _space_of(doc: dict, X: FinitePoset | None) -> FinitePoset:
    Y = parse_poset(doc["space"])
    if X is not None and Y != X:
        raise SpaceMismatch("document lives on a different space")
    return Y


def _edge_key(k: str, X: FinitePoset) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in k.split(","))
    except ValueError as e:
        raise ParseError(f"bad map key {k!r}; expected 'x,y'") from e
    if not (0 <= a < X.n and 0 <= b < X.n):
        raise ParseError(f"map key {k!r} is out of range")
    return a, b


def _hashable(v: Any):
    if isinstance(v, list):
        return tuple(_hashable(u) for u in v)
    if isinstance(v, dict):
        raise ParseError("labels must be scalars or lists")
    return v


def _lookup(labels: tuple, value: Any, what: str) -> int:
    v = _hashable(value)
    try:
        return labels.index(v)
    except ValueError as e:
        raise ParseError(f"{what}: {value!r} is not an element of the target") from e


def parse_set_sheaf(doc: Any, X: FinitePoset | None = None) -> SetSheaf:
    d = _require(doc, ("space", "stalks", "gen"), "sheaf")
    Y = _space_of(d, X)
    stalks = d["stalks"]
    if not isinstance(stalks, list) or len(stalks) != Y.n or not all(isinstance(s, list) for s in stalks):
        raise ParseError("stalks must be one list per point")
    labels = [tuple(_hashable(e) for e in s) for s in stalks]
    if any(len(set(s)) != len(s) for s in labels):
        raise ParseError("stalk elements must be distinct")
    if not isinstance(d["gen"], dict):
        raise ParseError("gen must map 'x,y' keys to lists")
    gen = {}
    for k, v in d["gen"].items():
        a, b = _edge_key(k, Y)
        if not isinstance(v, list) or len(v) != len(labels[a]):
            raise ParseError(f"gen {k} must list one target per element of stalk {a}")
        gen[(a, b)] = [_lookup(labels[b], t, f"gen {k}") for t in v]
    return SetSheaf(Y, labels, gen)


def parse_ab_sheaf(doc: Any, X: FinitePoset | None = None) -> AbSheaf:
    d = _require(doc, ("space", "stalks", "gen"), "abelian sheaf")
    Y = _space_of(d, X)
    if not isinstance(d["stalks"], list) or len(d["stalks"]) != Y.n:
        raise ParseError("stalks must be one group per point")
    stalks = []
    for s in d["stalks"]:
        s = _require(s, ("rank",), "group")
        rank = _int(s["rank"], "rank")
        tors = s.get("torsion", [])
        if not isinstance(tors, list):
            raise ParseError("torsion must be a list")
        try:
            stalks.append(FgAbGroup(rank, tuple(_int(t, "torsion") for t in tors)))
        except ValueError as e:
            raise ParseError(str(e)) from e
    if not isinstance(d["gen"], dict):
        raise ParseError("gen must map 'x,y' keys to matrices")
    gen = {}
    for k, M in d["gen"].items():
        a, b = _edge_key(k, Y)
        if not isinstance(M, list) or not all(isinstance(r, list) for r in M):
            raise ParseError(f"gen {k} must be a matrix")
        gen[(a, b)] = [[_int(v, f"gen {k}") for v in r] for r in M]
    return AbSheaf(Y, stalks, gen)


def parse_presheaf(doc: Any, X: FinitePoset | None = None) -> Presheaf:
    d = _require(doc, ("space", "values", "restrictions"), "presheaf")
    Y = _space_of(d, X)
    values: dict[int, tuple] = {}
    if not isinstance(d["values"], list):
        raise ParseError("values must be a list")
    for entry in d["values"]:
        e = _require(entry, ("open", "elements"), "value")
        U = _mask(_point_set(e["open"], Y, "open"))
        if not isinstance(e["elements"], list):
            raise ParseError("elements must be a list")
        labels = tuple(_hashable(v) for v in e["elements"])
        if len(set(labels)) != len(labels):
            raise ParseError("elements of a value must be distinct")
        values[U] = labels
    values.setdefault(0, ("*",))
    res = {}
    if not isinstance(d["restrictions"], list):
        raise ParseError("restrictions must be a list")
    for entry in d["restrictions"]:
        e = _require(entry, ("from", "to", "map"), "restriction")
        U = _mask(_point_set(e["from"], Y, "from"))
        V = _mask(_point_set(e["to"], Y, "to"))
        if U not in values or V not in values:
            raise ParseError("restriction between opens without values")
        if not isinstance(e["map"], list) or len(e["map"]) != len(values[U]):
            raise ParseError("restriction map must list one target per element")
        res[(U, V)] = [_lookup(values[V], t, "restriction") for t in e["map"]]
    return Presheaf(Y, values, res)


def parse_comb_complex(doc: Any) -> CombComplex:
    d = _require(doc, ("V", "J"), "complex")
    if not isinstance(d["V"], list) or not isinstance(d["J"], list):
        raise ParseError("V and J must be lists")
    V = [_hashable(v) for v in d["V"]]
    try:
        return CombComplex(V, [[_hashable(v) for v in s] for s in d["J"]])
    except (TypeError, ValueError) as e:
        raise ParseError(str(e)) from e


def parse_simplicial(doc: Any) -> SimplicialSet:
    """{"d_max": d, "cells": [[{"name", "faces": [name | {"cell", "degeneracy"}]}]]}."""
    d = _require(doc, ("d_max", "cells"), "simplicial set")
    d_max = _int(d["d_max"], "d_max")
    if not isinstance(d["cells"], list):
        raise ParseError("cells must be a list of levels")
    where: dict[str, tuple[int, int]] = {}
    cells = []
    for n, level in enumerate(d["cells"]):
        if not isinstance(level, list):
            raise ParseError("each level must be a list")
        out = []
        for c, cell in enumerate(level):
            cell = _require(cell, ("name",), "cell")
            where[str(cell["name"])] = (n, c)
            if n == 0:
                out.append(())
                continue
            faces = cell.get("faces")
            if not isinstance(faces, list) or len(faces) != n + 1:
                raise ParseError(f"cell {cell['name']} needs {n + 1} faces")
            refs = []
            for f in faces:
                if isinstance(f, dict):
                    f = _require(f, ("cell", "degeneracy"), "face")
                    if str(f["cell"]) not in where:
                        raise ParseError(f"face names unknown cell {f['cell']}")
                    m, z = where[str(f["cell"])]
                    refs.append((m, z, tuple(_int(a, "degeneracy") for a in f["degeneracy"])))
                else:
                    if str(f) not in where or where[str(f)][0] != n - 1:
                        raise ParseError(f"face {f!r} is not a cell of dimension {n - 1}")
                    refs.append(where[str(f)][1])
            out.append(tuple(refs))
        cells.append(out)
    names = [[str(c["name"]) for c in level] for level in d["cells"]]
    try:
        return from_cells(cells, d_max, names=names)
    except (AssertionError, ValueError, IndexError) as e:
        raise ParseError(f"inconsistent simplicial data: {e}") from e


def parse_refinement(doc: Any, X: FinitePoset) -> tuple[Cover, int, dict]:
    d = _require(doc, ("cover", "k", "subcovers"), "refinement")
    cover = parse_cover({"cover": d["cover"]}, X)
    k = _int(d["k"], "k")
    if not isinstance(d["subcovers"], dict):
        raise ParseError("subcovers must map 'a,b,...' keys to lists of opens")
    subs = {}
    for key, members in d["subcovers"].items():
        try:
            J = frozenset(int(t) for t in key.split(","))
        except ValueError as e:
            raise ParseError(f"bad subcover key {key!r}") from e
        if not isinstance(members, list):
            raise ParseError("subcover must be a list of opens")
        subs[J] = [_point_set(m, X, "subcover member") for m in members]
    return cover, k, subs
