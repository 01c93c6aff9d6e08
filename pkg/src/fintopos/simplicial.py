"""Finite simplicial sets truncated at a working dimension.

A ``SimplicialSet`` stores every level 0..d_max explicitly together with
face and degeneracy tables. Most constructions go through ``from_cells``,
which takes nondegenerate cells with face data and generates the degenerate
simplices in Eilenberg-Zilber normal form: a k-simplex is a pair
``(cell, alpha)`` with ``alpha: [k] -> [dim cell]`` a monotone surjection,
written as a nondecreasing tuple.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

from . import intmat
from .errors import DimensionExceeded, NotAGroup, NotKan, NotRegular
from .finposet import Cover, _bits

Op = tuple[int, ...]  # a monotone map [m] -> [n] listed by values


# ---------------------------------------------------------- monotone maps

def surjections(k: int, m: int) -> list[Op]:
    """Monotone surjections [k] -> [m]."""
    out = []
    for cuts in itertools.combinations(range(1, k + 1), m):
        alpha, v = [], 0
        for t in range(k + 1):
            if v < m and t == cuts[v]:
                v += 1
            alpha.append(v)
        out.append(tuple(alpha))
    return out


def compose(beta: Op, alpha: Op) -> Op:
    """alpha after beta, i.e. t -> alpha[beta[t]]."""
    return tuple(alpha[b] for b in beta)


def epi_mono(alpha: Op) -> tuple[Op, tuple[int, ...]]:
    """alpha = mono . epi; returns (epi, image)."""
    image = tuple(sorted(set(alpha)))
    pos = {v: i for i, v in enumerate(image)}
    return tuple(pos[a] for a in alpha), image


def face_op(k: int, i: int) -> Op:
    """delta^i: [k-1] -> [k] skipping i."""
    return tuple(t if t < i else t + 1 for t in range(k))


def degen_op(k: int, i: int) -> Op:
    """sigma^i: [k+1] -> [k] hitting i twice."""
    return tuple(t if t <= i else t - 1 for t in range(k + 2))


def check_simplicial_identities(face: Callable, degen: Callable, n_max: int, comp=None) -> bool:
    """The simplicial identities for maps given by face(n, i), degen(n, i).

    ``comp(f, g)`` is "g after f"; by default maps are objects with ``then``.
    Raises AssertionError naming the first failing identity.
    """
    if comp is None:
        comp = lambda f, g: f.then(g)  # noqa: E731
    for n in range(2, n_max + 1):
        for j in range(n + 1):
            for i in range(j):
                if comp(face(n, j), face(n - 1, i)) != comp(face(n, i), face(n - 1, j - 1)):
                    raise AssertionError(f"d_{i} d_{j} != d_{j - 1} d_{i} on level {n}")
    for n in range(n_max):
        for j in range(n + 1):
            s = degen(n, j)
            for i in range(n + 2):
                lhs = comp(s, face(n + 1, i))
                if i in (j, j + 1):
                    if not _is_identity(lhs):
                        raise AssertionError(f"d_{i} s_{j} is not the identity on level {n}")
                    continue
                if i < j:
                    rhs = comp(face(n, i), degen(n - 1, j - 1))
                else:
                    rhs = comp(face(n, i - 1), degen(n - 1, j))
                if lhs != rhs:
                    raise AssertionError(f"d_{i} s_{j} identity fails on level {n}")
            if n + 1 <= n_max - 1:
                for i in range(j + 1):
                    if comp(degen(n, j), degen(n + 1, i)) != comp(degen(n, i), degen(n + 1, j + 1)):
                        raise AssertionError(f"s_{i} s_{j} != s_{j + 1} s_{i} on level {n}")
    return True


def _is_identity(f) -> bool:
    if isinstance(f, tuple):
        return f == tuple(range(len(f)))
    comps = getattr(f, "components", None)
    if comps is not None:
        return all(c == tuple(range(len(c))) for c in comps) and f.source is f.target
    return False


# ------------------------------------------------------------ the main type

class SimplicialSet:
    """Levels 0..d_max with ``faces[n][i]: X_n -> X_{n-1}`` and
    ``degens[n][i]: X_n -> X_{n+1}`` as index tables."""

    def __init__(
        self,
        d_max: int,
        sizes: Sequence[int],
        faces: Sequence[Sequence[Sequence[int]]],
        degens: Sequence[Sequence[Sequence[int]]],
        labels: Sequence[Sequence] | None = None,
        check: bool = True,
    ):
        if len(sizes) != d_max + 1:
            raise ValueError("need one size per level")
        self.d_max = d_max
        self.sizes = tuple(sizes)
        self.faces = [tuple(tuple(f) for f in fs) for fs in faces]
        self.degens = [tuple(tuple(s) for s in ss) for ss in degens]
        self.labels = [tuple(l) for l in labels] if labels is not None else [tuple(range(k)) for k in sizes]
        if check:
            self.check()

    def d(self, n: int, i: int) -> tuple[int, ...]:
        return self.faces[n][i]

    def s(self, n: int, i: int) -> tuple[int, ...]:
        return self.degens[n][i]

    def check(self) -> None:
        for n in range(1, self.d_max + 1):
            assert len(self.faces[n]) == n + 1
            for f in self.faces[n]:
                assert len(f) == self.sizes[n] and all(0 <= v < self.sizes[n - 1] for v in f)
        for n in range(self.d_max):
            assert len(self.degens[n]) == n + 1
            for f in self.degens[n]:
                assert len(f) == self.sizes[n] and all(0 <= v < self.sizes[n + 1] for v in f)
        check_simplicial_identities(
            lambda n, i: self.faces[n][i],
            lambda n, i: self.degens[n][i],
            self.d_max,
            comp=lambda f, g: tuple(g[v] for v in f),
        )
        self.normal_forms  # noqa: B018  (Eilenberg-Zilber uniqueness is checked there)

    # Eilenberg-Zilber

    @cached_property
    def nondegenerate(self) -> list[list[int]]:
        out = []
        for n in range(self.d_max + 1):
            hit = set()
            if n:
                for f in self.degens[n - 1]:
                    hit.update(f)
            out.append([x for x in range(self.sizes[n]) if x not in hit])
        return out

    @cached_property
    def normal_forms(self) -> list[list[tuple[int, int, Op]]]:
        """For every simplex, (dim z, z, alpha) with z nondegenerate and x = alpha^* z."""
        nf: list[list] = []
        for n in range(self.d_max + 1):
            level: list = [None] * self.sizes[n]
            for x in self.nondegenerate[n]:
                level[x] = (n, x, tuple(range(n + 1)))
            if n:
                for i, f in enumerate(self.degens[n - 1]):
                    for y, x in enumerate(f):
                        m, z, alpha = nf[n - 1][y]
                        cand = (m, z, compose(degen_op(n - 1, i), alpha))
                        if level[x] is None:
                            level[x] = cand
                        elif level[x] != cand:
                            raise AssertionError(f"simplex {x} in level {n} has two normal forms")
            nf.append(level)
        return nf

    @cached_property
    def dimension(self) -> int:
        return max((n for n in range(self.d_max + 1) if self.nondegenerate[n]), default=-1)

    @property
    def num_nondegenerate(self) -> int:
        return sum(len(l) for l in self.nondegenerate)

    def act(self, alpha: Op, x: int, n: int) -> int:
        """alpha^* x for x in X_n and monotone alpha: [m] -> [n]."""
        epi, image = epi_mono(alpha)
        missing = [v for v in range(n + 1) if v not in image]
        cur, level = x, n
        for v in reversed(missing):
            cur = self.faces[level][v][cur]
            level -= 1
        return self._apply_epi(epi, cur, level)

    def _apply_epi(self, epi: Op, x: int, n: int) -> int:
        # epi = epi' . sigma^t at the first repeat t, so epi^* = s_t . epi'^*
        for t in range(len(epi) - 1):
            if epi[t] == epi[t + 1]:
                rest = epi[: t + 1] + epi[t + 2:]
                y = self._apply_epi(rest, x, n)
                return self.degens[len(rest) - 1][t][y]
        return x

    @cached_property
    def _by_faces(self) -> list[dict]:
        out = [{(): list(range(self.sizes[0]))}]
        for n in range(1, self.d_max + 1):
            table: dict = {}
            for x in range(self.sizes[n]):
                table.setdefault(tuple(self.faces[n][i][x] for i in range(n + 1)), []).append(x)
            out.append(table)
        return out

    def with_faces(self, n: int, faces: tuple[int, ...]) -> list[int]:
        return self._by_faces[n].get(faces, [])

    def to_doc(self) -> dict:
        cells = []
        for n in range(self.dimension + 1):
            level = []
            for x in self.nondegenerate[n]:
                entry = {"name": _name(n, x)}
                if n:
                    entry["faces"] = [self._ref(n - 1, self.faces[n][i][x]) for i in range(n + 1)]
                level.append(entry)
            cells.append(level)
        return {"d_max": self.d_max, "cells": cells}

    def _ref(self, n: int, x: int):
        m, z, alpha = self.normal_forms[n][x]
        if m == n:
            return _name(m, z)
        return {"cell": _name(m, z), "degeneracy": list(alpha)}

    def __repr__(self) -> str:
        return f"SimplicialSet(d_max={self.d_max}, sizes={list(self.sizes)})"


def _name(n: int, x: int) -> str:
    return f"{n}:{x}"


def from_cells(cells: Sequence[Sequence[tuple]], d_max: int, names: Sequence[Sequence] | None = None) -> SimplicialSet:
    """Simplicial set from nondegenerate cells.

    ``cells[n][c]`` is the tuple of n + 1 faces of cell c (empty for
    vertices); each face is either a cell index of dimension n - 1 or a pair
    ``(m, cell, alpha)`` naming the degenerate simplex alpha^* cell.
    Faces must be compatible; this is checked through the simplicial
    identities once all levels are generated.
    """
    top = len(cells) - 1
    if top > d_max:
        raise DimensionExceeded(f"cells up to dimension {top} but d_max = {d_max}")
    # normalise face references to (m, cell, alpha)
    face_nf: list[list[list[tuple[int, int, Op]]]] = []
    for n, level in enumerate(cells):
        lv = []
        for c, fs in enumerate(level):
            if n == 0:
                lv.append([])
                continue
            if len(fs) != n + 1:
                raise ValueError(f"cell {c} in dimension {n} needs {n + 1} faces")
            refs = []
            for f in fs:
                if isinstance(f, int):
                    refs.append((n - 1, f, tuple(range(n))))
                else:
                    m, z, alpha = f
                    if len(alpha) != n or sorted(set(alpha)) != list(range(m + 1)):
                        raise ValueError(f"bad degeneracy {alpha} in a face of cell {c}")
                    refs.append((m, z, tuple(alpha)))
            lv.append(refs)
        face_nf.append(lv)

    def face_general(m: int, z: int, alpha: Op, i: int) -> tuple[int, int, Op]:
        # d_i (alpha^* z) = (alpha . delta^i)^* z
        if alpha == tuple(range(m + 1)):
            return face_nf[m][z][i]
        beta = compose(face_op(len(alpha) - 1, i), alpha)
        epi, image = epi_mono(beta)
        if len(image) == m + 1:
            return (m, z, beta)
        cur = (m, z, tuple(range(m + 1)))
        for v in reversed([v for v in range(m + 1) if v not in image]):
            cur = face_general(*cur, v)
        cm, cz, calpha = cur
        return (cm, cz, compose(epi, calpha))

    levels: list[list[tuple[int, int, Op]]] = []
    for k in range(d_max + 1):
        lv = []
        for m in range(min(k, top) + 1):
            for z in range(len(cells[m])):
                for alpha in surjections(k, m):
                    lv.append((m, z, alpha))
        levels.append(lv)
    index = [{e: i for i, e in enumerate(lv)} for lv in levels]
    faces = [[]]
    for k in range(1, d_max + 1):
        faces.append([tuple(index[k - 1][face_general(*e, i)] for e in levels[k]) for i in range(k + 1)])
    degens = []
    for k in range(d_max):
        degens.append(
            [tuple(index[k + 1][(m, z, compose(degen_op(k, i), alpha))] for m, z, alpha in levels[k]) for i in range(k + 1)]
        )
    if names is None:
        labels = [[(m, z, a) for m, z, a in lv] for lv in levels]
    else:
        labels = [[names[m][z] if a == tuple(range(m + 1)) else (names[m][z], a) for m, z, a in lv] for lv in levels]
    return SimplicialSet(d_max, [len(l) for l in levels], faces, degens, labels)


def simplex(n: int, d_max: int | None = None) -> SimplicialSet:
    """The standard n-simplex."""
    return realize(CombComplex(range(n + 1), _all_subsets(range(n + 1))), d_max=d_max if d_max is not None else n)


def boundary_simplex(n: int, d_max: int | None = None) -> SimplicialSet:
    J = [s for s in _all_subsets(range(n + 1)) if len(s) <= n]
    return realize(CombComplex(range(n + 1), J), d_max=d_max if d_max is not None else n)


def horn(n: int, k: int, d_max: int | None = None) -> SimplicialSet:
    full = frozenset(range(n + 1))
    J = [s for s in _all_subsets(range(n + 1)) if s != full and s != full - {k}]
    return realize(CombComplex(range(n + 1), J), d_max=d_max if d_max is not None else n)


def point(d_max: int) -> SimplicialSet:
    return from_cells([[()]], d_max)


def discrete_set(k: int, d_max: int) -> SimplicialSet:
    return from_cells([[()] * k], d_max)


def _all_subsets(V: Iterable) -> list[frozenset]:
    V = list(V)
    return [frozenset(c) for r in range(len(V) + 1) for c in itertools.combinations(V, r)]


# ---------------------------------------------------- combinatorial complexes

@dataclass(frozen=True)
class CombComplex:
    """A vertex set and a downward closed family of finite subsets containing the empty set."""

    V: tuple
    J: frozenset

    def __init__(self, V: Iterable, J: Iterable[Iterable]):
        V = tuple(V)
        fam = {frozenset(s) for s in J} | {frozenset()}
        vs = set(V)
        for s in fam:
            if not s <= vs:
                raise ValueError(f"simplex {sorted(s, key=repr)} uses unknown vertices")
        # close downward
        closed = set()
        for s in fam:
            for r in range(len(s) + 1):
                closed.update(frozenset(c) for c in itertools.combinations(sorted(s, key=repr), r))
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "J", frozenset(closed))

    def is_downward_closed(self) -> bool:
        return all(frozenset(c) in self.J for s in self.J for c in itertools.combinations(s, len(s) - 1) if s)

    def simplices_by_dim(self, ordering: Sequence | None = None) -> list[list[tuple]]:
        order = list(ordering) if ordering is not None else list(self.V)
        pos = {v: i for i, v in enumerate(order)}
        top = max((len(s) for s in self.J), default=0)
        out: list[list[tuple]] = [[] for _ in range(max(top, 1))]
        for s in self.J:
            if s:
                out[len(s) - 1].append(tuple(sorted(s, key=pos.__getitem__)))
        for lv in out:
            lv.sort(key=lambda t: [pos[v] for v in t])
        while out and not out[-1]:
            out.pop()
        return out

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.J) - 1

    def to_doc(self) -> dict:
        return {"V": list(self.V), "J": sorted([sorted(s, key=repr) for s in self.J if s], key=lambda s: (len(s), repr(s)))}


def realize(K: CombComplex, ordering: Sequence | None = None, d_max: int | None = None) -> SimplicialSet:
    """Nondegenerate n-simplices are the (n+1)-sets of K, oriented by ``ordering``."""
    by_dim = K.simplices_by_dim(ordering)
    if d_max is None:
        d_max = max(len(by_dim) - 1, 0)
    index = [{s: i for i, s in enumerate(lv)} for lv in by_dim]
    cells = []
    for n, lv in enumerate(by_dim):
        if n == 0:
            cells.append([()] * len(lv))
        else:
            cells.append([tuple(index[n - 1][s[:i] + s[i + 1:]] for i in range(n + 1)) for s in lv])
    if not cells:
        return SimplicialSet(d_max, [0] * (d_max + 1), [[]] + [[()] * (n + 1) for n in range(1, d_max + 1)],
                             [[()] * (n + 1) for n in range(d_max)])
    return from_cells(cells, d_max, names=by_dim)


def face_relation(X: SimplicialSet) -> dict[tuple[int, int], set[tuple[int, int]]]:
    """Nondegenerate proper faces of each nondegenerate simplex."""
    out = {}
    for n in range(X.dimension + 1):
        for z in X.nondegenerate[n]:
            faces = set()
            for m in range(n):
                for image in itertools.combinations(range(n + 1), m + 1):
                    fm, fz, _ = X.normal_forms[m][X.act(image, z, n)]
                    faces.add((fm, fz))
            out[(n, z)] = faces
    return out


def is_regular(X: SimplicialSet) -> bool:
    """Every nondegenerate simplex has nondegenerate, pairwise distinct faces."""
    for n in range(1, X.dimension + 1):
        for z in X.nondegenerate[n]:
            for m in range(n):
                seen = set()
                for image in itertools.combinations(range(n + 1), m + 1):
                    f = X.act(image, z, n)
                    if X.normal_forms[m][f][0] != m or f in seen:
                        return False
                    seen.add(f)
    return True


def barycentric_subdivision(X: SimplicialSet) -> CombComplex:
    """Chains of nondegenerate simplices under the face relation."""
    if not is_regular(X):
        raise NotRegular("some simplex has a degenerate or repeated face")
    rel = face_relation(X)
    V = sorted(rel)
    chains: list[frozenset] = []

    def extend(chain: list):
        chains.append(frozenset(chain))
        top = chain[-1]
        for v in V:
            if top in rel[v]:
                extend(chain + [v])

    for v in V:
        extend([v])
    return CombComplex(V, chains)


# ------------------------------------------------------- skeleta, coskeleta

def _restrict(X: SimplicialSet, keep: list[list[int]], d_max: int) -> SimplicialSet:
    index = [{x: i for i, x in enumerate(k)} for k in keep]
    faces = [[]] + [[tuple(index[n - 1][X.faces[n][i][x]] for x in keep[n]) for i in range(n + 1)] for n in range(1, d_max + 1)]
    degens = [[tuple(index[n + 1][X.degens[n][i][x]] for x in keep[n]) for i in range(n + 1)] for n in range(d_max)]
    labels = [[X.labels[n][x] for x in keep[n]] for n in range(d_max + 1)]
    return SimplicialSet(d_max, [len(k) for k in keep], faces, degens, labels)


def skeleton(X: SimplicialSet, n: int) -> SimplicialSet:
    if n > X.d_max:
        raise DimensionExceeded(f"n = {n} exceeds d_max = {X.d_max}")
    keep = [[x for x in range(X.sizes[k]) if X.normal_forms[k][x][0] <= n] for k in range(X.d_max + 1)]
    return _restrict(X, keep, X.d_max)


def truncate(X: SimplicialSet, d_max: int) -> SimplicialSet:
    if d_max > X.d_max:
        raise DimensionExceeded(f"cannot extend from {X.d_max} to {d_max}")
    return _restrict(X, [list(range(X.sizes[k])) for k in range(d_max + 1)], d_max)


class _Cosk:
    """Level k > n of cosk^n Y: families indexed by the (n+1)-subsets of [k]."""

    def __init__(self, Y: SimplicialSet, n: int):
        self.Y, self.n = Y, n
        self._pos: dict[int, dict] = {}

    def position(self, k: int) -> dict:
        if k not in self._pos:
            self._pos[k] = {s: i for i, s in enumerate(self.subsets(k))}
        return self._pos[k]

    def subsets(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(k + 1), self.n + 1))

    def families(self, k: int) -> list[tuple[int, ...]]:
        Y, n = self.Y, self.n
        subs = self.subsets(k)
        fams: list[tuple[int, ...]] = []
        if n == 0:
            return list(itertools.product(range(Y.sizes[0]), repeat=k + 1))
        # backtrack, remembering the value on each n-element face
        def rec(i: int, vals: list, seen: dict) -> None:
            if i == len(subs):
                fams.append(tuple(vals))
                return
            sigma = subs[i]
            for y in range(Y.sizes[n]):
                added = []
                ok = True
                for j in range(n + 1):
                    tau = sigma[:j] + sigma[j + 1:]
                    f = Y.faces[n][j][y]
                    cur = seen.get(tau)
                    if cur is None:
                        seen[tau] = f
                        added.append(tau)
                    elif cur != f:
                        ok = False
                        break
                if ok:
                    vals.append(y)
                    rec(i + 1, vals, seen)
                    vals.pop()
                for tau in added:
                    del seen[tau]

        rec(0, [], {})
        return fams

    def value(self, k: int, F, beta: Op) -> int:
        """beta^* F in Y_n for beta: [n] -> [k]."""
        Y, n = self.Y, self.n
        if k <= n:
            return Y.act(beta, F, k)
        image = sorted(set(beta))
        sup = image + [v for v in range(k + 1) if v not in image][: n + 1 - len(image)]
        sup = tuple(sorted(sup))
        pos = {v: i for i, v in enumerate(sup)}
        y = F[self.position(k)[sup]]
        return Y.act(tuple(pos[b] for b in beta), y, n)

    def pull(self, theta: Op, k: int, F) -> object:
        """theta^* F for theta: [m] -> [k], landing in level m."""
        n = self.n
        m = len(theta) - 1
        if m <= n:
            sigma = tuple(range(m + 1)) + (m,) * (n - m)
            # theta = (theta . sigma) . iota with iota the inclusion [m] -> [n]
            return self.Y.act(tuple(range(m + 1)), self.value(k, F, compose(sigma, theta)), n)
        return tuple(self.value(k, F, compose(tau, theta)) for tau in self.subsets(m))


def coskeleton(Y: SimplicialSet, n: int, d_max: int | None = None) -> SimplicialSet:
    """cosk^n Y truncated at d_max (default Y.d_max); levels <= n are those of Y."""
    if n > Y.d_max:
        raise DimensionExceeded(f"n = {n} exceeds d_max = {Y.d_max}")
    D = Y.d_max if d_max is None else d_max
    C = _Cosk(Y, n)
    elems: list[list] = []
    for k in range(D + 1):
        elems.append(list(range(Y.sizes[k])) if k <= n else C.families(k))
    index = [{e: i for i, e in enumerate(lv)} for lv in elems]
    faces: list = [[]]
    degens: list = []
    for k in range(1, D + 1):
        if k <= n:
            faces.append(list(Y.faces[k]))
        else:
            faces.append([tuple(index[k - 1][C.pull(face_op(k, i), k, F)] for F in elems[k]) for i in range(k + 1)])
    for k in range(D):
        if k + 1 <= n:
            degens.append(list(Y.degens[k]))
        else:
            degens.append([tuple(index[k + 1][C.pull(degen_op(k, i), k, F)] for F in elems[k]) for i in range(k + 1)])
    labels = [list(Y.labels[k]) if k <= n else elems[k] for k in range(D + 1)]
    return SimplicialSet(D, [len(l) for l in elems], faces, degens, labels)


def coskeleton_unit(Y: SimplicialSet, n: int) -> list[tuple[int, ...]]:
    """Levelwise components of the unit Y -> cosk^n Y."""
    C = coskeleton(Y, n)
    out = []
    helper = _Cosk(Y, n)
    for k in range(Y.d_max + 1):
        if k <= n:
            out.append(tuple(range(Y.sizes[k])))
        else:
            index = {e: i for i, e in enumerate(C.labels[k])}
            out.append(tuple(index[tuple(Y.act(tau, y, k) for tau in helper.subsets(k))] for y in range(Y.sizes[k])))
    return out


# --------------------------------------------------------------------- homs

def count_homs(X: SimplicialSet, Y: SimplicialSet, limit: int | None = None) -> int:
    """Number of simplicial maps X -> Y, by choosing images of nondegenerate cells."""
    if X.dimension > Y.d_max:
        raise DimensionExceeded("target is truncated below the dimension of the source")
    cells = [(n, z) for n in range(X.dimension + 1) for z in X.nondegenerate[n]]
    image: dict[tuple[int, int], int] = {}

    def img(n: int, x: int) -> int:
        m, z, alpha = X.normal_forms[n][x]
        return Y.act(alpha, image[(m, z)], m)

    def rec(i: int) -> int:
        if i == len(cells):
            return 1
        n, z = cells[i]
        if n == 0:
            cands = range(Y.sizes[0])
        else:
            cands = Y.with_faces(n, tuple(img(n - 1, X.faces[n][j][z]) for j in range(n + 1)))
        total = 0
        for y in cands:
            image[(n, z)] = y
            total += rec(i + 1)
            if limit is not None and total >= limit:
                break
        image.pop((n, z), None)
        return total

    return rec(0)


def find_isomorphism(X: SimplicialSet, Y: SimplicialSet) -> dict | None:
    """A bijection of nondegenerate cells commuting with faces, or None."""
    if [len(l) for l in X.nondegenerate] != [len(l) for l in Y.nondegenerate]:
        return None
    cells = [(n, z) for n in range(X.dimension + 1) for z in X.nondegenerate[n]]
    image: dict[tuple[int, int], int] = {}
    used: set = set()

    def img(n: int, x: int) -> int:
        m, z, alpha = X.normal_forms[n][x]
        return Y.act(alpha, image[(m, z)], m)

    def rec(i: int) -> bool:
        if i == len(cells):
            return True
        n, z = cells[i]
        if n == 0:
            cands = list(range(Y.sizes[0]))
        else:
            cands = Y.with_faces(n, tuple(img(n - 1, X.faces[n][j][z]) for j in range(n + 1)))
        for y in cands:
            if (n, y) in used or Y.normal_forms[n][y][0] != n:
                continue
            image[(n, z)] = y
            used.add((n, y))
            if rec(i + 1):
                return True
            used.discard((n, y))
            del image[(n, z)]
        return False

    return dict(image) if rec(0) else None


def compatible_boundaries(X: SimplicialSet, n: int) -> list[tuple[int, ...]]:
    """Every (n+1)-tuple of (n-1)-simplices forming a map from the boundary of an n-simplex."""
    if n == 1:
        return [(a, b) for a in range(X.sizes[0]) for b in range(X.sizes[0])]
    out = []

    def rec(i: int, cur: list):
        if i == n + 1:
            out.append(tuple(cur))
            return
        for y in range(X.sizes[n - 1]):
            if all(X.faces[n - 1][i - 1][cur[j]] == X.faces[n - 1][j][y] for j in range(i)):
                cur.append(y)
                rec(i + 1, cur)
                cur.pop()

    rec(0, [])
    return out


def attach(cells: list[list], X: SimplicialSet, n: int, boundary: Sequence[int]) -> list[list]:
    """Cell data of X (built from ``cells``) with one more n-cell glued along ``boundary``."""
    refs = []
    for y in boundary:
        m, w, alpha = X.normal_forms[n - 1][y]
        wpos = {u: c for c, u in enumerate(X.nondegenerate[m])}
        refs.append(wpos[w] if m == n - 1 else (m, wpos[w], alpha))
    new = [list(l) for l in cells]
    while len(new) <= n:
        new.append([])
    new[n].append(tuple(refs))
    return new


def enumerate_small(max_cells: int, max_dim: int) -> list[SimplicialSet]:
    """Every simplicial set with at most ``max_cells`` nondegenerate simplices
    of dimension at most ``max_dim``, up to isomorphism (nonempty ones)."""
    found: dict[tuple, list[SimplicialSet]] = {}
    out: list[SimplicialSet] = []

    def key(X: SimplicialSet) -> tuple:
        return tuple(len(l) for l in X.nondegenerate)

    def add(X: SimplicialSet) -> bool:
        bucket = found.setdefault(key(X), [])
        for Y in bucket:
            if find_isomorphism(X, Y) is not None:
                return False
        bucket.append(X)
        out.append(X)
        return True

    def grow(cells: list[list], count: int, min_dim: int) -> None:
        X = from_cells(cells, max_dim)
        if not add(X):
            return
        if count == max_cells:
            return
        top = len(cells) - 1
        for n in range(min_dim, max_dim + 1):
            if n > top + 1:
                break
            if n == 0:
                new = [list(l) for l in cells]
                new[0] = list(new[0]) + [()]
                grow(new, count + 1, 0)
                continue
            for bd in compatible_boundaries(X, n):
                grow(attach(cells, X, n, bd), count + 1, n)

    grow([[()]], 1, 0)
    return out


# ---------------------------------------------------------------- Kan, groups

def is_kan(X: SimplicialSet, d: int) -> bool:
    """Every horn in dimension <= d has a filler (exhaustive)."""
    if d >= X.d_max + 1:
        raise DimensionExceeded(f"d = {d} needs level {d} but d_max = {X.d_max}")
    for m in range(1, d + 1):
        for k in range(m + 1):
            idx = [i for i in range(m + 1) if i != k]
            fillable = {tuple(X.faces[m][i][y] for i in idx) for y in range(X.sizes[m])}
            for h in _horns(X, m, k):
                if h not in fillable:
                    return False
    return True


def _horns(X: SimplicialSet, m: int, k: int):
    idx = [i for i in range(m + 1) if i != k]

    def rec(t: int, cur: list):
        if t == len(idx):
            yield tuple(cur)
            return
        j = idx[t]
        for y in range(X.sizes[m - 1]):
            ok = True
            if m >= 2:
                for s in range(t):
                    i = idx[s]  # i < j
                    if X.faces[m - 1][j - 1][cur[s]] != X.faces[m - 1][i][y]:
                        ok = False
                        break
            if ok:
                cur.append(y)
                yield from rec(t + 1, cur)
                cur.pop()

    yield from rec(0, [])


def check_group(table: Sequence[Sequence[int]]) -> int:
    """Validate a multiplication table; returns the identity element."""
    n = len(table)
    if n == 0 or any(len(r) != n for r in table):
        raise NotAGroup("table must be square and nonempty")
    if any(not 0 <= v < n for r in table for v in r):
        raise NotAGroup("entries out of range")
    e = next((a for a in range(n) if all(table[a][b] == b and table[b][a] == b for b in range(n))), None)
    if e is None:
        raise NotAGroup("no identity element")
    for a in range(n):
        if not any(table[a][b] == e for b in range(n)):
            raise NotAGroup(f"{a} has no inverse")
        for b in range(n):
            for c in range(n):
                if table[table[a][b]][c] != table[a][table[b][c]]:
                    raise NotAGroup(f"associativity fails at ({a}, {b}, {c})")
    return e


def cyclic_group_table(n: int) -> list[list[int]]:
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def nerve_of_group(table: Sequence[Sequence[int]], d_max: int) -> SimplicialSet:
    """Bar construction: level n is G^n."""
    e = check_group(table)
    G = range(len(table))
    levels = [list(itertools.product(G, repeat=n)) for n in range(d_max + 1)]
    index = [{t: i for i, t in enumerate(lv)} for lv in levels]

    def face(t: tuple, i: int) -> tuple:
        n = len(t)
        if i == 0:
            return t[1:]
        if i == n:
            return t[:-1]
        return t[: i - 1] + (table[t[i - 1]][t[i]],) + t[i + 1:]

    faces = [[]] + [[tuple(index[n - 1][face(t, i)] for t in levels[n]) for i in range(n + 1)] for n in range(1, d_max + 1)]
    degens = [[tuple(index[n + 1][t[:i] + (e,) + t[i:]] for t in levels[n]) for i in range(n + 1)] for n in range(d_max)]
    return SimplicialSet(d_max, [len(l) for l in levels], faces, degens, levels)


def postnikov_truncate(X: SimplicialSet, k: int) -> SimplicialSet:
    """tau_k X, modelled by the (k+1)-coskeleton of a Kan complex."""
    if k + 2 > X.d_max:
        raise DimensionExceeded(f"truncation at {k} needs d_max >= {k + 2}")
    if not is_kan(X, min(k + 2, X.d_max - 1)):
        raise NotKan("horn filling fails below the truncation range")
    T = coskeleton(X, k + 1)
    before, after = homology(X), homology(T)
    assert before[: k + 1] == after[: k + 1], "truncation changed homology in low degrees"
    return T


# ------------------------------------------------------------------ homology

def homology(X: SimplicialSet, top: int | None = None):
    """Normalized-chain homology H_0 .. H_top (default d_max - 1)."""
    from .cohomology import FgAbGroup

    if top is None:
        top = X.d_max - 1
    if top > X.d_max - 1:
        raise DimensionExceeded(f"H_{top} needs level {top + 1} but d_max = {X.d_max}")
    nd = X.nondegenerate
    index = [{z: i for i, z in enumerate(l)} for l in nd]
    facs = [[]]
    ranks = [0]
    for n in range(1, top + 2):
        rows = []
        for z in nd[n]:
            row: dict[int, int] = {}
            for i in range(n + 1):
                f = X.faces[n][i][z]
                if f in index[n - 1]:
                    c = index[n - 1][f]
                    row[c] = row.get(c, 0) + (-1 if i % 2 else 1)
            rows.append({c: v for c, v in row.items() if v})
        f = intmat.invariant_factors_rows([r for r in rows if r], len(nd[n - 1])) if rows else []
        facs.append(f)
        ranks.append(len(f))
    out = []
    for n in range(top + 1):
        free = len(nd[n]) - ranks[n] - ranks[n + 1]
        out.append(FgAbGroup.from_cyclic([0] * free + [d for d in facs[n + 1] if d > 1]))
    return out


def pi0(X: SimplicialSet) -> int:
    parent = list(range(X.sizes[0]))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if X.d_max >= 1:
        for a, b in zip(X.faces[1][0], X.faces[1][1]):
            parent[find(a)] = find(b)
    return len({find(a) for a in range(X.sizes[0])})


@dataclass
class GroupPresentation:
    generators: list
    relations: list[list[tuple[int, int]]] = field(default_factory=list)  # words of (generator, +-1)

    def simplified(self) -> "GroupPresentation":
        """Drop empty relations and generators set to 1 by a one-letter relation."""
        gens = list(range(len(self.generators)))
        rels = [r for r in self.relations if r]
        killed = set()
        changed = True
        while changed:
            changed = False
            for r in rels:
                live = [(g, e) for g, e in r if g not in killed]
                if len(live) == 1:
                    killed.add(live[0][0])
                    changed = True
        keep = [g for g in gens if g not in killed]
        pos = {g: i for i, g in enumerate(keep)}
        new_rels = []
        for r in rels:
            w = [(pos[g], e) for g, e in r if g not in killed]
            w = _free_reduce(w)
            if w:
                new_rels.append(w)
        return GroupPresentation([self.generators[g] for g in keep], new_rels)

    def abelianization(self):
        from .cohomology import FgAbGroup

        n = len(self.generators)
        rows = []
        for r in self.relations:
            v = [0] * n
            for g, e in r:
                v[g] += e
            rows.append(v)
        facs = intmat.invariant_factors(rows) if rows and n else []
        return FgAbGroup.from_cyclic([0] * (n - len(facs)) + [d for d in facs if d > 1])


def _free_reduce(w: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for g, e in w:
        if out and out[-1] == (g, -e):
            out.pop()
        else:
            out.append((g, e))
    return out


def pi1_edge_group(K: CombComplex, base, ordering: Sequence | None = None) -> GroupPresentation:
    """Edge-path presentation of pi_1(K, base) using a spanning tree."""
    order = list(ordering) if ordering is not None else list(K.V)
    pos = {v: i for i, v in enumerate(order)}
    edges = sorted((tuple(sorted(s, key=pos.__getitem__)) for s in K.J if len(s) == 2), key=lambda e: (pos[e[0]], pos[e[1]]))
    adj: dict = {v: [] for v in K.V}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    tree = set()
    seen = {base}
    queue = [base]
    while queue:
        v = queue.pop(0)
        for w in sorted(adj[v], key=pos.__getitem__):
            if w not in seen:
                seen.add(w)
                tree.add(tuple(sorted((v, w), key=pos.__getitem__)))
                queue.append(w)
    comp_edges = [e for e in edges if e[0] in seen]
    gen_edges = [e for e in comp_edges if e not in tree]
    gid = {e: i for i, e in enumerate(gen_edges)}

    def letter(a, b):
        e = (a, b) if pos[a] < pos[b] else (b, a)
        if e in tree:
            return []
        return [(gid[e], 1 if e == (a, b) else -1)]

    rels = []
    for s in K.J:
        if len(s) == 3 and next(iter(s)) in seen:
            a, b, c = sorted(s, key=pos.__getitem__)
            rels.append(_free_reduce(letter(a, b) + letter(b, c) + letter(c, a)))
    return GroupPresentation(gen_edges, rels)


# ------------------------------------------------------------- nerves of covers

def nerve_complex_of_cover(cover: Cover) -> CombComplex:
    labels = list(cover.labels)
    masks = [cover.member(a).mask for a in labels]
    J = []
    for r in range(1, len(labels) + 1):
        for idx in itertools.combinations(range(len(labels)), r):
            inter = cover.space.full
            for i in idx:
                inter &= masks[i]
            if inter:
                J.append(frozenset(idx))
    return CombComplex(range(len(labels)), J)


def nerve_of_cover(cover: Cover, d_max: int | None = None) -> SimplicialSet:
    """Nondegenerate n-simplices: (n+1)-sets of members with nonempty intersection."""
    K = nerve_complex_of_cover(cover)
    return realize(K, d_max=d_max)


def nerve_of_cover_presheaf(cover: Cover) -> dict[int, CombComplex]:
    """Over each open V, the index sets whose members all contain V."""
    X = cover.space
    labels = list(cover.labels)
    masks = [cover.member(a).mask for a in labels]
    out = {}
    for V in X.opens_mask():
        inside = [i for i, m in enumerate(masks) if V & ~m == 0]
        out[V] = CombComplex(range(len(labels)), _all_subsets(inside))
    return out


# ------------------------------------------------- augmented simplicial sheaves

@dataclass
class AugmentedSimplicialSheaf:
    """Levels of set-valued sheaves E_0 .. E_d_max with an augmentation to E."""

    space: object
    levels: list
    faces: list  # faces[n][i]: levels[n] -> levels[n - 1]
    degens: list  # degens[n][i]: levels[n] -> levels[n + 1]
    augmentation: object
    target: object

    @property
    def d_max(self) -> int:
        return len(self.levels) - 1

    def check(self) -> None:
        check_simplicial_identities(lambda n, i: self.faces[n][i], lambda n, i: self.degens[n][i], self.d_max)
        if self.d_max >= 1:
            a = self.faces[1][0].then(self.augmentation)
            b = self.faces[1][1].then(self.augmentation)
            assert a == b, "augmentation does not coequalize the level-1 faces"


def cech_augmented(phi, d_max: int) -> AugmentedSimplicialSheaf:
    from .sheaf import CechNerve

    N = CechNerve(phi)
    levels = [N.level(n) for n in range(d_max + 1)]
    faces = [[]] + [[N.face(n, i) for i in range(n + 1)] for n in range(1, d_max + 1)]
    degens = [[N.degeneracy(n, i) for i in range(n + 1)] for n in range(d_max)]
    A = AugmentedSimplicialSheaf(phi.source.space, levels, faces, degens, phi, phi.target)
    A.check()
    return A


def _matching_stalk(A: AugmentedSimplicialSheaf, n: int, x: int) -> set:
    """Boundary data for an n-simplex over x, relative to the augmentation."""
    if n == 0:
        return set(range(A.target.size(x)))
    prev = A.levels[n - 1]
    if n == 1:
        aug = A.augmentation.components[x]
        return {(a, b) for a in range(prev.size(x)) for b in range(prev.size(x)) if aug[a] == aug[b]}
    out = set()
    F = [A.faces[n - 1][i].components[x] for i in range(n)]

    def rec(j: int, cur: list):
        if j == n + 1:
            out.add(tuple(cur))
            return
        for y in range(prev.size(x)):
            # d_i y_j = d_{j-1} y_i for i < j
            if all(F[j - 1][cur[i]] == F[i][y] for i in range(j)):
                cur.append(y)
                rec(j + 1, cur)
                cur.pop()

    rec(0, [])
    return out


def _boundary_of(A: AugmentedSimplicialSheaf, n: int, x: int, s: int):
    if n == 0:
        return A.augmentation.components[x][s]
    return tuple(A.faces[n][i].components[x][s] for i in range(n + 1))


def is_hypercovering(A: AugmentedSimplicialSheaf, d: int) -> tuple[bool, int | None]:
    """Whether E_n -> (matching object)_n is surjective for n <= d; first failure."""
    if d > A.d_max:
        raise DimensionExceeded(f"d = {d} exceeds d_max = {A.d_max}")
    X = A.space
    for n in range(d + 1):
        for x in range(X.n):
            M = _matching_stalk(A, n, x)
            hit = {_boundary_of(A, n, x, s) for s in range(A.levels[n].size(x))}
            if not M <= hit:
                return False, n
    return True, None


def mutilate(A: AugmentedSimplicialSheaf, level: int = 2) -> AugmentedSimplicialSheaf:
    """Delete one nondegenerate element of E_level at a minimal point, and every
    higher simplex having it as an iterated face."""
    from .sheaf import SetSheaf, SheafMorphism

    X = A.space
    if level < 1 or level > A.d_max:
        raise DimensionExceeded("level out of range")
    target = None
    for x in X.minimal_points():
        degenerate = set()
        for s in A.degens[level - 1]:
            degenerate.update(s.components[x])
        cand = [t for t in range(A.levels[level].size(x)) if t not in degenerate]
        if cand:
            target = (x, cand[0])
            break
    if target is None:
        raise ValueError("no nondegenerate element at a minimal point")
    x0, t0 = target
    removed = [set() for _ in A.levels]
    removed[level].add(t0)
    for n in range(level + 1, A.d_max + 1):
        for s in range(A.levels[n].size(x0)):
            if any(A.faces[n][i].components[x0][s] in removed[n - 1] for i in range(n + 1)):
                removed[n].add(s)
    keep = []
    for n, F in enumerate(A.levels):
        keep.append([[s for s in range(F.size(x)) if not (x == x0 and s in removed[n])] for x in range(X.n)])
    pos = [[{s: i for i, s in enumerate(k)} for k in kn] for kn in keep]
    new_levels = []
    for n, F in enumerate(A.levels):
        stalks = [[F.stalks[x][s] for s in keep[n][x]] for x in range(X.n)]
        gen = {(a, b): tuple(pos[n][b][F.g(a, b)[s]] for s in keep[n][a]) for a, b in X.covering_pairs}
        new_levels.append(SetSheaf(X, stalks, gen))

    def restrict(f, n_src, n_tgt, src, tgt):
        comps = [[pos[n_tgt][x][f.components[x][s]] for s in keep[n_src][x]] for x in range(X.n)]
        return SheafMorphism(src, tgt, comps)

    faces = [[]] + [
        [restrict(A.faces[n][i], n, n - 1, new_levels[n], new_levels[n - 1]) for i in range(n + 1)]
        for n in range(1, A.d_max + 1)
    ]
    degens = [
        [restrict(A.degens[n][i], n, n + 1, new_levels[n], new_levels[n + 1]) for i in range(n + 1)]
        for n in range(A.d_max)
    ]
    aug = SheafMorphism(
        new_levels[0], A.target, [[A.augmentation.components[x][s] for s in keep[0][x]] for x in range(X.n)]
    )
    out = AugmentedSimplicialSheaf(X, new_levels, faces, degens, aug, A.target)
    out.check()
    return out


def nerve_of_minimal_cover(X) -> SimplicialSet:
    """Nerve of the cover of a finite space by the minimal opens of its points."""
    cov = Cover(X, [frozenset(_bits(X.up[x])) for x in range(X.n)])
    return nerve_of_cover(cov)

