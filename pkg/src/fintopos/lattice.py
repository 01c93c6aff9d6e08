"""Finite distributive lattices and Birkhoff duality with finite posets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NotALattice, NotDistributive
from .finposet import FinitePoset, _bits, enumerate_posets, find_isomorphism


@dataclass(frozen=True, eq=False)
class DistributiveLattice:
    m: int
    leq: frozenset[tuple[int, int]]
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int, ...], ...]
    bottom: int
    top: int
    labels: tuple = field(default=())

    def le(self, x: int, y: int) -> bool:
        return (x, y) in self.leq

    def as_poset(self) -> FinitePoset:
        return FinitePoset(self.m, [p for p in self.leq if p[0] != p[1]])

    def to_doc(self) -> dict:
        return {"elements": self.m, "leq": sorted([list(p) for p in self.leq if p[0] != p[1]])}


def build_lattice(order: Iterable[Sequence[int]], m: int, labels: Sequence = ()) -> DistributiveLattice:
    """Lattice from an order on 0..m-1; the order may be a generating relation."""
    P = FinitePoset(m, [tuple(p) for p in order])
    if m == 0:
        raise NotALattice("a lattice needs at least one element")
    lower = [P.down[x] for x in range(m)]
    upper = [P.up[x] for x in range(m)]

    def extremum(mask: int, towards: list[int]) -> int | None:
        # the unique element of mask lying above/below all of mask
        for z in _bits(mask):
            if towards[z] & mask == mask:
                return z
        return None

    meet = [[0] * m for _ in range(m)]
    join = [[0] * m for _ in range(m)]
    for x in range(m):
        for y in range(x, m):
            common = lower[x] & lower[y]
            g = extremum(common, lower) if common else None
            common = upper[x] & upper[y]
            lub = extremum(common, upper) if common else None
            if g is None or lub is None:
                raise NotALattice(f"elements {x} and {y} lack a meet or a join")
            meet[x][y] = meet[y][x] = g
            join[x][y] = join[y][x] = lub
    bottom = extremum(P.full, upper)
    top = extremum(P.full, lower)
    if bottom is None or top is None:
        raise NotALattice("missing bottom or top")
    for x in range(m):
        for y in range(m):
            for z in range(m):
                if meet[x][join[y][z]] != join[meet[x][y]][meet[x][z]]:
                    raise NotDistributive(f"x={x}, y={y}, z={z} violate distributivity")
    return DistributiveLattice(
        m,
        P.le,
        tuple(map(tuple, meet)),
        tuple(map(tuple, join)),
        bottom,
        top,
        tuple(labels),
    )


def implication(L: DistributiveLattice, x: int, y: int) -> int:
    """Relative pseudocomplement: the largest z with x ^ z <= y."""
    z = L.bottom
    for w in range(L.m):
        if L.le(L.meet[x][w], y):
            z = L.join[z][w]
    assert L.le(L.meet[x][z], y), "join of solutions is not a solution"
    return z


def join_irreducible_elements(L: DistributiveLattice) -> list[int]:
    out = []
    for x in range(L.m):
        if x == L.bottom:
            continue
        below = [w for w in range(L.m) if w != x and L.le(w, x)]
        j = L.bottom
        for w in below:
            j = L.join[j][w]
        if j != x:
            out.append(x)
    return out


def join_irreducibles(L: DistributiveLattice) -> FinitePoset:
    """Join-irreducibles with the order they inherit from L."""
    J = join_irreducible_elements(L)
    return FinitePoset(len(J), [(i, k) for i, a in enumerate(J) for k, b in enumerate(J) if i != k and L.le(a, b)])


def spectrum(L: DistributiveLattice) -> FinitePoset:
    """The finite space whose open sets recover L.

    Points are the join-irreducibles with the inherited order reversed: the
    minimal open of a point is then the set of irreducibles below it, and
    x maps to the open {j : j <= x}.
    """
    J = join_irreducible_elements(L)
    return FinitePoset(len(J), [(i, k) for i, a in enumerate(J) for k, b in enumerate(J) if i != k and L.le(b, a)])


def open_lattice(X: FinitePoset) -> DistributiveLattice:
    opens = sorted(X.opens_mask(), key=lambda m: (bin(m).count("1"), m))
    index = {o: i for i, o in enumerate(opens)}
    order = [(index[a], index[b]) for a in opens for b in opens if a != b and a & ~b == 0]
    labels = tuple(frozenset(_bits(o)) for o in opens)
    L = build_lattice(order, len(opens), labels)
    for a in opens:
        for b in opens:
            assert L.meet[index[a]][index[b]] == index[a & b]
            assert L.join[index[a]][index[b]] == index[a | b]
    return L


@dataclass
class DualityCheck:
    ok: bool
    witness: dict
    counterexample: object = None


def _check_order_iso(f: dict, le1, le2, items) -> object:
    if len(set(f.values())) != len(f):
        return next(x for x in items if list(f.values()).count(f[x]) > 1)
    for x in items:
        for y in items:
            if le1(x, y) != le2(f[x], f[y]):
                return (x, y)
    return None


def check_duality(L: DistributiveLattice) -> DualityCheck:
    """open_lattice(spectrum(L)) is isomorphic to L via x -> {j <= x}."""
    J = join_irreducible_elements(L)
    S = spectrum(L)
    O = open_lattice(S)
    index = {lab: i for i, lab in enumerate(O.labels)}
    f = {}
    for x in range(L.m):
        up = frozenset(i for i, j in enumerate(J) if L.le(j, x))
        if up not in index:
            return DualityCheck(False, f, x)
        f[x] = index[up]
    if len(f) != O.m:
        return DualityCheck(False, f, "size mismatch")
    bad = _check_order_iso(f, L.le, O.le, range(L.m))
    return DualityCheck(bad is None, f, bad)


def check_duality_space(X: FinitePoset) -> DualityCheck:
    """spectrum(open_lattice(X)) is isomorphic to X via x -> up(x)."""
    O = open_lattice(X)
    J = join_irreducible_elements(O)
    S = spectrum(O)
    pos = {O.labels[j]: i for i, j in enumerate(J)}
    f = {}
    for x in range(X.n):
        ux = frozenset(_bits(X.up[x]))
        if ux not in pos:
            return DualityCheck(False, f, x)
        f[x] = pos[ux]
    if len(J) != X.n:
        return DualityCheck(False, f, "size mismatch")
    bad = _check_order_iso(f, X.leq, S.leq, range(X.n))
    return DualityCheck(bad is None, f, bad)


def lattice_isomorphism(L1: DistributiveLattice, L2: DistributiveLattice) -> dict | None:
    """Lattice isomorphisms are exactly the order isomorphisms."""
    if L1.m != L2.m:
        return None
    return find_isomorphism(L1.as_poset(), L2.as_poset())


def enumerate_distributive_lattices(m: int) -> list[DistributiveLattice]:
    """All distributive lattices with m elements, up to isomorphism.

    Built from bounded posets (a poset with a bottom and a top adjoined),
    independently of the duality being tested.
    """
    if m == 1:
        return [build_lattice([], 1)]
    out = []
    for P in enumerate_posets(m - 2):
        bot, top = m - 2, m - 1
        rel = [p for p in P.le if p[0] != p[1]] + [(bot, x) for x in range(P.n)] + [(x, top) for x in range(P.n)]
        rel.append((bot, top))
        try:
            out.append(build_lattice(rel, m))
        except (NotALattice, NotDistributive):
            continue
    return out


def boolean_lattice(k: int) -> DistributiveLattice:
    m = 1 << k
    return build_lattice([(a, b) for a in range(m) for b in range(m) if a != b and a & ~b == 0], m)


def chain_lattice(m: int) -> DistributiveLattice:
    return build_lattice([(i, i + 1) for i in range(m - 1)], m)
