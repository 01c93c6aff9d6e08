"""Finite sober spaces, presented by their specialization order.

A pair ``(x, y)`` in ``le`` means ``x`` lies in the closure of ``{y}``. Open
sets are the up-closed subsets, closed sets the down-closed ones, and the
smallest open neighbourhood of ``x`` is ``up(x)``.

Subsets cross the public API as frozensets of point indices; internally they
are int bitmasks.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    CoreConditionFailed,
    CycleDetected,
    NotACover,
    NotContinuous,
    NotOpen,
    NotSober,
    ShrinkingUnavailable,
)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask(points: Iterable[int]) -> int:
    m = 0
    for p in points:
        m |= 1 << p
    return m


def _set(mask: int) -> frozenset[int]:
    return frozenset(_bits(mask))


class FinitePoset:
    """A finite T0 Alexandrov space on points ``0..n-1``."""

    def __init__(self, n: int, le: Iterable[tuple[int, int]]):
        self.n = n
        up = [1 << x for x in range(n)]
        for x, y in le:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"relation ({x}, {y}) out of range for {n} points")
            up[x] |= 1 << y
        # transitive closure, Warshall style on bitmasks
        for k in range(n):
            bk = 1 << k
            for x in range(n):
                if up[x] & bk:
                    up[x] |= up[k]
        down = [0] * n
        for x in range(n):
            for y in _bits(up[x]):
                down[y] |= 1 << x
        for x in range(n):
            clash = (up[x] & down[x]) & ~(1 << x)
            if clash:
                y = next(_bits(clash))
                raise CycleDetected(f"points {x} and {y} are identified by the order")
        self.up: tuple[int, ...] = tuple(up)
        self.down: tuple[int, ...] = tuple(down)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def le(self) -> frozenset[tuple[int, int]]:
        return frozenset((x, y) for x in range(self.n) for y in _bits(self.up[x]))

    def leq(self, x: int, y: int) -> bool:
        return bool(self.up[x] >> y & 1)

    def lt(self, x: int, y: int) -> bool:
        return x != y and self.leq(x, y)

    @cached_property
    def covering_pairs(self) -> tuple[tuple[int, int], ...]:
        """Hasse edges x < y with nothing strictly between."""
        out = []
        for x in range(self.n):
            above = self.up[x] & ~(1 << x)
            for y in _bits(above):
                between = above & self.down[y] & ~(1 << y)
                if not between:
                    out.append((x, y))
        return tuple(out)

    @cached_property
    def linear_extension(self) -> tuple[int, ...]:
        """Points sorted so that x comes before y whenever x < y."""
        return tuple(sorted(range(self.n), key=lambda x: (bin(self.down[x]).count("1"), x)))

    def minimal_points(self, mask: int | None = None) -> list[int]:
        mask = self.full if mask is None else mask
        return [x for x in _bits(mask) if not (self.down[x] & mask & ~(1 << x))]

    def maximal_points(self, mask: int | None = None) -> list[int]:
        mask = self.full if mask is None else mask
        return [x for x in _bits(mask) if not (self.up[x] & mask & ~(1 << x))]

    # bitmask primitives
    def close_mask(self, mask: int) -> int:
        out = 0
        for x in _bits(mask):
            out |= self.down[x]
        return out

    def upclose_mask(self, mask: int) -> int:
        out = 0
        for x in _bits(mask):
            out |= self.up[x]
        return out

    def is_open_mask(self, mask: int) -> bool:
        return self.upclose_mask(mask) == mask

    def opens_mask(self, within: int | None = None) -> Iterator[int]:
        """All up-closed subsets of ``within`` (relative to the induced order)."""
        within = self.full if within is None else within
        pts = sorted(_bits(within), key=lambda x: -bin(self.down[x] & within).count("1"))
        strict_up = [self.up[x] & within & ~(1 << x) for x in range(self.n)]

        def rec(i: int, cur: int) -> Iterator[int]:
            if i == len(pts):
                yield cur
                return
            x = pts[i]
            yield from rec(i + 1, cur)
            if strict_up[x] & ~cur == 0:
                yield from rec(i + 1, cur | (1 << x))

        yield from rec(0, 0)

    def opens(self) -> list[frozenset[int]]:
        return sorted((_set(m) for m in self.opens_mask()), key=lambda s: (len(s), sorted(s)))

    def components_mask(self, within: int) -> list[int]:
        comps = []
        left = within
        while left:
            seed = left & -left
            comp = seed
            while True:
                grow = comp
                for x in _bits(comp):
                    grow |= (self.up[x] | self.down[x]) & within
                if grow == comp:
                    break
                comp = grow
            comps.append(comp)
            left &= ~comp
        return comps

    def __eq__(self, other) -> bool:
        return isinstance(other, FinitePoset) and self.n == other.n and self.up == other.up

    def __hash__(self) -> int:
        return hash((self.n, self.up))

    def __repr__(self) -> str:
        return f"FinitePoset({self.n}, {sorted(self.covering_pairs)})"

    def to_doc(self) -> dict:
        return {"points": self.n, "le": [list(p) for p in self.covering_pairs]}


@dataclass(frozen=True)
class OpenSet:
    space: FinitePoset
    members: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.space.is_open_mask(_mask(self.members)):
            raise NotOpen(f"{sorted(self.members)} is not up-closed")

    @property
    def mask(self) -> int:
        return _mask(self.members)


@dataclass(frozen=True)
class ContinuousMap:
    source: FinitePoset
    target: FinitePoset
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))
        if len(self.assignment) != self.source.n:
            raise NotContinuous("assignment must be total on the source")
        for x, y in self.source.le:
            if not self.target.leq(self.assignment[x], self.assignment[y]):
                raise NotContinuous(f"order {x} <= {y} is not preserved")

    def __call__(self, x: int) -> int:
        return self.assignment[x]

    def preimage_mask(self, mask: int) -> int:
        return _mask(x for x in range(self.source.n) if mask >> self.assignment[x] & 1)

    @classmethod
    def identity(cls, X: FinitePoset) -> "ContinuousMap":
        return cls(X, X, tuple(range(X.n)))

    @classmethod
    def to_point(cls, X: FinitePoset) -> "ContinuousMap":
        return cls(X, FinitePoset(1, []), (0,) * X.n)


@dataclass(frozen=True)
class Cover:
    space: FinitePoset
    members: tuple[OpenSet, ...]
    labels: tuple = field(default=())

    def __post_init__(self):
        members = tuple(m if isinstance(m, OpenSet) else OpenSet(self.space, frozenset(m)) for m in self.members)
        object.__setattr__(self, "members", members)
        labels = tuple(self.labels) or tuple(range(len(members)))
        if len(labels) != len(members) or len(set(labels)) != len(labels):
            raise NotACover("labels must be distinct, one per member")
        object.__setattr__(self, "labels", labels)
        covered = 0
        for m in members:
            covered |= m.mask
        if covered != self.space.full:
            raise NotACover("members do not cover the space")

    def __len__(self) -> int:
        return len(self.members)

    def member(self, label) -> OpenSet:
        return self.members[self.labels.index(label)]

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.members))


def build_poset(n: int, relations: Iterable[Sequence[int]]) -> FinitePoset:
    return FinitePoset(n, [tuple(r) for r in relations])


def closure(X: FinitePoset, S: Iterable[int]) -> frozenset[int]:
    return _set(X.close_mask(_mask(S)))


def interior(X: FinitePoset, S: Iterable[int]) -> frozenset[int]:
    m = _mask(S)
    return _set(_mask(x for x in _bits(m) if X.up[x] & ~m == 0))


def boundary(X: FinitePoset, U: OpenSet | Iterable[int]) -> frozenset[int]:
    m = U.mask if isinstance(U, OpenSet) else _mask(U)
    if not X.is_open_mask(m):
        raise NotOpen(f"{sorted(_bits(m))} is not open")
    return _set(X.close_mask(m) & ~m)


def minimal_open(X: FinitePoset, x: int) -> OpenSet:
    return OpenSet(X, _set(X.up[x]))


def irreducible_closeds(X: FinitePoset) -> list[tuple[frozenset[int], int]]:
    """Irreducible closed sets with their generic points.

    In a finite space a closed set is irreducible iff it has a greatest
    element; the down-set of that element is the closure of a point.
    """
    out = []
    for y in range(X.n):
        C = X.down[y]
        generic = [g for g in _bits(C) if X.down[g] == C]
        if generic != [y]:
            raise NotSober(f"closed set {sorted(_bits(C))} has generic points {generic}")
        out.append((_set(C), y))
    return sorted(out, key=lambda t: (len(t[0]), t[1]))


def krull_dimension(X: FinitePoset) -> int:
    if X.n == 0:
        return -1
    height = [0] * X.n
    for y in X.linear_extension:
        below = X.down[y] & ~(1 << y)
        height[y] = 1 + max((height[x] for x in _bits(below)), default=-1)
    return max(height)


class _HeytingDim:
    def __init__(self, X: FinitePoset):
        self.X = X
        self.memo: dict[int, int] = {0: -1}

    def __call__(self, Z: int) -> int:
        if Z in self.memo:
            return self.memo[Z]
        comps = self.X.components_mask(Z)
        if len(comps) > 1:
            # opens and boundaries of a topological sum split componentwise
            d = max(self(c) for c in comps)
        else:
            d = self._connected(Z)
        self.memo[Z] = d
        return d

    def _connected(self, Z: int) -> int:
        X = self.X
        cap = bin(Z).count("1") - 2  # hd(B) <= |B| - 1 and B is a proper subset
        best = -1
        for U in X.opens_mask(Z):
            B = X.close_mask(U) & ~U
            if B:
                best = max(best, self(B))
                if best >= cap:
                    break
        return best + 1


def heyting_dimension(X: FinitePoset) -> int:
    """1 + max over opens U of the dimension of the boundary of U; -1 if empty."""
    if X.n == 0:
        return -1
    return _HeytingDim(X)(X.full)


def heyting_dimension_of(X: FinitePoset, S: Iterable[int]) -> int:
    """Heyting dimension of the subspace on a closed subset ``S`` (cached per call)."""
    m = _mask(S)
    if X.close_mask(m) != m:
        return heyting_dimension(subspace(X, S))
    return _HeytingDim(X)(m)


def covering_dimension(X: FinitePoset) -> int:
    """Least n such that every open cover has a refinement of order <= n + 1.

    A point lies in every open set containing any point below it, so the
    cover ``{up(m) : m minimal}`` refines every open cover. It is also
    forced: any refinement of it must contain each ``up(m)`` itself, because
    the only open inside ``up(m)`` containing ``m`` is ``up(m)``. Its order is
    therefore the answer, and it is realised by the cover by minimal opens.
    """
    if X.n == 0:
        return -1
    mins = X.minimal_points()
    order = max(sum(1 for m in mins if X.leq(m, x)) for x in range(X.n))
    return order - 1


def covering_dimension_bruteforce(X: FinitePoset) -> int:
    """Definition-faithful covering dimension by searching every open cover.

    Only feasible for a handful of points. Refinements are searched among
    irredundant subfamilies (dropping members never raises the order), which
    have at most |X| members.
    """
    if X.n == 0:
        return -1
    opens = [m for m in X.opens_mask() if m]
    full = X.full

    def order(family) -> int:
        return max(sum(1 for V in family if V >> x & 1) for x in range(X.n))

    best_for: dict[frozenset, int] = {}
    worst = 0
    for r in range(1, len(opens) + 1):
        for cover in itertools.combinations(opens, r):
            u = 0
            for V in cover:
                u |= V
            if u != full:
                continue
            below = frozenset(V for V in opens if any(V & ~W == 0 for W in cover))
            if below not in best_for:
                cand = sorted(below)
                best = None
                for s in range(1, X.n + 1):
                    for fam in itertools.combinations(cand, s):
                        u = 0
                        for V in fam:
                            u |= V
                        if u == full:
                            o = order(fam)
                            best = o if best is None else min(best, o)
                    if best == 1:
                        break
                best_for[below] = best
            worst = max(worst, best_for[below])
    return worst - 1


def subspace(X: FinitePoset, S: Iterable[int]) -> FinitePoset:
    pts = sorted(set(S))
    index = {p: i for i, p in enumerate(pts)}
    rel = [(index[x], index[y]) for x in pts for y in pts if x != y and X.leq(x, y)]
    return FinitePoset(len(pts), rel)


def subspace_points(S: Iterable[int]) -> tuple[int, ...]:
    """Original labels of the points of ``subspace(X, S)``, in order."""
    return tuple(sorted(set(S)))


def _closure_shrinking(X: FinitePoset, cover: Cover) -> dict:
    # the largest open whose closure fits in U is the union of the minimal
    # opens up(x) with closure(up(x)) inside U; a shrinking exists iff these cover
    shrunk = {}
    total = 0
    for label, U in zip(cover.labels, cover.members):
        m = 0
        for x in range(X.n):
            if X.close_mask(X.up[x]) & ~U.mask == 0:
                m |= X.up[x]
        shrunk[label] = m
        total |= m
    if total != X.full:
        raise ShrinkingUnavailable("no cover with closures inside the original members exists")
    return shrunk


def refine_cover_core(
    X: FinitePoset,
    cover: Cover,
    k: int,
    subcovers: Mapping[frozenset, Cover | Sequence[Iterable[int]]],
) -> tuple[Cover, dict]:
    """Refine ``cover`` so that (k+1)-fold overlaps land in the given subcovers.

    ``subcovers[J]`` covers ``U_J``, the intersection of the members indexed
    by the (k+1)-subset ``J``. Omitted ``J`` are allowed only when ``U_J`` is
    empty. Returns the new cover (labels are ``("core", a)`` and
    ``("patch", a, J, b)``) and the index map ``pi`` to the old labels.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    A = list(cover.labels)
    U = {a: cover.member(a).mask for a in A}
    subsets = [frozenset(J) for J in itertools.combinations(A, k + 1)]
    V: dict[frozenset, list[int]] = {}
    for J in subsets:
        UJ = X.full
        for a in J:
            UJ &= U[a]
        given = subcovers.get(J)
        if given is None:
            if UJ:
                raise NotACover(f"no subcover given for {sorted(J, key=str)}")
            V[J] = []
            continue
        members = given.members if isinstance(given, Cover) else [OpenSet(X, frozenset(m)) for m in given]
        masks = [m.mask for m in members]
        u = 0
        for m in masks:
            if m & ~UJ:
                raise NotACover(f"subcover member {sorted(_bits(m))} leaves U_J")
            u |= m
        if u != UJ:
            raise NotACover(f"subcover of {sorted(J, key=str)} does not cover U_J")
        V[J] = masks

    Up = _closure_shrinking(X, cover)
    K = {}
    for J in subsets:
        m = X.full
        for a in J:
            m &= X.close_mask(Up[a])
        K[J] = m

    labels, masks, pi = [], [], {}
    for a in A:
        avoid = 0
        for J in subsets:
            if a in J:
                avoid |= K[J]
        core = Up[a] & ~avoid
        for J in subsets:
            if a not in J:
                continue
            for b, Vb in enumerate(V[J]):
                lab = ("patch", a, J, b)
                labels.append(lab)
                masks.append(core | (Vb & Up[a]))
                pi[lab] = a
        lab = ("core", a)
        labels.append(lab)
        masks.append(core)
        pi[lab] = a

    for lab, m in zip(labels, masks):
        if m & ~U[pi[lab]]:
            raise CoreConditionFailed(f"member {lab} leaves U_{pi[lab]}")
    for combo in itertools.combinations(range(len(labels)), k + 1):
        J = frozenset(pi[labels[i]] for i in combo)
        if len(J) != k + 1:
            continue
        inter = X.full
        for i in combo:
            inter &= masks[i]
        if inter and not any(inter & ~Vb == 0 for Vb in V[J]):
            raise CoreConditionFailed(
                f"overlap of {[labels[i] for i in combo]} is in no member of the subcover of {sorted(J, key=str)}"
            )
    out = Cover(X, tuple(OpenSet(X, _set(m)) for m in masks), tuple(labels))
    return out, pi


# enumeration and sampling

def _refined_cells(X: FinitePoset) -> list[tuple]:
    sig = [(bin(X.down[x]).count("1"), bin(X.up[x]).count("1")) for x in range(X.n)]
    for _ in range(3):
        sig = [
            (
                sig[x],
                tuple(sorted(sig[y] for y in _bits(X.up[x]) if y != x)),
                tuple(sorted(sig[y] for y in _bits(X.down[x]) if y != x)),
            )
            for x in range(X.n)
        ]
        # compress to ints to keep tuples small
        table = {s: i for i, s in enumerate(sorted(set(sig)))}
        sig = [table[s] for s in sig]
    return sig


def canonical_form(X: FinitePoset) -> tuple:
    """A complete isomorphism invariant (exact, brute force within cells)."""
    sig = _refined_cells(X)
    cells: dict[int, list[int]] = {}
    for x, s in enumerate(sig):
        cells.setdefault(s, []).append(x)
    keys = sorted(cells)
    best = None
    for perms in itertools.product(*(itertools.permutations(cells[k]) for k in keys)):
        order = [x for p in perms for x in p]
        pos = {x: i for i, x in enumerate(order)}
        code = tuple(sorted((pos[x], pos[y]) for x, y in X.le if x != y))
        if best is None or code < best:
            best = code
    return (X.n, tuple(sorted(sig)), best)


def enumerate_posets(n: int) -> list[FinitePoset]:
    """One representative of every isomorphism class of n-point posets."""
    if n == 0:
        return [FinitePoset(0, [])]
    reps = []
    for P in enumerate_posets(n - 1):
        seen_here = set()
        # the new point is maximal; its strict down-set is any closed set of P
        for D in (P.full & ~O for O in P.opens_mask()):
            if D in seen_here:
                continue
            seen_here.add(D)
            rel = [(x, y) for x, y in P.le if x != y] + [(x, n - 1) for x in _bits(D)]
            reps.append(FinitePoset(n, rel))
    uniq = {}
    for Q in reps:
        uniq.setdefault(canonical_form(Q), Q)
    return list(uniq.values())


def random_poset(rng: random.Random, n: int, density: float | None = None) -> FinitePoset:
    """Random order: a random DAG on a shuffled ground set, closed up."""
    if density is None:
        density = rng.uniform(0.1, 0.6)
    perm = list(range(n))
    rng.shuffle(perm)
    rel = [
        (perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < density
    ]
    return FinitePoset(n, rel)


def find_isomorphism(X: FinitePoset, Y: FinitePoset) -> dict[int, int] | None:
    """An order isomorphism X -> Y as a dict, or None."""
    if X.n != Y.n or len(X.le) != len(Y.le):
        return None
    px = [(bin(X.down[x]).count("1"), bin(X.up[x]).count("1")) for x in range(X.n)]
    py = [(bin(Y.down[y]).count("1"), bin(Y.up[y]).count("1")) for y in range(Y.n)]
    if sorted(px) != sorted(py):
        return None
    order = sorted(range(X.n), key=lambda x: sum(1 for p in px if p == px[x]))
    f: dict[int, int] = {}
    used = [False] * Y.n

    def ok(x: int, y: int) -> bool:
        for a, b in f.items():
            if X.leq(a, x) != Y.leq(b, y) or X.leq(x, a) != Y.leq(y, b):
                return False
        return True

    def rec(i: int) -> bool:
        if i == len(order):
            return True
        x = order[i]
        for y in range(Y.n):
            if not used[y] and px[x] == py[y] and ok(x, y):
                f[x] = y
                used[y] = True
                if rec(i + 1):
                    return True
                del f[x]
                used[y] = False
        return False

    return dict(f) if rec(0) else None


# fixtures used throughout docs and tests
def sierpinski() -> FinitePoset:
    return FinitePoset(2, [(0, 1)])


def pseudo_circle() -> FinitePoset:
    """Points a, b, c, d = 0, 1, 2, 3 with a, b < c, d."""
    return FinitePoset(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


def discrete(n: int) -> FinitePoset:
    return FinitePoset(n, [])


def chain(n: int) -> FinitePoset:
    return FinitePoset(n, [(i, i + 1) for i in range(n - 1)])
