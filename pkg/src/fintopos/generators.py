"""Seeded random objects for property sweeps and the audit command."""

from __future__ import annotations

import random
from typing import Sequence

from .cohomology import AbSheaf, ab_sheaf_from_presentations
from .finposet import FinitePoset, _bits, random_poset
from .sheaf import Presheaf, SetSheaf, SheafMorphism
from .simplicial import SimplicialSet, attach, compatible_boundaries, from_cells


def _classes_below(X: FinitePoset, y: int, sizes, gen) -> tuple[list[tuple[int, int]], dict]:
    """Colimit of the stalks strictly below y: element -> class id."""
    below = [x for x in _bits(X.down[y]) if x != y]
    parent = {(x, s): (x, s) for x in below for s in range(sizes[x])}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for x in below:
        for w in below:
            if x != w and X.leq(x, w):
                for s in range(sizes[x]):
                    a, b = find((x, s)), find((w, gen[(x, w)][s]))
                    if a != b:
                        parent[a] = b
    roots = sorted({find(e) for e in parent})
    pos = {r: i for i, r in enumerate(roots)}
    return roots, {e: pos[find(e)] for e in parent}


def _gen_from_classes(X: FinitePoset, y: int, cls: dict, f: Sequence[int], sizes) -> dict:
    out = {}
    for x in _bits(X.down[y]):
        if x != y:
            out[(x, y)] = tuple(f[cls[(x, s)]] for s in range(sizes[x]))
    return out


def random_set_sheaf(rng: random.Random, X: FinitePoset, max_stalk: int = 3) -> SetSheaf:
    sizes: dict[int, int] = {}
    gen: dict[tuple[int, int], tuple[int, ...]] = {}
    for y in X.linear_extension:
        roots, cls = _classes_below(X, y, sizes, gen)
        k = rng.randint(1, max_stalk)
        f = [rng.randrange(k) for _ in roots]
        sizes[y] = k
        gen.update(_gen_from_classes(X, y, cls, f, sizes))
    stalks = [[f"{x}.{i}" for i in range(sizes[x])] for x in range(X.n)]
    return SetSheaf(X, stalks, gen)


def random_morphism(
    rng: random.Random, X: FinitePoset, max_stalk: int = 3, surjective_bias: float = 0.5
) -> SheafMorphism:
    """A random map E' -> E between random sheaves, built point by point."""
    surj = rng.random() < surjective_bias
    sz: dict[int, int] = {}
    szp: dict[int, int] = {}
    gen: dict = {}
    genp: dict = {}
    phi: dict[int, list[int]] = {}
    for y in X.linear_extension:
        roots, cls = _classes_below(X, y, sz, gen)
        k = rng.randint(1, max_stalk)
        f = [rng.randrange(k) for _ in roots]
        sz[y] = k
        gen.update(_gen_from_classes(X, y, cls, f, sz))
        rootsp, clsp = _classes_below(X, y, szp, genp)
        # where each class of E' below y is forced to land in E_y
        target = [None] * len(rootsp)
        for (x, s), c in clsp.items():
            target[c] = gen[(x, y)][phi[x][s]]
        by_target: dict[int, list[int]] = {}
        for c, t in enumerate(target):
            by_target.setdefault(t, []).append(c)
        elems: list[int] = []  # target of each new element
        assign = [0] * len(rootsp)
        for t, cs in sorted(by_target.items()):
            blocks = rng.randint(1, len(cs))
            ids = []
            for _ in range(blocks):
                ids.append(len(elems))
                elems.append(t)
            for c in cs:
                assign[c] = rng.choice(ids)
        # drop unused blocks, then merge down to the size cap
        used = sorted(set(assign))
        remap = {u: i for i, u in enumerate(used)}
        elems = [elems[u] for u in used]
        assign = [remap[a] for a in assign]
        while len(elems) > max_stalk:
            dup = next(i for i in range(len(elems)) for j in range(i) if elems[i] == elems[j])
            keep = next(j for j in range(dup) if elems[j] == elems[dup])
            assign = [keep if a == dup else (a - 1 if a > dup else a) for a in assign]
            del elems[dup]
        missing = [t for t in range(k) if t not in elems]
        if surj:
            for t in missing:
                if len(elems) < max_stalk:
                    elems.append(t)
        extra = rng.randint(0, max(0, max_stalk - len(elems)))
        for _ in range(extra):
            elems.append(rng.randrange(k))
        if not elems:
            elems.append(rng.randrange(k))
        szp[y] = len(elems)
        phi[y] = elems
        genp.update(_gen_from_classes(X, y, clsp, assign, szp))
    E = SetSheaf(X, [[f"{x}.{i}" for i in range(sz[x])] for x in range(X.n)], gen)
    Ep = SetSheaf(X, [[f"{x}'{i}" for i in range(szp[x])] for x in range(X.n)], genp)
    return SheafMorphism(Ep, E, [phi[x] for x in range(X.n)])


def random_presheaf(rng: random.Random, X: FinitePoset, max_value: int = 4) -> Presheaf:
    """A random presheaf, built from small opens to large ones.

    The value on U is a random list (repetitions allowed) of compatible
    families over the maximal proper open subsets of U, which is the most
    general way to extend a presheaf from the opens below U.
    """
    opens = sorted(X.opens_mask(), key=lambda m: (bin(m).count("1"), m))
    values: dict[int, list[tuple]] = {0: [()]}
    res: dict[tuple[int, int], tuple[int, ...]] = {}

    def r(U: int, V: int) -> tuple[int, ...]:
        return tuple(range(len(values[U]))) if U == V else res[(U, V)]

    for U in opens[1:]:
        subs = [U & ~(1 << p) for p in X.minimal_points(U)]
        fams: list[tuple[int, ...]] = [()]
        for i, V in enumerate(subs):
            nxt = []
            for fam in fams:
                for s in range(len(values[V])):
                    if all(r(subs[j], subs[j] & V)[fam[j]] == r(V, subs[j] & V)[s] for j in range(i)):
                        nxt.append(fam + (s,))
            fams = nxt
            if len(fams) > 4096:
                fams = rng.sample(fams, 4096)
        if not fams:
            values[U] = []
        else:
            k = rng.randint(1, max_value)
            if rng.random() < 0.5 and len(fams) >= k:
                chosen = rng.sample(fams, k)
            else:
                chosen = [rng.choice(fams) for _ in range(k)]
            values[U] = chosen
        for V, j in zip(subs, range(len(subs))):
            res[(U, V)] = tuple(fam[j] for fam in values[U])
    vals = {U: [f"{U}:{i}" for i in range(len(values[U]))] for U in opens}
    vals[0] = ["*"]
    return Presheaf(X, vals, res)


def random_ab_sheaf(
    rng: random.Random, X: FinitePoset, max_rank: int = 2, max_exponent: int = 4, tries: int = 200
) -> AbSheaf:
    """Cokernel of a random map between sums of representable sheaves.

    The representable at x is Z on up(x); a map from the one at y to the one
    at x is an integer, nonzero only when x <= y. Draws are rejected until
    every stalk has rank <= max_rank and exponent <= max_exponent.
    """
    for _ in range(tries):
        gens = [rng.randrange(X.n) for _ in range(rng.randint(1, 3))]
        rels = [rng.randrange(X.n) for _ in range(rng.randint(0, 3))]
        A = [[rng.randint(-4, 4) if X.leq(g, r) else 0 for r in rels] for g in gens]
        rows = [[i for i, g in enumerate(gens) if X.leq(g, z)] for z in range(X.n)]
        cols = [[j for j, r in enumerate(rels) if X.leq(r, z)] for z in range(X.n)]
        presentations = [[[A[i][j] for j in cols[z]] for i in rows[z]] for z in range(X.n)]
        gen = {}
        for a, b in X.covering_pairs:
            # inclusion of generator sets
            gen[(a, b)] = [[int(i == k) for k in rows[a]] for i in rows[b]]
        F = ab_sheaf_from_presentations(X, [len(r) for r in rows], presentations, gen)
        if all(s.rank <= max_rank and s.exponent <= max_exponent for s in F.stalks):
            return F
    raise RuntimeError("could not draw a sheaf within the bounds")


def random_simplicial_set(rng: random.Random, max_cells: int, max_dim: int, d_max: int | None = None) -> SimplicialSet:
    """Random cell attachments in nondecreasing dimension."""
    total = rng.randint(1, max_cells)
    verts = rng.randint(1, total)
    cells: list[list] = [[()] * verts]
    X = from_cells(cells, max_dim)
    n = 1
    for _ in range(total - verts):
        n = rng.randint(n, min(max_dim, len(cells)))
        bds = compatible_boundaries(X, n)
        cells = attach(cells, X, n, rng.choice(bds))
        X = from_cells(cells, max_dim)
    return X if d_max is None or d_max == max_dim else from_cells(cells, d_max)


def random_space(rng: random.Random, max_points: int, min_points: int = 1) -> FinitePoset:
    return random_poset(rng, rng.randint(min_points, max_points))


def presheaf_corpus(seed: int, count: int, max_points: int = 6, max_value: int = 4) -> list[Presheaf]:
    rng = random.Random(seed)
    return [random_presheaf(rng, random_space(rng, max_points), max_value) for _ in range(count)]


def morphism_corpus(seed: int, count: int, max_points: int = 5, max_stalk: int = 3) -> list[SheafMorphism]:
    rng = random.Random(seed)
    return [random_morphism(rng, random_space(rng, max_points), max_stalk) for _ in range(count)]


__all__ = [
    "random_set_sheaf",
    "random_morphism",
    "random_presheaf",
    "random_ab_sheaf",
    "random_simplicial_set",
    "random_space",
    "presheaf_corpus",
    "morphism_corpus",
]
