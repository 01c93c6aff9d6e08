"""Sheaves of finite sets on finite spaces.

A sheaf on a finite Alexandrov space is the same thing as a functor on the
specialization order, so ``SetSheaf`` stores stalks and generization maps
``stalk(x) -> stalk(y)`` for ``x <= y`` and computes sections on demand.
``Presheaf`` stores a value for every open set and is the only type for
which the sheaf condition is a real question.

Internally stalk elements are referred to by their position in the stalk;
labels are only carried along for display and documents.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import NotContinuous, NotFunctorial, SpaceMismatch, TooLarge
from .finposet import ContinuousMap, FinitePoset, OpenSet, _bits, _mask

IndexMap = tuple[int, ...]


def _compose(f: IndexMap, g: IndexMap) -> IndexMap:
    """g after f."""
    return tuple(g[i] for i in f)


def _complete_functor(P: FinitePoset, sizes: Sequence[int], maps: Mapping[tuple[int, int], Sequence[int]]) -> dict:
    """Extend maps given on (at least) the Hasse edges to every pair x < y.

    Raises NotFunctorial if a supplied map is malformed or two composites
    disagree.
    """
    out: dict[tuple[int, int], IndexMap] = {}
    for (x, y), f in maps.items():
        if x == y:
            if tuple(f) != tuple(range(sizes[x])):
                raise NotFunctorial(f"map at ({x}, {x}) is not the identity")
            continue
        if not P.lt(x, y):
            raise NotFunctorial(f"({x}, {y}) is not a strict relation")
        f = tuple(f)
        if len(f) != sizes[x] or any(not 0 <= v < sizes[y] for v in f):
            raise NotFunctorial(f"map ({x}, {y}) has the wrong shape")
        out[(x, y)] = f
    for x, y in P.covering_pairs:
        if (x, y) not in out:
            if sizes[x] and sizes[y] != 1:
                raise NotFunctorial(f"missing map for covering pair ({x}, {y})")
            out[(x, y)] = (0,) * sizes[x]
    # fill longer pairs in order of the gap between them
    pairs = sorted(
        ((x, y) for x in range(P.n) for y in _bits(P.up[x]) if x != y),
        key=lambda p: bin(P.up[p[0]] & P.down[p[1]]).count("1"),
    )
    for x, y in pairs:
        if (x, y) in out:
            continue
        w = next(w for w in _bits(P.up[x] & P.down[y]) if w not in (x, y) and (x, w) in out and (w, y) in out)
        out[(x, y)] = _compose(out[(x, w)], out[(w, y)])
    for x, y in pairs:
        for w in _bits(P.up[x] & P.down[y]):
            if w in (x, y):
                continue
            if _compose(out[(x, w)], out[(w, y)]) != out[(x, y)]:
                raise NotFunctorial(f"composite {x} -> {w} -> {y} disagrees with ({x}, {y})")
    return out


class SetSheaf:
    """Stalks and generization maps on a finite poset."""

    def __init__(
        self,
        space: FinitePoset,
        stalks: Sequence[Sequence],
        gen: Mapping[tuple[int, int], Sequence[int]] | None = None,
    ):
        if len(stalks) != space.n:
            raise SpaceMismatch("one stalk per point is required")
        self.space = space
        self.stalks: tuple[tuple, ...] = tuple(tuple(s) for s in stalks)
        self.gen = _complete_functor(space, [len(s) for s in self.stalks], gen or {})

    def size(self, x: int) -> int:
        return len(self.stalks[x])

    def g(self, x: int, y: int) -> IndexMap:
        if x == y:
            return tuple(range(self.size(x)))
        return self.gen[(x, y)]

    @property
    def total_size(self) -> int:
        return sum(len(s) for s in self.stalks)

    def sections_mask(self, U: int) -> list[tuple[int, ...]]:
        """Compatible families over the open set U, indexed by sorted points."""
        X = self.space
        pts = sorted(_bits(U))
        pos = {p: i for i, p in enumerate(pts)}
        mins = X.minimal_points(U)
        out = []
        # a section is determined by its values at the minimal points of U
        for choice in itertools.product(*(range(self.size(m)) for m in mins)):
            vals: list[int | None] = [None] * len(pts)
            ok = True
            for m, s in zip(mins, choice):
                for y in _bits(X.up[m] & U):
                    v = self.g(m, y)[s]
                    cur = vals[pos[y]]
                    if cur is None:
                        vals[pos[y]] = v
                    elif cur != v:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(tuple(vals))
        return out

    def restrict_section(self, s: tuple[int, ...], U: int, V: int) -> tuple[int, ...]:
        pts = sorted(_bits(U))
        keep = [i for i, p in enumerate(pts) if V >> p & 1]
        return tuple(s[i] for i in keep)

    def sections_presheaf(self) -> "Presheaf":
        X = self.space
        values = {U: self.sections_mask(U) for U in X.opens_mask()}
        res = {}
        for U, secs in values.items():
            for V in values:
                if V != U and V & ~U == 0:
                    index = {s: i for i, s in enumerate(values[V])}
                    res[(U, V)] = tuple(index[self.restrict_section(s, U, V)] for s in secs)
        return Presheaf(X, values, res, check=False)

    def __repr__(self) -> str:
        return f"SetSheaf(sizes={[len(s) for s in self.stalks]})"

    def to_doc(self) -> dict:
        return {
            "space": self.space.to_doc(),
            "stalks": [[_jsonable(e) for e in s] for s in self.stalks],
            "gen": {
                f"{x},{y}": [_jsonable(self.stalks[y][v]) for v in self.gen[(x, y)]]
                for x, y in self.space.covering_pairs
            },
        }


def sections(F: SetSheaf, U: OpenSet | Iterable[int]) -> list[tuple[int, ...]]:
    m = U.mask if isinstance(U, OpenSet) else _mask(U)
    if not F.space.is_open_mask(m):
        from .errors import NotOpen

        raise NotOpen(f"{sorted(_bits(m))} is not open")
    return F.sections_mask(m)


def _jsonable(e):
    if isinstance(e, (str, int, float, bool)) or e is None:
        return e
    if isinstance(e, tuple):
        return [_jsonable(v) for v in e]
    return str(e)


def constant_sheaf(X: FinitePoset, elements: Sequence) -> SetSheaf:
    k = len(elements)
    return SetSheaf(X, [tuple(elements)] * X.n, {p: tuple(range(k)) for p in X.covering_pairs})


def terminal_sheaf(X: FinitePoset) -> SetSheaf:
    return constant_sheaf(X, ("*",))


def skyscraper(X: FinitePoset, x: int, elements: Sequence) -> SetSheaf:
    """Sections over U are ``elements`` if x lies in U, a point otherwise."""
    stalks = [tuple(elements) if X.leq(y, x) else ("*",) for y in range(X.n)]
    gen = {}
    for a, b in X.covering_pairs:
        if X.leq(b, x):
            gen[(a, b)] = tuple(range(len(elements)))
        else:
            gen[(a, b)] = (0,) * len(stalks[a])
    return SetSheaf(X, stalks, gen)


class SheafMorphism:
    def __init__(self, source: SetSheaf, target: SetSheaf, components: Sequence[Sequence[int]], check: bool = True):
        if source.space != target.space:
            raise SpaceMismatch("morphism between sheaves on different spaces")
        self.source = source
        self.target = target
        self.components: tuple[IndexMap, ...] = tuple(tuple(c) for c in components)
        if check:
            X = source.space
            for x in range(X.n):
                c = self.components[x]
                if len(c) != source.size(x) or any(not 0 <= v < target.size(x) for v in c):
                    raise NotFunctorial(f"component at {x} has the wrong shape")
            for x, y in X.covering_pairs:
                a = _compose(self.components[x], target.g(x, y))
                b = _compose(source.g(x, y), self.components[y])
                if a != b:
                    raise NotFunctorial(f"naturality fails on ({x}, {y})")

    def __call__(self, x: int, s: int) -> int:
        return self.components[x][s]

    def then(self, other: "SheafMorphism") -> "SheafMorphism":
        return SheafMorphism(
            self.source,
            other.target,
            [_compose(c, d) for c, d in zip(self.components, other.components)],
            check=False,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, SheafMorphism) and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    @classmethod
    def identity(cls, F: SetSheaf) -> "SheafMorphism":
        return cls(F, F, [tuple(range(F.size(x))) for x in range(F.space.n)], check=False)


def fiber_product(f: SheafMorphism, g: SheafMorphism) -> tuple[SetSheaf, SheafMorphism, SheafMorphism]:
    """A x_C B for f: A -> C, g: B -> C, with its two projections."""
    A, B = f.source, g.source
    X = A.space
    pairs = [
        [(a, b) for a in range(A.size(x)) for b in range(B.size(x)) if f(x, a) == g(x, b)]
        for x in range(X.n)
    ]
    index = [{p: i for i, p in enumerate(ps)} for ps in pairs]
    stalks = [[(A.stalks[x][a], B.stalks[x][b]) for a, b in ps] for x, ps in enumerate(pairs)]
    gen = {
        (x, y): tuple(index[y][(A.g(x, y)[a], B.g(x, y)[b])] for a, b in pairs[x])
        for x, y in X.covering_pairs
    }
    P = SetSheaf(X, stalks, gen)
    p1 = SheafMorphism(P, A, [[a for a, _ in ps] for ps in pairs], check=False)
    p2 = SheafMorphism(P, B, [[b for _, b in ps] for ps in pairs], check=False)
    return P, p1, p2


def coproduct(sheaves: Sequence[SetSheaf]) -> tuple[SetSheaf, list[SheafMorphism]]:
    X = sheaves[0].space
    offs = []
    stalks: list[list] = [[] for _ in range(X.n)]
    for x in range(X.n):
        o = []
        for i, F in enumerate(sheaves):
            o.append(len(stalks[x]))
            stalks[x].extend((i, e) for e in F.stalks[x])
        offs.append(o)
    gen = {}
    for x, y in X.covering_pairs:
        m = []
        for i, F in enumerate(sheaves):
            m.extend(offs[y][i] + v for v in F.g(x, y))
        gen[(x, y)] = tuple(m)
    S = SetSheaf(X, stalks, gen)
    incl = [
        SheafMorphism(F, S, [[offs[x][i] + s for s in range(F.size(x))] for x in range(X.n)], check=False)
        for i, F in enumerate(sheaves)
    ]
    return S, incl


def fold_map(F: SetSheaf, copies: int = 2) -> SheafMorphism:
    S, _ = coproduct([F] * copies)
    return SheafMorphism(S, F, [[s for _ in range(copies) for s in range(F.size(x))] for x in range(F.space.n)])


def is_mono(phi: SheafMorphism) -> bool:
    by_components = all(len(set(c)) == len(c) for c in phi.components)
    # (-1)-truncatedness: the diagonal into the kernel pair is an isomorphism
    K, _, _ = fiber_product(phi, phi)
    by_diagonal = all(K.size(x) == phi.source.size(x) for x in range(K.space.n))
    assert by_components == by_diagonal, "injectivity and diagonal test disagree"
    return by_components


def is_surjective(phi: SheafMorphism) -> bool:
    return all(set(c) == set(range(phi.target.size(x))) for x, c in enumerate(phi.components))


def is_iso(phi: SheafMorphism) -> bool:
    return all(sorted(c) == list(range(phi.target.size(x))) for x, c in enumerate(phi.components))


def image_factorization(phi: SheafMorphism) -> tuple[SheafMorphism, SheafMorphism]:
    """phi = mono . surjection through the stalkwise image."""
    F, G = phi.source, phi.target
    X = F.space
    img = [sorted(set(c)) for c in phi.components]
    pos = [{v: i for i, v in enumerate(im)} for im in img]
    I = SetSheaf(
        X,
        [[G.stalks[x][v] for v in im] for x, im in enumerate(img)],
        {(x, y): tuple(pos[y][G.g(x, y)[v]] for v in img[x]) for x, y in X.covering_pairs},
    )
    e = SheafMorphism(F, I, [[pos[x][v] for v in c] for x, c in enumerate(phi.components)])
    m = SheafMorphism(I, G, img)
    assert e.then(m) == phi
    assert is_surjective(e) and is_mono(m)
    return e, m


# ---------------------------------------------------------------- homs, isos

def _functions_extending(n_src: int, n_tgt: int, fixed: dict) -> Iterator[tuple[int, ...]]:
    free = [i for i in range(n_src) if i not in fixed]
    for vals in itertools.product(range(n_tgt), repeat=len(free)):
        f = dict(fixed)
        f.update(zip(free, vals))
        yield tuple(f[i] for i in range(n_src))


def hom_set(F: SetSheaf, G: SetSheaf, limit: int | None = None) -> list[SheafMorphism]:
    """Every natural transformation F -> G, by backtracking over points."""
    X = F.space
    if G.space != X:
        raise SpaceMismatch("sheaves live on different spaces")
    order = X.linear_extension
    comps: dict[int, tuple[int, ...]] = {}
    out: list[SheafMorphism] = []

    def rec(i: int) -> bool:
        if i == len(order):
            out.append(SheafMorphism(F, G, [comps[x] for x in range(X.n)], check=False))
            return limit is not None and len(out) >= limit
        y = order[i]
        fixed: dict[int, int] = {}
        for x in _bits(X.down[y] & ~(1 << y)):
            gf, gg = F.g(x, y), G.g(x, y)
            for s in range(F.size(x)):
                want = gg[comps[x][s]]
                have = fixed.setdefault(gf[s], want)
                if have != want:
                    return False
        for f in _functions_extending(F.size(y), G.size(y), fixed):
            comps[y] = f
            if rec(i + 1):
                return True
        comps.pop(y, None)
        return False

    rec(0)
    return out


def find_isomorphism(F: SetSheaf, G: SetSheaf) -> SheafMorphism | None:
    if F.space != G.space or any(F.size(x) != G.size(x) for x in range(F.space.n)):
        return None
    X = F.space
    order = X.linear_extension
    comps: dict[int, tuple[int, ...]] = {}

    def rec(i: int) -> SheafMorphism | None:
        if i == len(order):
            return SheafMorphism(F, G, [comps[x] for x in range(X.n)], check=False)
        y = order[i]
        fixed: dict[int, int] = {}
        for x in _bits(X.down[y] & ~(1 << y)):
            gf, gg = F.g(x, y), G.g(x, y)
            for s in range(F.size(x)):
                want = gg[comps[x][s]]
                if fixed.setdefault(gf[s], want) != want:
                    return None
        if len(set(fixed.values())) != len(fixed):
            return None
        free = [s for s in range(F.size(y)) if s not in fixed]
        rest = [t for t in range(G.size(y)) if t not in set(fixed.values())]
        for perm in itertools.permutations(rest):
            f = dict(fixed)
            f.update(zip(free, perm))
            comps[y] = tuple(f[s] for s in range(F.size(y)))
            found = rec(i + 1)
            if found is not None:
                return found
        comps.pop(y, None)
        return None

    return rec(0)


# ------------------------------------------------------- pushforward/pullback

def pullback(f: ContinuousMap, G: SetSheaf) -> SetSheaf:
    if G.space != f.target:
        raise NotContinuous("sheaf does not live on the target of the map")
    X = f.source
    stalks = [G.stalks[f(x)] for x in range(X.n)]
    gen = {(x, y): G.g(f(x), f(y)) for x, y in X.covering_pairs}
    return SetSheaf(X, stalks, gen)


def pushforward(f: ContinuousMap, F: SetSheaf) -> SetSheaf:
    """Stalk at y is the set of sections of F over the preimage of up(y)."""
    if F.space != f.source:
        raise NotContinuous("sheaf does not live on the source of the map")
    Y = f.target
    pre = [f.preimage_mask(Y.up[y]) for y in range(Y.n)]
    secs = [F.sections_mask(m) for m in pre]
    index = [{s: i for i, s in enumerate(ss)} for ss in secs]
    gen = {}
    for a, b in Y.covering_pairs:
        gen[(a, b)] = tuple(index[b][F.restrict_section(s, pre[a], pre[b])] for s in secs[a])
    return SetSheaf(Y, secs, gen)


# ------------------------------------------------------------------ presheaves

class Presheaf:
    """Finite sets on every open of a finite space, with restriction maps.

    ``values`` is keyed by open bitmask; ``res[(U, V)]`` for V inside U maps
    positions in values[U] to positions in values[V]. Maps along
    one-point-smaller inclusions are enough; the rest are composed.
    """

    def __init__(self, space: FinitePoset, values: Mapping[int, Sequence], res: Mapping, check: bool = True):
        self.space = space
        opens = sorted(space.opens_mask(), key=lambda m: (bin(m).count("1"), m))
        missing = [U for U in opens if U not in values]
        if missing:
            raise NotFunctorial(f"no value on open {sorted(_bits(missing[0]))}")
        self.opens = opens
        self.values: dict[int, tuple] = {U: tuple(values[U]) for U in opens}
        if len(self.values[0]) != 1:
            raise NotFunctorial("the value on the empty set must be a singleton")
        self.res: dict[tuple[int, int], IndexMap] = {}
        for (U, V), f in res.items():
            if V == U:
                continue
            if V & ~U or U not in self.values or V not in self.values:
                raise NotFunctorial("restriction along a non-inclusion")
            f = tuple(f)
            if len(f) != len(self.values[U]) or any(not 0 <= v < len(self.values[V]) for v in f):
                raise NotFunctorial("restriction map has the wrong shape")
            self.res[(U, V)] = f
        # the poset of opens under reverse inclusion has Hasse edges U -> U - {p}
        for U in sorted(opens, key=lambda m: -bin(m).count("1")):
            for V in sorted(opens, key=lambda m: -bin(m).count("1")):
                if V == U or V & ~U or (U, V) in self.res:
                    continue
                step = next(
                    (W for W in opens if W != U and V & ~W == 0 and W & ~U == 0 and (U, W) in self.res and (W, V) in self.res),
                    None,
                )
                if step is None:
                    if len(self.values[U]) and len(self.values[V]) != 1:
                        raise NotFunctorial(f"no restriction from {sorted(_bits(U))} to {sorted(_bits(V))}")
                    self.res[(U, V)] = (0,) * len(self.values[U])
                else:
                    self.res[(U, V)] = _compose(self.res[(U, step)], self.res[(step, V)])
        if check:
            self._check_functorial()

    def _check_functorial(self) -> None:
        opens = self.opens
        for U in opens:
            # intermediate opens one point smaller than U
            steps = [U & ~(1 << p) for p in _bits(U) if (U & ~(1 << p)) in self.values]
            for V in opens:
                if V == U or V & ~U:
                    continue
                for W in steps:
                    if V & ~W == 0:
                        via = self.r(W, V) if W != V else tuple(range(len(self.values[V])))
                        if _compose(self.res[(U, W)], via) != self.res[(U, V)]:
                            raise NotFunctorial(
                                f"restrictions {sorted(_bits(U))} -> {sorted(_bits(W))} -> {sorted(_bits(V))} disagree"
                            )

    def r(self, U: int, V: int) -> IndexMap:
        if U == V:
            return tuple(range(len(self.values[U])))
        return self.res[(U, V)]

    def size(self, U: int) -> int:
        return len(self.values[U])

    def to_doc(self) -> dict:
        X = self.space
        return {
            "space": X.to_doc(),
            "values": [{"open": sorted(_bits(U)), "elements": [_jsonable(e) for e in self.values[U]]} for U in self.opens],
            "restrictions": [
                {
                    "from": sorted(_bits(U)),
                    "to": sorted(_bits(U & ~(1 << p))),
                    "map": [_jsonable(self.values[U & ~(1 << p)][v]) for v in self.res[(U, U & ~(1 << p))]],
                }
                for U in self.opens
                for p in _bits(U)
                if (U & ~(1 << p)) in self.values
            ],
        }


@dataclass
class PresheafMorphism:
    source: Presheaf
    target: Presheaf
    components: dict[int, IndexMap]

    def is_iso(self) -> bool:
        return all(sorted(c) == list(range(self.target.size(U))) for U, c in self.components.items())

    def check_natural(self) -> bool:
        P, Q = self.source, self.target
        for (U, V), f in P.res.items():
            if _compose(f, self.components[V]) != _compose(self.components[U], Q.r(U, V)):
                return False
        return True


def _equalizer_ok(P: Presheaf, U: int, family: Sequence[int]) -> bool:
    """P(U) -> prod P(U_i) => prod P(U_i & U_j) is an equalizer."""
    seen = {}
    for s in range(P.size(U)):
        key = tuple(P.r(U, Ui)[s] for Ui in family)
        if key in seen:
            return False
        seen[key] = s
    # every matching family must come from a section
    ranges = [range(P.size(Ui)) for Ui in family]
    count = 0
    for fam in itertools.product(*ranges):
        if all(
            P.r(family[i], family[i] & family[j])[fam[i]] == P.r(family[j], family[i] & family[j])[fam[j]]
            for i in range(len(family))
            for j in range(i + 1, len(family))
        ):
            count += 1
            if fam not in seen:
                return False
    return count == len(seen)


def is_sheaf(P: Presheaf, exhaustive: bool = False) -> bool:
    """Gluing for open covers.

    Binary covers plus the empty cover imply gluing for every finite cover
    (induct on the number of members), so that is what is checked unless
    ``exhaustive`` asks for literally every covering family.
    """
    if P.size(0) != 1:
        return False
    if exhaustive:
        for U in P.opens:
            inside = [V for V in P.opens if V & ~U == 0 and V]
            for r in range(1, len(inside) + 1):
                for fam in itertools.combinations(inside, r):
                    u = 0
                    for V in fam:
                        u |= V
                    if u == U and not _equalizer_ok(P, U, fam):
                        return False
        return True
    for i, A in enumerate(P.opens):
        for B in P.opens[i + 1:]:
            if A & ~B == 0 or B & ~A == 0:
                continue
            if not _equalizer_ok(P, A | B, (A, B)):
                return False
    return True


def is_separated(P: Presheaf) -> bool:
    for U in P.opens:
        pts = list(_bits(U))
        fam = [P.space.up[x] for x in pts]
        keys = {tuple(P.r(U, V)[s] for V in fam) for s in range(P.size(U))}
        if len(keys) != P.size(U):
            return False
    return True


def _plus_fast(P: Presheaf) -> tuple[dict, dict]:
    """F+(U) evaluated at the minimal covering sieve of U.

    Every covering sieve of U contains up(x) for x in U, so the sieve they
    generate is final among covering sieves and the colimit is its limit:
    families (s_x in P(up x)) agreeing on pairwise overlaps.
    """
    X = P.space
    vals: dict[int, list[tuple[int, ...]]] = {}
    for U in P.opens:
        pts = sorted(_bits(U))
        ups = [X.up[x] for x in pts]
        fams: list[tuple[int, ...]] = [()]
        for i, Ui in enumerate(ups):
            nxt = []
            for fam in fams:
                for s in range(P.size(Ui)):
                    if all(
                        P.r(ups[j], ups[j] & Ui)[fam[j]] == P.r(Ui, ups[j] & Ui)[s] for j in range(i)
                    ):
                        nxt.append(fam + (s,))
            fams = nxt
        vals[U] = fams
    unit = {}
    for U in P.opens:
        pts = sorted(_bits(U))
        index = {f: i for i, f in enumerate(vals[U])}
        unit[U] = tuple(index[tuple(P.r(U, X.up[x])[s] for x in pts)] for s in range(P.size(U)))
    return vals, unit


def _sieve_limit(P: Presheaf, S: Sequence[int]) -> list[tuple[int, ...]]:
    """Compatible families over a downward-closed family of opens."""
    order = sorted(S, key=lambda m: -bin(m).count("1"))
    fams: list[tuple[int, ...]] = [()]
    for i, V in enumerate(order):
        nxt = []
        for fam in fams:
            for s in range(P.size(V)):
                if all(P.r(order[j], V)[fam[j]] == s for j in range(i) if V & ~order[j] == 0):
                    nxt.append(fam + (s,))
        fams = nxt
    return [dict(zip(order, f)) for f in fams]  # type: ignore[misc]


def _plus_all_sieves(P: Presheaf) -> dict[int, int]:
    """|F+(U)| as a genuine colimit over every covering sieve (small inputs)."""
    out = {}
    for U in P.opens:
        inside = [V for V in P.opens if V & ~U == 0]
        sieves = []
        for r in range(len(inside) + 1):
            for fam in itertools.combinations(inside, r):
                fs = set(fam)
                if any(W not in fs for V in fam for W in inside if W & ~V == 0):
                    continue
                u = 0
                for V in fam:
                    u |= V
                if u == U:
                    sieves.append(frozenset(fam))
        elems = []
        where = {}
        for S in sieves:
            for fam in _sieve_limit(P, sorted(S)):
                key = (S, tuple(sorted(fam.items())))
                where[key] = len(elems)
                elems.append(key)
        parent = list(range(len(elems)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for S in sieves:
            for T in sieves:
                if T < S:
                    for fam in _sieve_limit(P, sorted(S)):
                        a = where[(S, tuple(sorted(fam.items())))]
                        sub = tuple(sorted((V, s) for V, s in fam.items() if V in T))
                        b = where[(T, sub)]
                        parent[find(a)] = find(b)
        out[U] = len({find(i) for i in range(len(elems))})
    return out


def plus_construction(P: Presheaf, all_sieves: bool = False) -> tuple[Presheaf, PresheafMorphism]:
    """One step of F -> F+, with the unit map.

    With ``all_sieves`` the colimit is also computed over every covering
    sieve and the sizes are required to agree (only sensible on tiny spaces).
    """
    X = P.space
    vals, unit = _plus_fast(P)
    res = {}
    for U in P.opens:
        pts = sorted(_bits(U))
        for p in _bits(U):
            V = U & ~(1 << p)
            if V not in vals:
                continue
            keep = [i for i, x in enumerate(pts) if V >> x & 1]
            index = {f: i for i, f in enumerate(vals[V])}
            res[(U, V)] = tuple(index[tuple(f[i] for i in keep)] for f in vals[U])
    Q = Presheaf(X, vals, res, check=False)
    if all_sieves:
        sizes = _plus_all_sieves(P)
        assert all(sizes[U] == Q.size(U) for U in P.opens), "minimal-sieve shortcut disagrees with the colimit"
    eta = PresheafMorphism(P, Q, unit)
    return Q, eta


def compose_presheaf_maps(f: PresheafMorphism, g: PresheafMorphism) -> PresheafMorphism:
    return PresheafMorphism(f.source, g.target, {U: _compose(f.components[U], g.components[U]) for U in f.components})


def sheafify_plus(P: Presheaf, max_steps: int = 3) -> tuple[SetSheaf, PresheafMorphism]:
    """Sheafification by repeated plus construction.

    Applies F -> F+ until the gluing check passes (two steps always suffice
    for set-valued presheaves; one suffices when P is separated), then reads
    the result off as a stalk functor. Returns the sheaf and the unit from P
    to its presheaf of sections.
    """
    Q, eta = plus_construction(P)
    steps = 1
    while not is_sheaf(Q):
        if steps >= max_steps:
            raise AssertionError("plus construction did not converge")
        Q, eta2 = plus_construction(Q)
        eta = compose_presheaf_maps(eta, eta2)
        steps += 1
    X = P.space
    stalks = [Q.values[X.up[x]] for x in range(X.n)]
    gen = {(x, y): Q.r(X.up[x], X.up[y]) for x, y in X.covering_pairs}
    F = SetSheaf(X, stalks, gen)
    G = F.sections_presheaf()
    # Q is a sheaf, so restriction to the minimal opens identifies Q with G
    cmp = {}
    for U in Q.opens:
        index = {s: i for i, s in enumerate(G.values[U])}
        pts = sorted(_bits(U))
        cmp[U] = tuple(index[tuple(Q.r(U, X.up[x])[q] for x in pts)] for q in range(Q.size(U)))
    comparison = PresheafMorphism(Q, G, cmp)
    assert comparison.is_iso() and comparison.check_natural()
    return F, compose_presheaf_maps(eta, comparison)


def constant_presheaf(X: FinitePoset, elements: Sequence) -> Presheaf:
    """``elements`` on every nonempty open, a point on the empty set."""
    opens = list(X.opens_mask())
    values = {U: (tuple(elements) if U else ("*",)) for U in opens}
    res = {}
    for U in opens:
        for p in _bits(U):
            V = U & ~(1 << p)
            if V in values:
                res[(U, V)] = tuple(range(len(elements))) if V else (0,) * len(elements)
    return Presheaf(X, values, res)


def presheaf_isomorphic(P: Presheaf, Q: Presheaf) -> bool:
    """Brute-force presheaf isomorphism (bijections on each open)."""
    if P.space != Q.space or any(P.size(U) != Q.size(U) for U in P.opens):
        return False
    opens = sorted(P.opens, key=lambda m: -bin(m).count("1"))
    comp: dict[int, IndexMap] = {}

    def rec(i: int) -> bool:
        if i == len(opens):
            return True
        V = opens[i]
        for perm in itertools.permutations(range(Q.size(V))):
            if all(
                _compose(P.r(U, V), perm) == _compose(comp[U], Q.r(U, V)) for U in opens[:i] if V & ~U == 0
            ):
                comp[V] = perm
                if rec(i + 1):
                    return True
        return False

    return rec(0)


# ------------------------------------------------------------------ subobjects

@dataclass
class SubobjectLattice:
    base: SetSheaf
    elements: list[tuple[int, ...]]  # per point, a bitmask of stalk positions

    @cached_property
    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def le(self, a: int, b: int) -> bool:
        return all(x & ~y == 0 for x, y in zip(self.elements[a], self.elements[b]))

    def meet(self, a: int, b: int) -> int:
        return self.index[tuple(x & y for x, y in zip(self.elements[a], self.elements[b]))]

    def __len__(self) -> int:
        return len(self.elements)


def subobject_lattice(E: SetSheaf, bound: int = 18) -> SubobjectLattice:
    """All subsheaves of E: per-point subsets closed under generization."""
    if E.total_size > bound:
        raise TooLarge(f"total stalk size {E.total_size} exceeds {bound}")
    X = E.space
    order = X.linear_extension
    chosen: dict[int, int] = {}
    out: list[tuple[int, ...]] = []

    def rec(i: int) -> None:
        if i == len(order):
            out.append(tuple(chosen[x] for x in range(X.n)))
            return
        y = order[i]
        forced = 0
        for x in _bits(X.down[y] & ~(1 << y)):
            for s in _bits(chosen[x]):
                forced |= 1 << E.g(x, y)[s]
        free = [s for s in range(E.size(y)) if not forced >> s & 1]
        for r in range(len(free) + 1):
            for extra in itertools.combinations(free, r):
                chosen[y] = forced | _mask(extra)
                rec(i + 1)
        chosen.pop(y, None)

    rec(0)
    return SubobjectLattice(E, out)


def pullback_subobject(f: SheafMorphism, S: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(_mask(s for s, v in enumerate(c) if S[x] >> v & 1) for x, c in enumerate(f.components))


def pullback_is_injective(f: SheafMorphism, bound: int = 18) -> bool:
    """Whether f^*: Sub(E) -> Sub(E') is injective, by enumeration."""
    sub = subobject_lattice(f.target, bound)
    images = {pullback_subobject(f, S) for S in sub.elements}
    return len(images) == len(sub.elements)


# ------------------------------------------------------------------- colimits

def colim_finite(
    objects: Sequence[SetSheaf],
    arrows: Sequence[tuple[int, int, SheafMorphism]],
) -> tuple[SetSheaf, list[SheafMorphism]]:
    """Colimit as a quotient of the coproduct by the arrows, stalk by stalk."""
    X = objects[0].space
    for F in objects:
        if F.space != X:
            raise SpaceMismatch("diagram mixes spaces")
    stalks, gen, classes = [], {}, []
    for x in range(X.n):
        elems = [(i, s) for i, F in enumerate(objects) for s in range(F.size(x))]
        parent = {e: e for e in elems}

        def find(e):
            while parent[e] != e:
                parent[e] = parent[parent[e]]
                e = parent[e]
            return e

        for i, j, f in arrows:
            for s in range(objects[i].size(x)):
                a, b = find((i, s)), find((j, f(x, s)))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        roots = sorted({find(e) for e in elems})
        pos = {r: k for k, r in enumerate(roots)}
        classes.append({e: pos[find(e)] for e in elems})
        stalks.append([(i, objects[i].stalks[x][s]) for i, s in roots])
    for x, y in X.covering_pairs:
        m = [None] * len(stalks[x])
        for (i, s), c in classes[x].items():
            m[c] = classes[y][(i, objects[i].g(x, y)[s])]
        gen[(x, y)] = tuple(m)  # type: ignore[arg-type]
    C = SetSheaf(X, stalks, gen)
    incl = [
        SheafMorphism(F, C, [[classes[x][(i, s)] for s in range(F.size(x))] for x in range(X.n)])
        for i, F in enumerate(objects)
    ]
    return C, incl


def cocones(objects, arrows, T: SetSheaf) -> int:
    """Number of cocones from the diagram to T (brute force)."""
    homs = [hom_set(F, T) for F in objects]
    count = 0
    for legs in itertools.product(*homs):
        if all(f.then(legs[j]) == legs[i] for i, j, f in arrows):
            count += 1
    return count


# ----------------------------------------------------------------- Cech nerve

class CechNerve:
    """Levels of the fiber powers of phi: U0 -> E, computed stalkwise."""

    def __init__(self, phi: SheafMorphism):
        self.phi = phi
        self._levels: dict[int, tuple[SetSheaf, list[list[tuple[int, ...]]]]] = {}

    @property
    def space(self) -> FinitePoset:
        return self.phi.source.space

    def _tuples(self, n: int) -> list[list[tuple[int, ...]]]:
        return self._level(n)[1]

    def _level(self, n: int):
        if n in self._levels:
            return self._levels[n]
        U0 = self.phi.source
        X = self.space
        tuples = []
        for x in range(X.n):
            fibres: dict[int, list[int]] = {}
            for s, v in enumerate(self.phi.components[x]):
                fibres.setdefault(v, []).append(s)
            tx = sorted(t for fib in fibres.values() for t in itertools.product(fib, repeat=n + 1))
            tuples.append(tx)
        index = [{t: i for i, t in enumerate(tx)} for tx in tuples]
        gen = {
            (x, y): tuple(index[y][tuple(U0.g(x, y)[s] for s in t)] for t in tuples[x])
            for x, y in X.covering_pairs
        }
        stalks = [[tuple(U0.stalks[x][s] for s in t) for t in tx] for x, tx in enumerate(tuples)]
        self._levels[n] = (SetSheaf(X, stalks, gen), tuples)
        return self._levels[n]

    def level(self, n: int) -> SetSheaf:
        return self._level(n)[0]

    def face(self, n: int, i: int) -> SheafMorphism:
        src, tgt = self._tuples(n), self._tuples(n - 1)
        index = [{t: k for k, t in enumerate(tx)} for tx in tgt]
        comps = [[index[x][t[:i] + t[i + 1:]] for t in tx] for x, tx in enumerate(src)]
        return SheafMorphism(self.level(n), self.level(n - 1), comps)

    def degeneracy(self, n: int, i: int) -> SheafMorphism:
        src, tgt = self._tuples(n), self._tuples(n + 1)
        index = [{t: k for k, t in enumerate(tx)} for tx in tgt]
        comps = [[index[x][t[: i + 1] + t[i:]] for t in tx] for x, tx in enumerate(src)]
        return SheafMorphism(self.level(n), self.level(n + 1), comps)

    def augmentation(self) -> SheafMorphism:
        return self.phi

    def check_identities(self, n_max: int) -> bool:
        from .simplicial import check_simplicial_identities

        return check_simplicial_identities(self.face, self.degeneracy, n_max)


def cech_nerve(phi: SheafMorphism) -> CechNerve:
    return CechNerve(phi)


def cech_level(N: CechNerve, n: int) -> SetSheaf:
    return N.level(n)


def cech_effective(phi: SheafMorphism) -> bool:
    """Whether the coequalizer of the level-1 faces maps isomorphically to E."""
    N = CechNerve(phi)
    C, incl = colim_finite([N.level(1), N.level(0)], [(0, 1, N.face(1, 0)), (0, 1, N.face(1, 1))])
    # the induced map C -> E sends the class of u in U0 to phi(u)
    X = phi.source.space
    comps = []
    for x in range(X.n):
        m: list[int | None] = [None] * C.size(x)
        for s in range(phi.source.size(x)):
            c = incl[1](x, s)
            v = phi(x, s)
            if m[c] is not None and m[c] != v:
                return False
            m[c] = v
        comps.append(m)
    induced = SheafMorphism(C, phi.target, comps)
    return is_iso(induced)
