"""Abelian sheaves on finite spaces and their cohomology.

Cohomology is computed as the derived inverse limit of the stalk functor
over the specialization order, using the complex of strict chains with
coefficients at the top of each chain. Every group is brought to
invariant-factor form, so equality of groups is equality of dataclasses.

Groups in a complex are presented as Z^N modulo a diagonal relation
lattice: coordinate i has order ``ord[i]`` (0 meaning free).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

from . import intmat
from .errors import NotFunctorial, SpaceMismatch, VanishingViolated
from .finposet import FinitePoset, _bits, heyting_dimension, krull_dimension

Matrix = list[list[int]]


def _factor(d: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= d:
        while d % p == 0:
            out[p] = out.get(p, 0) + 1
            d //= p
        p += 1
    if d > 1:
        out[d] = out.get(d, 0) + 1
    return out


@dataclass(frozen=True)
class FgAbGroup:
    """Z^rank + Z/d_1 + ... + Z/d_k with d_1 | d_2 | ... and every d_i >= 2."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(self.torsion))
        if self.rank < 0 or any(d < 2 for d in self.torsion):
            raise ValueError(f"not a canonical group: {self.rank}, {self.torsion}")
        for a, b in zip(self.torsion, self.torsion[1:]):
            if b % a:
                raise ValueError(f"torsion {self.torsion} is not a divisibility chain")

    @classmethod
    def from_cyclic(cls, orders: Iterable[int]) -> "FgAbGroup":
        """Canonical form of a sum of cyclic groups Z/d (d = 0 meaning Z)."""
        rank = 0
        powers: dict[int, list[int]] = {}
        for d in orders:
            d = abs(d)
            if d == 0:
                rank += 1
            elif d > 1:
                for p, e in _factor(d).items():
                    powers.setdefault(p, []).append(p**e)
        k = max((len(v) for v in powers.values()), default=0)
        inv = [1] * k
        for v in powers.values():
            v.sort()
            for i, q in enumerate(v):
                inv[k - len(v) + i] *= q
        return cls(rank, tuple(inv))

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    @property
    def orders(self) -> tuple[int, ...]:
        """Orders of the canonical generators: free ones first."""
        return (0,) * self.rank + self.torsion

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def exponent(self) -> int:
        return self.torsion[-1] if self.torsion else 1

    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) or "0"

    def to_doc(self) -> dict:
        return {"rank": self.rank, "torsion": list(self.torsion)}


Z = FgAbGroup(1)
ZERO = FgAbGroup()


def cyclic(d: int) -> FgAbGroup:
    return FgAbGroup.from_cyclic([d])


def _reduce(M: Matrix, orders: Sequence[int]) -> Matrix:
    return [[v % d if d else v for v in row] for row, d in zip(M, orders)]


def _matmul(A: Matrix, B: Matrix, inner: int, ncols: int) -> Matrix:
    if not A:
        return []
    if not B:
        return [[0] * ncols for _ in A]
    return intmat.matmul(A, B)


class AbSheaf:
    """Stalks in canonical form and generization matrices.

    ``gen[(x, y)]`` has one row per generator of stalk(y) and one column per
    generator of stalk(x). Maps on the Hasse edges suffice; the others are
    composed and every composite is checked modulo the relations.
    """

    def __init__(self, space: FinitePoset, stalks: Sequence[FgAbGroup], gen: Mapping | None = None):
        if len(stalks) != space.n:
            raise SpaceMismatch("one stalk per point is required")
        self.space = space
        self.stalks = tuple(stalks)
        gen = dict(gen or {})
        X = space
        out: dict[tuple[int, int], Matrix] = {}
        for (x, y), M in gen.items():
            if x == y:
                continue
            if not X.lt(x, y):
                raise NotFunctorial(f"({x}, {y}) is not a strict relation")
            self._check_shape(x, y, M)
            out[(x, y)] = _reduce([list(r) for r in M], self.stalks[y].orders)
        for x, y in X.covering_pairs:
            if (x, y) not in out:
                if self.stalks[x].ngens and self.stalks[y].ngens:
                    raise NotFunctorial(f"missing map for covering pair ({x}, {y})")
                out[(x, y)] = [[0] * self.stalks[x].ngens for _ in range(self.stalks[y].ngens)]
        pairs = sorted(
            ((x, y) for x in range(X.n) for y in _bits(X.up[x]) if x != y),
            key=lambda p: bin(X.up[p[0]] & X.down[p[1]]).count("1"),
        )
        for x, y in pairs:
            if (x, y) not in out:
                w = next(w for w in _bits(X.up[x] & X.down[y]) if w not in (x, y) and (x, w) in out and (w, y) in out)
                out[(x, y)] = self._compose(x, w, y, out)
        self.gen = out
        for (x, y), M in out.items():
            self._check_relations(x, y, M)
        for x, y in pairs:
            for w in _bits(X.up[x] & X.down[y]):
                if w not in (x, y) and self._compose(x, w, y, out) != out[(x, y)]:
                    raise NotFunctorial(f"composite {x} -> {w} -> {y} disagrees with ({x}, {y})")

    def _check_shape(self, x: int, y: int, M) -> None:
        rows, cols = self.stalks[y].ngens, self.stalks[x].ngens
        if len(M) != rows or any(len(r) != cols for r in M):
            raise NotFunctorial(f"matrix for ({x}, {y}) should be {rows}x{cols}")

    def _check_relations(self, x: int, y: int, M: Matrix) -> None:
        src, tgt = self.stalks[x].orders, self.stalks[y].orders
        for j, dj in enumerate(src):
            if not dj:
                continue
            for i, di in enumerate(tgt):
                v = M[i][j] * dj
                if (di == 0 and v != 0) or (di and v % di):
                    raise NotFunctorial(f"matrix for ({x}, {y}) does not respect the relations")

    def _compose(self, x: int, w: int, y: int, gen) -> Matrix:
        C = _matmul(gen[(w, y)], gen[(x, w)], self.stalks[w].ngens, self.stalks[x].ngens)
        return _reduce(C, self.stalks[y].orders)

    def g(self, x: int, y: int) -> Matrix:
        if x == y:
            return intmat.identity(self.stalks[x].ngens)
        return self.gen[(x, y)]

    def to_doc(self) -> dict:
        return {
            "space": self.space.to_doc(),
            "stalks": [s.to_doc() for s in self.stalks],
            "gen": {f"{x},{y}": self.gen[(x, y)] for x, y in self.space.covering_pairs},
        }

    def underlying_set_sheaf(self, bound: int = 512):
        """The set-valued sheaf of a sheaf of finite groups."""
        from .sheaf import SetSheaf

        if any(s.rank for s in self.stalks):
            raise ValueError("stalks must be finite")
        if any((s.order() or 0) > bound for s in self.stalks):
            raise ValueError("stalks too large to list")
        elems = [list(itertools.product(*(range(d) for d in s.torsion))) for s in self.stalks]
        index = [{e: i for i, e in enumerate(es)} for es in elems]
        gen = {}
        for x, y in self.space.covering_pairs:
            M, orders = self.gen[(x, y)], self.stalks[y].torsion
            gen[(x, y)] = tuple(
                index[y][tuple(sum(M[i][j] * e[j] for j in range(len(e))) % orders[i] for i in range(len(orders)))]
                for e in elems[x]
            )
        return SetSheaf(self.space, elems, gen)


def _identity_blocks(X: FinitePoset, stalk_of: Sequence[FgAbGroup]) -> dict:
    return {(x, y): intmat.identity(stalk_of[x].ngens) for x, y in X.covering_pairs}


def constant_ab(X: FinitePoset, A: FgAbGroup) -> AbSheaf:
    return AbSheaf(X, [A] * X.n, _identity_blocks(X, [A] * X.n))


def skyscraper_ab(X: FinitePoset, x: int, A: FgAbGroup) -> AbSheaf:
    """Sections over U are A when x lies in U and 0 otherwise."""
    stalks = [A if X.leq(y, x) else ZERO for y in range(X.n)]
    gen = {}
    for a, b in X.covering_pairs:
        gen[(a, b)] = intmat.identity(A.ngens) if X.leq(b, x) else []
    return AbSheaf(X, stalks, gen)


def pushforward_constant(X: FinitePoset, S: Iterable[int], A: FgAbGroup) -> AbSheaf:
    """Direct image of the constant sheaf A along the inclusion of a subspace S."""
    Sm = 0
    for s in S:
        Sm |= 1 << s
    comps = [X.components_mask(Sm & X.up[y]) for y in range(X.n)]
    stalks = [FgAbGroup.from_cyclic(list(A.orders) * len(c)) for c in comps]
    k = A.ngens
    gen = {}
    for a, b in X.covering_pairs:
        # each component over up(b) lies in exactly one component over up(a)
        M = [[0] * (k * len(comps[a])) for _ in range(k * len(comps[b]))]
        for j, cb in enumerate(comps[b]):
            i = next(i for i, ca in enumerate(comps[a]) if cb & ~ca == 0)
            for t in range(k):
                M[j * k + t][i * k + t] = 1
        gen[(a, b)] = M
    if A.ngens > 1:
        # copies of A are not in canonical order; rebuild through a presentation
        return _canonicalize(X, [list(A.orders) * len(c) for c in comps], gen)
    return AbSheaf(X, stalks, gen)


def _canonicalize(X: FinitePoset, orders: Sequence[Sequence[int]], gen: Mapping) -> AbSheaf:
    """AbSheaf from stalks Z^k / diag(orders) in arbitrary order."""
    rel = []
    for o in orders:
        cols = [c for c, d in enumerate(o) if d]
        rel.append([[o[i] if i == c else 0 for c in cols] for i in range(len(o))])
    return ab_sheaf_from_presentations(X, [len(o) for o in orders], rel, gen)


def ab_sheaf_from_presentations(
    X: FinitePoset, ngens: Sequence[int], relations: Sequence[Matrix], gen: Mapping
) -> AbSheaf:
    """Stalk x is Z^ngens[x] modulo the columns of relations[x]; gen acts on generators."""
    data = []
    for x in range(X.n):
        m = ngens[x]
        R = relations[x]
        ncols = len(R[0]) if R and R[0] else 0
        if m == 0:
            data.append((FgAbGroup(), [], [], [], []))
            continue
        if ncols == 0:
            R = [[0] for _ in range(m)]
            ncols = 1
        D, U, Ui, _ = intmat.smith_with_transforms(R, ncols)
        diag = [D[t][t] if t < ncols else 0 for t in range(m)]
        free = [t for t in range(m) if diag[t] == 0]
        tors = [t for t in range(m) if diag[t] > 1]
        kept = free + tors
        orders = [0] * len(free) + [diag[t] for t in tors]
        data.append((FgAbGroup(len(free), tuple(diag[t] for t in tors)), kept, U, Ui, orders))
    stalks = [d[0] for d in data]
    out = {}
    for a, b in X.covering_pairs:
        ga, gb = data[a], data[b]
        if not ga[1] or not gb[1]:
            out[(a, b)] = [[0] * len(ga[1]) for _ in range(len(gb[1]))]
            continue
        M = gen[(a, b)]
        _, kept_a, _, Ui_a, _ = ga
        _, kept_b, U_b, _, orders_b = gb
        cols = []
        for t in kept_a:
            v = [row[t] for row in Ui_a]  # canonical generator as an old vector
            w = [sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))]
            y = [sum(U_b[s][i] * w[i] for i in range(len(w))) for s in kept_b]
            cols.append([c % d if d else c for c, d in zip(y, orders_b)])
        out[(a, b)] = [[cols[j][i] for j in range(len(cols))] for i in range(len(kept_b))]
    return AbSheaf(X, stalks, out)


# ----------------------------------------------------------------- complexes

@dataclass
class CochainComplex:
    """C^n = Z^N_n / diag(orders[n]) with sparse differentials.

    ``diffs[n]`` maps degree n to degree n + 1 and is stored by columns:
    column j (a dict row -> value) is the image of generator j.
    """

    orders: list[list[int]]
    diffs: list[list[dict]]
    labels: list[list] = field(default_factory=list)

    def __post_init__(self):
        if len(self.diffs) != max(0, len(self.orders) - 1):
            raise ValueError("need one differential between consecutive degrees")
        self.check_d_squared()

    @property
    def ranks(self) -> list[int]:
        return [len(o) for o in self.orders]

    def check_d_squared(self) -> None:
        for n in range(len(self.diffs) - 1):
            A, B = self.diffs[n], self.diffs[n + 1]
            ords = self.orders[n + 2]
            for col in A:
                acc: dict[int, int] = {}
                for k, v in col.items():
                    for i, w in B[k].items():
                        acc[i] = acc.get(i, 0) + v * w
                for i, v in acc.items():
                    d = ords[i]
                    if (d and v % d) or (not d and v):
                        raise AssertionError(f"d o d != 0 in degree {n}")

    @classmethod
    def from_dense(cls, orders: list[list[int]], mats: list[Matrix]) -> "CochainComplex":
        """Dense differentials given as matrices with rows in the target degree."""
        diffs = []
        for n, M in enumerate(mats):
            ncols = len(orders[n])
            diffs.append([{i: M[i][j] for i in range(len(M)) if M[i][j]} for j in range(ncols)])
        return cls(orders, diffs)


def _cocycles(C: CochainComplex, n: int) -> list[dict]:
    N = len(C.orders[n])
    if n >= len(C.diffs):
        return [{j: 1} for j in range(N)]
    cols = [dict(c) for c in C.diffs[n]]
    tors = [(i, d) for i, d in enumerate(C.orders[n + 1]) if d]
    cols += [{i: d} for i, d in tors]
    nrows = len(C.orders[n + 1])
    if not any(cols[:N]):
        return [{j: 1} for j in range(N)]
    ech = intmat.Echelon(cols, nrows, track=True)
    out = []
    for tag in ech.null_tags:
        v = {j: c for j, c in tag.items() if j < N and c}
        if v:
            out.append(v)
    return out


def _group_in_degree(C: CochainComplex, n: int) -> FgAbGroup:
    N = len(C.orders[n])
    if N == 0:
        return ZERO
    free_here = not any(C.orders[n]) and (n + 1 >= len(C.orders) or not any(C.orders[n + 1]))
    into = C.diffs[n - 1] if n > 0 else []
    if free_here:
        # ker d^n is saturated, so torsion comes only from the image of d^{n-1}
        rk_out = intmat.Echelon([c for c in C.diffs[n] if c], len(C.orders[n + 1])).rank if n < len(C.diffs) else 0
        facs = intmat.invariant_factors_rows([c for c in into if c], N) if into else []
        return FgAbGroup.from_cyclic([0] * (N - rk_out - len(facs)) + [d for d in facs if d > 1])
    Zn = _cocycles(C, n)
    Bn = [c for c in into if c] + [{j: d} for j, d in enumerate(C.orders[n]) if d]
    rk, tors = intmat.lattice_quotient(Zn, Bn, N)
    return FgAbGroup.from_cyclic([0] * rk + tors)


def cohomology(C: CochainComplex) -> list[FgAbGroup]:
    return [_group_in_degree(C, n) for n in range(len(C.orders))]


def strict_chains(X: FinitePoset) -> list[list[tuple[int, ...]]]:
    """Strict chains x_0 < ... < x_n grouped by n, each level sorted."""
    levels: list[list[tuple[int, ...]]] = []
    cur = [(x,) for x in range(X.n)]
    while cur:
        levels.append(sorted(cur))
        cur = [c + (y,) for c in cur for y in _bits(X.up[c[-1]]) if y != c[-1]]
    return levels


def nerve_complex(X: FinitePoset, F: AbSheaf) -> CochainComplex:
    if F.space != X:
        raise SpaceMismatch("sheaf lives on a different space")
    levels = strict_chains(X)
    offsets = []
    orders = []
    for chains in levels:
        off, o = {}, []
        for c in chains:
            off[c] = len(o)
            o.extend(F.stalks[c[-1]].orders)
        offsets.append(off)
        orders.append(o)
    diffs = []
    for n in range(len(levels) - 1):
        cols: list[dict] = [{} for _ in range(len(orders[n]))]
        for c in levels[n + 1]:
            top = F.stalks[c[-1]].ngens
            base = offsets[n + 1][c]
            for i in range(n + 1):
                face = c[:i] + c[i + 1:]
                src = offsets[n][face]
                sign = -1 if i % 2 else 1
                for t in range(top):
                    cols[src + t][base + t] = cols[src + t].get(base + t, 0) + sign
            face = c[:-1]
            src = offsets[n][face]
            M = F.g(c[-2], c[-1])
            sign = -1 if (n + 1) % 2 else 1
            for j in range(F.stalks[c[-2]].ngens):
                for t in range(top):
                    if M[t][j]:
                        cols[src + j][base + t] = cols[src + j].get(base + t, 0) + sign * M[t][j]
        for col in cols:
            for k in [k for k, v in col.items() if v == 0]:
                del col[k]
        diffs.append(cols)
    C = CochainComplex(orders, diffs, labels=levels)
    if levels:
        h0 = _group_in_degree(C, 0)
        gamma = global_sections_group(F)
        assert h0 == gamma, f"H^0 = {h0} but global sections are {gamma}"
    return C


def global_sections_group(F: AbSheaf) -> FgAbGroup:
    """Compatible families along the Hasse edges, as a subgroup of the sum of stalks."""
    X = F.space
    off, o = [], []
    for x in range(X.n):
        off.append(len(o))
        o.extend(F.stalks[x].orders)
    N = len(o)
    if N == 0:
        return ZERO
    # constraint rows live in a sum of stalk(y) over edges (x, y)
    cols: list[dict] = [{} for _ in range(N)]
    rel_cols = []
    r = 0
    for x, y in X.covering_pairs:
        M = F.g(x, y)
        ty = F.stalks[y].orders
        for t in range(len(ty)):
            cols[off[y] + t][r + t] = cols[off[y] + t].get(r + t, 0) + 1
            for j in range(F.stalks[x].ngens):
                if M[t][j]:
                    cols[off[x] + j][r + t] = cols[off[x] + j].get(r + t, 0) - M[t][j]
            if ty[t]:
                rel_cols.append({r + t: ty[t]})
        r += len(ty)
    if r == 0:
        kernel = [{j: 1} for j in range(N)]
    else:
        ech = intmat.Echelon(cols + rel_cols, r, track=True)
        kernel = [{j: c for j, c in tag.items() if j < N and c} for tag in ech.null_tags]
        kernel = [v for v in kernel if v]
    rels = [{j: d} for j, d in enumerate(o) if d]
    rk, tors = intmat.lattice_quotient(kernel, rels, N)
    return FgAbGroup.from_cyclic([0] * rk + tors)


def sheaf_cohomology(X: FinitePoset, F: AbSheaf, max_degree: int | None = None) -> list[FgAbGroup]:
    """H^0 .. H^max_degree (default: up to |X|), trivial groups padded."""
    top = X.n if max_degree is None else max_degree
    H = cohomology(nerve_complex(X, F))
    return (H + [ZERO] * (top + 1))[: top + 1]


# -------------------------------------------------------------------- oracle

def order_complex(X: FinitePoset):
    from .simplicial import CombComplex

    return CombComplex(range(X.n), [frozenset(c) for lvl in strict_chains(X) for c in lvl])


def integral_homology(K) -> list[FgAbGroup]:
    """H_n(K; Z) for n = 0 .. dim K from Smith forms of the boundary maps."""
    by_dim = K.simplices_by_dim()
    index = [{s: i for i, s in enumerate(level)} for level in by_dim]
    ranks = []
    facs = []
    for n in range(len(by_dim)):
        if n == 0:
            ranks.append(0)
            facs.append([])
            continue
        rows = []
        for s in by_dim[n]:
            row = {}
            for i in range(len(s)):
                row[index[n - 1][s[:i] + s[i + 1:]]] = -1 if i % 2 else 1
            rows.append(row)
        f = intmat.invariant_factors_rows(rows, len(by_dim[n - 1]))
        ranks.append(len(f))
        facs.append(f)
    out = []
    for n in range(len(by_dim)):
        rk_in = ranks[n + 1] if n + 1 < len(by_dim) else 0
        tors = [d for d in facs[n + 1] if d > 1] if n + 1 < len(by_dim) else []
        out.append(FgAbGroup.from_cyclic([0] * (len(by_dim[n]) - ranks[n] - rk_in) + tors))
    return out


def _hom(G: FgAbGroup, A: FgAbGroup) -> list[int]:
    out = []
    for d in G.orders:
        for a in A.orders:
            if d == 0:
                out.append(a)
            elif a == 0:
                continue
            else:
                out.append(gcd(d, a))
    return out


def _ext(G: FgAbGroup, A: FgAbGroup) -> list[int]:
    out = []
    for d in G.torsion:
        for a in A.orders:
            out.append(d if a == 0 else gcd(d, a))
    return out


def simplicial_cohomology(K, A: FgAbGroup) -> list[FgAbGroup]:
    """H^n(K; A) via integral homology and the universal coefficient theorem."""
    H = integral_homology(K)
    out = []
    for n in range(len(H)):
        parts = _hom(H[n], A) + (_ext(H[n - 1], A) if n else [])
        out.append(FgAbGroup.from_cyclic(parts))
    return out


# ------------------------------------------------------------ dimension audit

def standard_family(X: FinitePoset, primes: Sequence[int] = (2, 3)) -> list[tuple[str, AbSheaf]]:
    fam = [("constant Z", constant_ab(X, Z))]
    fam += [(f"constant Z/{p}", constant_ab(X, cyclic(p))) for p in primes]
    fam += [(f"skyscraper Z at {x}", skyscraper_ab(X, x, Z)) for x in range(X.n)]
    if X.n <= 8:
        subsets = range(1, 1 << X.n)
    else:
        subsets = sorted(set(X.opens_mask()) | {X.full & ~U for U in X.opens_mask()} - {0})
    for S in subsets:
        fam.append((f"pushforward Z from {sorted(_bits(S))}", pushforward_constant(X, _bits(S), Z)))
    return fam


def cohomological_dimension_bounds(X: FinitePoset, family: Sequence[AbSheaf] = ()) -> tuple[int, int]:
    """(largest degree with nonzero cohomology over a test family, Krull dimension)."""
    upper = krull_dimension(X)
    lower = -1
    sheaves = [F for _, F in standard_family(X)] + list(family)
    for F in sheaves:
        H = cohomology(nerve_complex(X, F))
        for k in range(len(H) - 1, lower, -1):
            if not H[k].is_trivial:
                lower = k
                break
    assert lower <= upper, f"nonzero H^{lower} above the Krull dimension {upper}"
    return lower, upper


@dataclass
class VanishingReport:
    krull: int
    table: list[FgAbGroup]

    @property
    def ok(self) -> bool:
        return all(g.is_trivial for g in self.table[self.krull + 1:])

    def to_doc(self) -> dict:
        return {
            "krull_dimension": self.krull,
            "table": [{"degree": k, "group": str(g), "invariant_factors": g.to_doc()} for k, g in enumerate(self.table)],
            "vanishing_holds": self.ok,
        }


def vanishing_audit(X: FinitePoset, F: AbSheaf) -> VanishingReport:
    rep = VanishingReport(krull_dimension(X), sheaf_cohomology(X, F, X.n))
    if not rep.ok:
        k = next(k for k in range(rep.krull + 1, len(rep.table)) if not rep.table[k].is_trivial)
        raise VanishingViolated(f"H^{k} = {rep.table[k]} above Krull dimension {rep.krull}")
    return rep


def homotopy_dimension_upper(X: FinitePoset) -> int:
    """Upper bound for the homotopy dimension: the Heyting dimension."""
    return heyting_dimension(X)
