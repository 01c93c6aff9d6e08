"""Exact integer linear algebra on small matrices.

Matrices are lists of rows of Python ints. Internally the elimination works
on sparse rows (dicts ``col -> value``) because the complexes we feed in are
very sparse. Everything is exact; no floating point anywhere.
"""

from __future__ import annotations

Matrix = list[list[int]]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def shape(A: Matrix, ncols: int | None = None) -> tuple[int, int]:
    if A:
        return len(A), len(A[0])
    return 0, ncols or 0


def transpose(A: Matrix, ncols: int = 0) -> Matrix:
    if not A:
        return [[] for _ in range(ncols)]
    return [list(col) for col in zip(*A)]


def matmul(A: Matrix, B: Matrix, inner: int | None = None, ncols: int | None = None) -> Matrix:
    """A @ B. ``inner``/``ncols`` are only needed when a factor has no rows."""
    if not A:
        return []
    n = len(B[0]) if B else (ncols or 0)
    out = []
    for row in A:
        acc = [0] * n
        for k, a in enumerate(row):
            if a:
                bk = B[k]
                for j in range(n):
                    if bk[j]:
                        acc[j] += a * bk[j]
        out.append(acc)
    return out


def is_zero(A: Matrix) -> bool:
    return all(not x for row in A for x in row)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def _combine(r1: dict, r2: dict, a: int, b: int, c: int, d: int) -> tuple[dict, dict]:
    """Unimodular 2x2 row operation: (a*r1 + b*r2, c*r1 + d*r2)."""
    n1: dict = {}
    n2: dict = {}
    for k in r1.keys() | r2.keys():
        x = r1.get(k, 0)
        y = r2.get(k, 0)
        u = a * x + b * y
        v = c * x + d * y
        if u:
            n1[k] = u
        if v:
            n2[k] = v
    return n1, n2


def _axpy(dst: dict, src: dict, f: int) -> None:
    """dst -= f * src, in place."""
    for k, v in src.items():
        w = dst.get(k, 0) - f * v
        if w:
            dst[k] = w
        else:
            dst.pop(k, None)


class Echelon:
    """Integer row echelon form of a list of vectors under unimodular row ops.

    ``pivots`` holds (col, row, tag) with strictly increasing ``col``; each
    pivot row vanishes to the left of its pivot. ``null_tags`` are the
    transformation rows of the rows that reduced to zero, so they form a
    Z-basis of the left kernel when tracking was requested.
    """

    def __init__(self, rows: list[dict], ncols: int, track: bool = False):
        work = [(dict(r), {i: 1} if track else None) for i, r in enumerate(rows) if track or r]
        active = [w for w in work if w[0]]
        self.null_tags = [t for r, t in work if not r and track]
        self.pivots: list[tuple[int, dict, dict | None]] = []
        for c in range(ncols):
            hits = [w for w in active if c in w[0]]
            if not hits:
                continue
            rest = [w for w in active if c not in w[0]]
            # fold all hits into one pivot using gcd steps
            hits.sort(key=lambda w: abs(w[0][c]))
            prow, ptag = hits[0]
            for row, tag in hits[1:]:
                p = prow[c]
                q = row[c]
                if q % p == 0:
                    f = q // p
                    _axpy(row, prow, f)
                    if track:
                        _axpy(tag, ptag, f)
                else:
                    g, s, t = _xgcd(p, q)
                    prow, row = _combine(prow, row, s, t, -q // g, p // g)
                    if track:
                        ptag, tag = _combine(ptag, tag, s, t, -q // g, p // g)
                if row:
                    rest.append((row, tag))
                elif track:
                    self.null_tags.append(tag)
            if prow[c] < 0:
                prow = {k: -v for k, v in prow.items()}
                if track:
                    ptag = {k: -v for k, v in ptag.items()}
            self.pivots.append((c, prow, ptag))
            active = rest
        assert not active
        self.ncols = ncols

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solve(self, vec: dict) -> dict | None:
        """Coefficients expressing ``vec`` in the pivot rows, or None."""
        v = dict(vec)
        coef: dict = {}
        for i, (c, row, _) in enumerate(self.pivots):
            x = v.get(c, 0)
            if not x:
                continue
            q, r = divmod(x, row[c])
            if r:
                return None
            coef[i] = q
            _axpy(v, row, q)
        return coef if not v else None


def _rows_of(A: Matrix) -> list[dict]:
    return [{j: x for j, x in enumerate(row) if x} for row in A]


def _cols_of(A: Matrix, ncols: int) -> list[dict]:
    cols: list[dict] = [{} for _ in range(ncols)]
    for i, row in enumerate(A):
        for j, x in enumerate(row):
            if x:
                cols[j][i] = x
    return cols


def rank(A: Matrix) -> int:
    if not A:
        return 0
    return Echelon(_rows_of(A), len(A[0])).rank


def kernel_basis(A: Matrix, ncols: int | None = None) -> list[list[int]]:
    """Z-basis of {x : A x = 0}, as a list of column vectors."""
    m, n = shape(A, ncols)
    if m == 0:
        return [[int(i == j) for i in range(n)] for j in range(n)]
    ech = Echelon(_cols_of(A, n), m, track=True)
    return [[tag.get(i, 0) for i in range(n)] for tag in ech.null_tags]


def _dense_snf_diagonal(M: list[list[int]]) -> list[int]:
    """Smith diagonal (nonzero entries only) of a small dense matrix."""
    A = [row[:] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    diag = []
    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| in the trailing block
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    rt = A[t]
                    ri = A[i]
                    for j in range(t, n):
                        ri[j] -= q * rt[j]
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    for i in range(t, m):
                        A[i][j] -= q * A[i][t]
                    if A[t][j]:
                        done = False
            if done:
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                for j in range(t, n):
                    A[t][j] += A[bad][j]
                continue
            # a remainder survived: move the smallest entry of row/col t to the pivot
            best = (abs(A[t][t]), t, t)
            for i in range(t + 1, m):
                if A[i][t] and abs(A[i][t]) < best[0]:
                    best = (abs(A[i][t]), i, t)
            for j in range(t + 1, n):
                if A[t][j] and abs(A[t][j]) < best[0]:
                    best = (abs(A[t][j]), t, j)
            _, i, j = best
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def invariant_factors(A: Matrix) -> list[int]:
    """Nonzero Smith normal form entries d_1 | d_2 | ... of A."""
    if not A or not A[0]:
        return []
    return invariant_factors_rows(_rows_of(A), len(A[0]))


def invariant_factors_rows(sparse_rows: list[dict], ncols: int) -> list[int]:
    """invariant_factors for a matrix given as sparse rows."""
    ech = Echelon(sparse_rows, ncols)
    rows = [row for _, row, _ in ech.pivots]
    # peel off unit pivots: a +-1 pivot whose column has no other entry
    # contributes a factor 1 and can be deleted with its row
    ones = 0
    while True:
        colcount: dict = {}
        for row in rows:
            for k in row:
                colcount[k] = colcount.get(k, 0) + 1
        keep = []
        removed = False
        used_cols: set = set()
        for row in rows:
            hit = None
            for k, v in row.items():
                if abs(v) == 1 and colcount[k] == 1 and k not in used_cols:
                    hit = k
                    break
            if hit is None:
                keep.append(row)
            else:
                # column ops clear the rest of this row without touching others
                ones += 1
                removed = True
                used_cols.add(hit)
                for k in row:
                    colcount[k] -= 1
        rows = keep
        if not removed:
            break
    if not rows:
        return [1] * ones
    cols = sorted({k for row in rows for k in row})
    index = {k: i for i, k in enumerate(cols)}
    dense = [[0] * len(cols) for _ in rows]
    for r, row in enumerate(rows):
        for k, v in row.items():
            dense[r][index[k]] = v
    d = _dense_snf_diagonal(dense)
    return [1] * ones + sorted(d)


def lattice_quotient(gens: list[dict], sub: list[dict], dim: int) -> tuple[int, list[int]]:
    """Structure of span(gens) / span(sub) for sublattices of Z^dim.

    Requires span(sub) to lie inside span(gens). Returns (free rank, torsion
    invariant factors > 1).
    """
    ech = Echelon(gens, dim)
    k = ech.rank
    coords = []
    for v in sub:
        if not v:
            continue
        c = ech.solve(v)
        if c is None:
            raise ValueError("sub-lattice is not contained in the lattice")
        coords.append([c.get(i, 0) for i in range(k)])
    if k == 0:
        return 0, []
    facs = invariant_factors(coords) if coords else []
    return k - len(facs), [d for d in facs if d > 1]


def smith_with_transforms(A: Matrix, ncols: int | None = None) -> tuple[Matrix, Matrix, Matrix, Matrix]:
    """Return (D, U, Uinv, V) with U @ A @ V = D in Smith form, U, V unimodular.

    Dense and unoptimised; meant for the small presentation matrices.
    """
    m, n = shape(A, ncols)
    D = [row[:] for row in A]
    U = identity(m)
    Ui = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for row in Ui:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        # row_dst += f * row_src
        D[dst] = [a + f * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]
        for row in Ui:
            row[src] -= f * row[dst]

    def add_col(dst, src, f):
        for row in D:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    def neg_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]
        for row in Ui:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // D[t][t]))
                    if D[i][t]:
                        changed = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // D[t][t]))
                    if D[t][j]:
                        changed = True
            if changed:
                cand = [(abs(D[i][t]), i, t) for i in range(t, m) if D[i][t]]
                cand += [(abs(D[t][j]), t, j) for j in range(t, n) if D[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            neg_row(t)
        t += 1
    return D, U, Ui, V
