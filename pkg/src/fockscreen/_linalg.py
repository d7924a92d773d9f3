"""Dense exact matrices.

Rational matrices are FLINT ``fmpq_mat``; anything else (quadratic or
eps-dependent entries) is a :class:`GMat` of Python scalars.  The helpers
below dispatch on the two kinds so callers never need to care.
"""

from __future__ import annotations

from fractions import Fraction

import flint

from .exactnum import QuadExt, _fmpq_to_fraction, valuation, VAL_INF


def _is_rational(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return True
    if isinstance(x, QuadExt):
        return x.b == 0
    return False


def _as_fmpq(x):
    if isinstance(x, QuadExt):
        x = x.a
    x = Fraction(x)
    return flint.fmpq(x.numerator, x.denominator)


class GMat:
    """Row-major dense matrix over any exact scalar type."""

    __slots__ = ("rows", "nr", "nc")

    def __init__(self, nr, nc, rows=None):
        self.nr, self.nc = nr, nc
        if rows is None:
            rows = [[0] * nc for _ in range(nr)]
        self.rows = rows

    def nrows(self):
        return self.nr

    def ncols(self):
        return self.nc

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __setitem__(self, ij, v):
        i, j = ij
        self.rows[i][j] = v


def zeros(nr, nc, generic=False):
    if generic:
        return GMat(nr, nc)
    return flint.fmpq_mat(nr, nc)


def from_rows(rows, nr=None, nc=None):
    nr = len(rows) if nr is None else nr
    nc = (len(rows[0]) if rows else 0) if nc is None else nc
    if all(_is_rational(x) for r in rows for x in r):
        M = flint.fmpq_mat(nr, nc)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                if x:
                    M[i, j] = _as_fmpq(x)
        return M
    return GMat(nr, nc, [list(r) for r in rows])


def from_dict(nr, nc, entries: dict):
    """Build from {(i, j): value}; rational entries give an fmpq_mat."""
    if all(_is_rational(x) for x in entries.values()):
        M = flint.fmpq_mat(nr, nc)
        for (i, j), x in entries.items():
            if x:
                M[i, j] = _as_fmpq(x)
        return M
    M = GMat(nr, nc)
    for (i, j), x in entries.items():
        M.rows[i][j] = x
    return M


def to_rows(M):
    if isinstance(M, GMat):
        return [list(r) for r in M.rows]
    return [[_fmpq_to_fraction(M[i, j]) for j in range(M.ncols())] for i in range(M.nrows())]


def entry(M, i, j):
    if isinstance(M, GMat):
        return M.rows[i][j]
    return _fmpq_to_fraction(M[i, j])


def shape(M):
    return M.nrows(), M.ncols()


def to_generic(M):
    if isinstance(M, GMat):
        return M
    return GMat(M.nrows(), M.ncols(), to_rows(M))


def simplify(M):
    """Demote a GMat with only rational entries back to fmpq_mat."""
    if isinstance(M, GMat) and all(_is_rational(x) for r in M.rows for x in r):
        return from_rows(M.rows, M.nr, M.nc)
    return M


def matmul(A, B):
    if A.ncols() != B.nrows():
        raise ValueError(f"shape mismatch {shape(A)} @ {shape(B)}")
    if not isinstance(A, GMat) and not isinstance(B, GMat):
        return A * B
    A, B = to_generic(A), to_generic(B)
    out = GMat(A.nr, B.nc)
    Bcols = list(zip(*B.rows)) if B.nr else [() for _ in range(B.nc)]
    for i, r in enumerate(A.rows):
        nz = [(k, x) for k, x in enumerate(r) if x]
        if not nz:
            continue
        orow = out.rows[i]
        for j in range(B.nc):
            col = Bcols[j]
            s = 0
            for k, x in nz:
                y = col[k]
                if y:
                    s = s + x * y
            orow[j] = s
    return simplify(out)


def add(A, B, sign=1):
    if shape(A) != shape(B):
        raise ValueError(f"shape mismatch {shape(A)} + {shape(B)}")
    if not isinstance(A, GMat) and not isinstance(B, GMat):
        return A + B if sign == 1 else A - B
    A, B = to_generic(A), to_generic(B)
    rows = [[x + y if sign == 1 else x - y for x, y in zip(ra, rb)] for ra, rb in zip(A.rows, B.rows)]
    return simplify(GMat(A.nr, A.nc, rows))


def sub(A, B):
    return add(A, B, sign=-1)


def scale(A, s):
    if s == 1:
        return A
    if not isinstance(A, GMat) and _is_rational(s):
        return A * _as_fmpq(s)
    A = to_generic(A)
    return simplify(GMat(A.nr, A.nc, [[x * s if x else 0 for x in r] for r in A.rows]))


def is_zero(A) -> bool:
    if isinstance(A, GMat):
        return all(not x for r in A.rows for x in r)
    return A.is_zero() if hasattr(A, "is_zero") else all(
        A[i, j] == 0 for i in range(A.nrows()) for j in range(A.ncols()))


def nonzero_entries(A):
    if isinstance(A, GMat):
        return [((i, j), x) for i, r in enumerate(A.rows) for j, x in enumerate(r) if x]
    out = []
    for i in range(A.nrows()):
        for j in range(A.ncols()):
            x = A[i, j]
            if x != 0:
                out.append(((i, j), _fmpq_to_fraction(x)))
    return out


def min_valuation(A):
    """Smallest eps-valuation over the entries (VAL_INF for the zero matrix)."""
    v = VAL_INF
    for _, x in nonzero_entries(A):
        v = min(v, valuation(x))
    return v


def mat_vec(A, v):
    """A times a column given as a list."""
    if len(v) != A.ncols():
        raise ValueError("shape mismatch")
    out = []
    if isinstance(A, GMat):
        for r in A.rows:
            s = 0
            for x, y in zip(r, v):
                if x and y:
                    s = s + x * y
            out.append(s)
        return out
    if all(_is_rational(y) for y in v):
        col = flint.fmpq_mat(len(v), 1, [_as_fmpq(y) for y in v])
        res = A * col
        return [_fmpq_to_fraction(res[i, 0]) for i in range(A.nrows())]
    return mat_vec(to_generic(A), v)


def vstack(mats, ncols):
    rows = []
    for M in mats:
        rows.extend(to_rows(M))
    if not rows:
        return flint.fmpq_mat(0, ncols)
    return from_rows(rows, len(rows), ncols)


def hstack(mats, nrows):
    rows = [[] for _ in range(nrows)]
    for M in mats:
        for i, r in enumerate(to_rows(M)):
            rows[i].extend(r)
    ncols = len(rows[0]) if rows else 0
    return from_rows(rows, nrows, ncols)


def _gauss(rows, nc):
    """Reduced row echelon form over a field; returns (rows, pivots)."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(nc):
        p = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                p = i
                break
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = Fraction(1) / rows[r][c]
        rows[r] = [x * inv if x else x for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(A) -> int:
    if A.nrows() == 0 or A.ncols() == 0:
        return 0
    if isinstance(A, GMat):
        return len(_gauss(A.rows, A.nc)[1])
    return A.rank()


def nullspace(A):
    """Basis of the right kernel as a list of columns (lists of scalars).

    Rational input goes through FLINT's integer nullspace after clearing
    denominators; basis vectors are normalized to make the last nonzero
    entry equal to 1, which keeps results reproducible.
    """
    nc = A.ncols()
    if A.nrows() == 0:
        return [[Fraction(int(i == j)) for i in range(nc)] for j in range(nc)]
    if not isinstance(A, GMat):
        num, _den = A.numer_denom()
        N, k = num.nullspace()
        basis = []
        for j in range(k):
            basis.append([Fraction(int(N[i, j])) for i in range(nc)])
        return [_normalize(v) for v in _echelon_basis(basis, nc)]
    rows, pivots = _gauss(A.rows, nc)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * nc
        v[f] = 1
        for r, pc in zip(rows, pivots):
            v[pc] = -r[f]
        basis.append(v)
    return basis


def _echelon_basis(vectors, n):
    """Canonical basis of a span: reduced echelon form on reversed coordinates."""
    if not vectors:
        return []
    rows = [list(reversed(v)) for v in vectors]
    if all(_is_rational(x) for r in rows for x in r):
        R, rk = from_rows(rows, len(rows), n).rref()
        return [[_fmpq_to_fraction(R[i, j]) for j in reversed(range(n))] for i in range(rk)]
    rows, _ = _gauss(rows, n)
    return [list(reversed(r)) for r in rows]


def _normalize(v):
    for x in reversed(v):
        if x:
            return [y / x for y in v]
    return v


def span_rank(vectors, n) -> int:
    if not vectors:
        return 0
    return rank(from_rows(vectors, len(vectors), n))


def in_span(vectors, w, n) -> bool:
    return span_rank(vectors + [w], n) == span_rank(vectors, n)


def solve_proportional(target, source):
    """Scalar c with target = c*source (lists), or None if not proportional."""
    c = None
    for t, s in zip(target, source):
        if s:
            q = t / s
            if c is None:
                c = q
            elif q != c:
                return None
        elif t:
            return None
    return c if c is not None else 0
