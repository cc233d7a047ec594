"""Exact dense linear algebra over FieldElem (and determinants over Poly entries)."""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .numfield import ONE, ZERO, FieldElem

Matrix = list  # list of rows


def as_field_matrix(m) -> list[list[FieldElem]]:
    return [[FieldElem.coerce(v) for v in row] for row in m]


def identity(n: int) -> list[list[FieldElem]]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def transpose(m):
    return [list(col) for col in zip(*m)]


def mat_mul(a, b):
    bt = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in bt:
            acc = None
            for x, y in zip(row, col):
                t = x * y
                acc = t if acc is None else acc + t
            out_row.append(acc)
        out.append(out_row)
    return out


def mat_vec(a, v):
    out = []
    for row in a:
        acc = None
        for x, y in zip(row, v):
            t = x * y
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def is_identity(m) -> bool:
    n = len(m)
    return all(m[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))


def is_orthogonal(m) -> bool:
    return is_identity(mat_mul(transpose(m), m))


def freeze(m) -> tuple:
    return tuple(tuple(row) for row in m)


def det(m):
    """Determinant by Laplace expansion along rows, memoised on column subsets.

    Works for any commutative ring entries (FieldElem, Poly); cost is
    O(n 2^n) ring operations, fine for the n <= 8 used here.
    """
    n = len(m)
    if n == 0:
        return ONE
    rows = [list(r) for r in m]

    @lru_cache(maxsize=None)
    def minor(cols: tuple[int, ...]):
        r = n - len(cols)
        if len(cols) == 1:
            return rows[r][cols[0]]
        acc = None
        for k, c in enumerate(cols):
            e = rows[r][c]
            if _is_zero(e):
                continue
            t = e * minor(cols[:k] + cols[k + 1:])
            if k % 2:
                t = -t
            acc = t if acc is None else acc + t
        if acc is None:
            return rows[r][cols[0]] * 0
        return acc

    return minor(tuple(range(n)))


def _is_zero(e) -> bool:
    if hasattr(e, "is_zero"):
        return e.is_zero()
    return e == 0


def leading_principal_minors(m) -> list:
    return [det([row[:k] for row in m[:k]]) for k in range(1, len(m) + 1)]


def rref(m) -> tuple[list[list[FieldElem]], list[int]]:
    """Reduced row echelon form over the field; returns (R, pivot columns)."""
    a = [list(as_row) for as_row in as_field_matrix(m)]
    if not a:
        return a, []
    nrows, ncols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if not a[i][c].is_zero()), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def rank(m) -> int:
    return len(rref(m)[1])


def nullspace(m, ncols: int | None = None) -> list[list[FieldElem]]:
    """Basis of {v : m v = 0}, one vector per free column (free entry = 1)."""
    if not m:
        n = ncols or 0
        return [[ONE if i == j else ZERO for i in range(n)] for j in range(n)]
    r, piv = rref(m)
    n = len(r[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for i, pc in enumerate(piv):
            v[pc] = -r[i][f]
        basis.append(v)
    return basis


def solve(a, b) -> list[FieldElem] | None:
    """One solution of a x = b (free variables 0), or None when inconsistent."""
    aug = [list(row) + [bi] for row, bi in zip(as_field_matrix(a), b)]
    r, piv = rref(aug)
    n = len(aug[0]) - 1
    if n in piv:
        return None
    x = [ZERO] * n
    for i, pc in enumerate(piv):
        x[pc] = r[i][n]
    return x


def dot(u: Sequence, v: Sequence):
    acc = ZERO
    for x, y in zip(u, v):
        acc = acc + x * y
    return acc


def to_float_matrix(m):
    import numpy as np

    return np.array([[float(x) for x in row] for row in m], dtype=float)
