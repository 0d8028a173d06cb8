"""Exact linear algebra over Fraction, sized for desk-scale systems.

Matrices are lists of row lists.  Nothing here is performance-tuned beyond
what exhaustive verification at n <= 10 or so requires.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .errors import RankDeficiencyError

Matrix = list


def mat(rows) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def identity(k: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Matrix, v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def _echelon(a: Matrix) -> tuple[Matrix, list[int]]:
    """Row echelon form (in place on a copy) and the list of pivot columns."""
    m = [row[:] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    return len(_echelon(mat(a))[1])


def det(a: Matrix) -> Fraction:
    m = mat(a)
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("det needs a square matrix")
    sign = 1
    out = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        out *= m[c][c]
        inv = 1 / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[c])]
    return sign * out


def solve(a: Matrix, b: Sequence) -> Optional[list]:
    """One exact solution of ``a x = b``, or ``None`` if inconsistent.

    Free variables (if any) are set to zero.
    """
    aug = [row[:] + [Fraction(v)] for row, v in zip(mat(a), b)]
    red, pivots = _echelon(aug)
    ncols = len(a[0])
    if ncols in pivots:
        return None  # pivot in the augmented column: inconsistent
    x = [Fraction(0)] * ncols
    for r, c in enumerate(pivots):
        x[c] = red[r][-1]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [row[:] + ident_row for row, ident_row in zip(mat(a), identity(n))]
    red, pivots = _echelon(aug)
    if pivots != list(range(n)):
        raise RankDeficiencyError("matrix is singular")
    return [row[n:] for row in red]


def pinv_full_col_rank(x: Matrix) -> Matrix:
    """``(x^T x)^{-1} x^T`` for a full-column-rank ``x``; raises otherwise."""
    xt = transpose(mat(x))
    gram = matmul(xt, transpose(xt))
    try:
        gram_inv = inverse(gram)
    except RankDeficiencyError:
        raise RankDeficiencyError("covariates do not have full column rank") from None
    return matmul(gram_inv, xt)


def left_nullspace_int(a: Matrix) -> list[list[int]]:
    """Integer basis of ``{v : v a = 0}`` (row vectors), possibly empty."""
    at = transpose(mat(a))
    red, pivots = _echelon(at)
    nrows = len(a)
    free = [c for c in range(nrows) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * nrows
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        scale = lcm(*(x.denominator for x in v)) if v else 1
        basis.append([int(x * scale) for x in v])
    return basis
