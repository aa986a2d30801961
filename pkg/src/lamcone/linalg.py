"""Exact rational linear algebra helpers.

Everything here works on small dense matrices represented as lists of rows
of :class:`fractions.Fraction`.  No floating point is used anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Row = list[Fraction]
Matrix = list[Row]


def to_fractions(rows: Iterable[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(matrix: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref matrix, pivot column list)."""
    m = [row[:] for row in matrix]
    if not m:
        return m, []
    rows, cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = m[r][c]
        m[r] = [x / inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(matrix: Matrix) -> int:
    return len(rref(matrix)[1])


def nullspace(matrix: Matrix, ncols: int) -> Matrix:
    """Basis of {x : matrix @ x = 0} as a list of vectors of length ncols."""
    if not matrix:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    reduced, pivots = rref(matrix)
    free = [c for c in range(ncols) if c not in pivots]
    basis: Matrix = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r][f]
        basis.append(vec)
    return basis


def solve_unique(matrix: Matrix, rhs: Row) -> Row | None:
    """Solve matrix @ x = rhs; returns the solution only if it is unique."""
    if not matrix:
        return None
    ncols = len(matrix[0])
    aug = [row[:] + [b] for row, b in zip(matrix, rhs)]
    reduced, pivots = rref(aug)
    if ncols in pivots:  # inconsistent: pivot in the augmented column
        return None
    if len(pivots) < ncols:  # underdetermined
        return None
    x = [Fraction(0)] * ncols
    for r, p in enumerate(pivots):
        x[p] = reduced[r][ncols]
    return x


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def normalize_integer_row(row: Sequence[Fraction]) -> list[int]:
    """Scale a rational row to coprime integers with positive leading entry."""
    den = 1
    for x in row:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 0)
    if lead < 0:
        ints = [-x for x in ints]
    return ints


def clear_denominators(values: Iterable[Fraction]) -> int:
    """Least common multiple of the denominators (1 for the empty set)."""
    k = 1
    for v in values:
        k = k * v.denominator // gcd(k, v.denominator)
    return k
