"""Exact rational simplex solver.

Standard form: maximize c.x subject to A x = b, x >= 0.  Two-phase method
with Bland's rule in both phases, so termination is guaranteed and the
result is deterministic: the entering variable is the smallest eligible
index and ratio ties break toward the smallest basic variable index.

Internally the tableau is kept integral with one positive divisor shared by
all entries (fraction-free pivoting): a pivot on entry p replaces every
other row r by (p*r - r[c]*pivot_row)/den, an exact integer division, and
den becomes p.  Rationals appear only on input scaling and output
extraction, which keeps the hot loop in plain integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    solution: tuple[Fraction, ...] = ()


def _int_row(values: Sequence) -> list[int]:
    fracs = [Fraction(v) for v in values]
    k = 1
    for f in fracs:
        k = k * f.denominator // gcd(k, f.denominator)
    return [int(f * k) for f in fracs]


def _pivot(rows: list[list[int]], obj: list[int], basis: list[int], r: int, c: int, den: int) -> int:
    piv = rows[r][c]
    prow = rows[r]
    for i, row in enumerate(rows):
        if i != r:
            f = row[c]
            if f:
                rows[i] = [(a * piv - f * p) // den for a, p in zip(row, prow)]
            elif piv != den:
                rows[i] = [a * piv // den for a, p in zip(row, prow)]
    f = obj[c]
    if f:
        obj[:] = [(a * piv - f * p) // den for a, p in zip(obj, prow)]
    elif piv != den:
        obj[:] = [a * piv // den for a in obj]
    basis[r] = c
    return piv


def _run(rows: list[list[int]], obj: list[int], basis: list[int], ncols: int, den: int) -> tuple[str, int]:
    """Maximize with Bland's rule; signs are exact since den > 0 always."""
    while True:
        enter = -1
        for j in range(ncols):
            if obj[j] > 0:
                enter = j
                break
        if enter < 0:
            return OPTIMAL, den
        leave = -1
        best_num = best_den = 0
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                if leave < 0:
                    leave, best_num, best_den = i, row[-1], a
                else:
                    diff = row[-1] * best_den - best_num * a
                    if diff < 0 or (diff == 0 and basis[i] < basis[leave]):
                        leave, best_num, best_den = i, row[-1], a
        if leave < 0:
            return UNBOUNDED, den
        den = _pivot(rows, obj, basis, leave, enter, den)


def solve_lp(
    a_rows: Sequence[Sequence],
    b: Sequence,
    c: Sequence,
) -> LPResult:
    """Maximize c.x subject to a_rows x = b, x >= 0, exactly."""
    m = len(a_rows)
    n = len(c)
    rows: list[list[int]] = []
    for i in range(m):
        row = _int_row(list(a_rows[i]) + [b[i]])
        if row[-1] < 0:
            row = [-x for x in row]
        rows.append(row)
    cost_f = [Fraction(x) for x in c]
    cost_scale = 1
    for f in cost_f:
        cost_scale = cost_scale * f.denominator // gcd(cost_scale, f.denominator)
    cost = [int(f * cost_scale) for f in cost_f]

    # Phase 1: one artificial column per row, maximize -(sum of artificials).
    total = n + m
    tab: list[list[int]] = []
    for i, row in enumerate(rows):
        art = [0] * m
        art[i] = 1
        tab.append(row[:n] + art + [row[n]])
    basis = [n + i for i in range(m)]
    obj = [0] * (total + 1)
    for row in tab:
        for j in range(n):
            obj[j] += row[j]
        obj[total] += row[total]
    den = 1
    status, den = _run(tab, obj, basis, n, den)  # artificials never re-enter
    if status != OPTIMAL or obj[total] != 0:
        return LPResult(INFEASIBLE)

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep: list[int] = []
    for i in range(len(tab)):
        if basis[i] >= n:
            c_piv = next((j for j in range(n) if tab[i][j] != 0), None)
            if c_piv is None:
                continue  # redundant constraint
            if tab[i][c_piv] < 0:
                tab[i] = [-x for x in tab[i]]
            den = _pivot(tab, obj, basis, i, c_piv, den)
        keep.append(i)
    tab = [tab[i][:n] + [tab[i][total]] for i in keep]
    basis = [basis[i] for i in keep]

    # Phase 2: synthesize the integer objective row for the current basis.
    obj = [den * cj for cj in cost] + [0]
    for i, bi in enumerate(basis):
        f = cost[bi]
        if f:
            obj = [a - f * p for a, p in zip(obj, tab[i])]
    status, den = _run(tab, obj, basis, n, den)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    x = [_ZERO] * n
    for i, bi in enumerate(basis):
        x[bi] = Fraction(tab[i][-1], den)
    return LPResult(OPTIMAL, value=Fraction(-obj[-1], den * cost_scale), solution=tuple(x))


def feasible_point(
    a_rows: Sequence[Sequence], b: Sequence, n: int
) -> tuple[Fraction, ...] | None:
    """A basic feasible point of {x >= 0 : A x = b}, or None."""
    res = solve_lp(a_rows, b, [0] * n)
    return res.solution if res.status == OPTIMAL else None
