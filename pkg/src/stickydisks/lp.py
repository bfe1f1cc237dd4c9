"""Exact two-phase simplex over rationals with Bland's rule."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

from .errors import LPNumericalFailure

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: Optional[list]
    value: Optional[Fraction]
    pivots: int


def to_fraction(v) -> Fraction:
    """Exact rational value of an int, float (its binary value) or Fraction."""
    return v if isinstance(v, Fraction) else Fraction(v)


def _integer_row(row, rhs):
    """Scale a row of Fractions to integers (positive power-of-two or lcm factor)."""
    den = 1
    for v in row:
        if v:
            den = lcm(den, v.denominator)
    den = lcm(den, rhs.denominator)
    return [Fraction(v * den) for v in row], Fraction(rhs * den)


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows  # list of lists of Fraction
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r, c, obj):
        prow = self.rows[r]
        inv = ONE / prow[c]
        prow[:] = [v * inv if v else ZERO for v in prow]
        self.rhs[r] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.rhs[i] -= f * self.rhs[r]
        f = obj[0][c]
        if f:
            for j in nz:
                obj[0][j] -= f * prow[j]
            obj[1] -= f * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def run(self, obj, allowed, max_pivots):
        """Minimise with reduced-cost row ``obj = [costs, -value]`` using Bland's rule."""
        while True:
            if self.pivots > max_pivots:
                raise LPNumericalFailure(f"pivot limit {max_pivots} exceeded")
            enter = next((j for j in allowed if obj[0][j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter, obj)


def simplex_max(c, A_eq, b_eq, max_pivots=100000) -> LPResult:
    """Maximise ``c @ x`` subject to ``A_eq @ x = b_eq`` and ``x >= 0``, exactly.

    Inputs may be ints, floats or Fractions; floats are taken at their exact
    binary value.
    """
    nvar = len(c)
    A = [[to_fraction(v) for v in row] for row in A_eq]
    b = [to_fraction(v) for v in b_eq]
    for row in A:
        if len(row) != nvar:
            raise ValueError("constraint row length does not match objective")
    rows, rhs = [], []
    for row, bi in zip(A, b):
        row, bi = _integer_row(row, bi)
        if bi < 0:
            row, bi = [-v for v in row], -bi
        rows.append(row)
        rhs.append(bi)
    m = len(rows)
    ntot = nvar + m
    for i in range(m):
        rows[i] = rows[i] + [ONE if k == i else ZERO for k in range(m)]
    tab = _Tableau(rows, rhs, [nvar + i for i in range(m)])

    # phase 1: minimise the sum of artificials
    cost1 = [ZERO] * ntot
    val1 = ZERO
    for i in range(m):
        for j in range(nvar):
            cost1[j] -= rows[i][j]
        val1 -= rhs[i]
    obj1 = [cost1, val1]
    tab.run(obj1, range(ntot), max_pivots)
    if obj1[1] != 0:
        return LPResult("infeasible", None, None, tab.pivots)

    # drive zero-level artificials out of the basis; drop redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= nvar:
            j = next((j for j in range(nvar) if tab.rows[i][j]), None)
            if j is None:
                del tab.rows[i], tab.rhs[i], tab.basis[i]
                continue
            tab.pivot(i, j, obj1)
        i += 1

    # phase 2: minimise -c
    cost = [-to_fraction(v) for v in c] + [ZERO] * m
    val = ZERO
    for i, bj in enumerate(tab.basis):
        f = cost[bj]
        if f:
            row = tab.rows[i]
            for j in range(ntot):
                if row[j]:
                    cost[j] -= f * row[j]
            val -= f * tab.rhs[i]
    obj2 = [cost, val]
    status = tab.run(obj2, range(nvar), max_pivots)
    if status == "unbounded":
        return LPResult("unbounded", None, None, tab.pivots)
    x = [ZERO] * nvar
    for i, bj in enumerate(tab.basis):
        if bj < nvar:
            x[bj] = tab.rhs[i]
    value = sum((to_fraction(ci) * xi for ci, xi in zip(c, x)), ZERO)
    return LPResult("optimal", x, value, tab.pivots)
