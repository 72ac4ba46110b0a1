"""Exact Gaussian elimination over the rationals."""
from __future__ import annotations

from fractions import Fraction


def _reduce(row: list, pivots: list) -> list:
    row = list(row)
    for col, prow in pivots:
        c = row[col]
        if c:
            row = [a - c * b for a, b in zip(row, prow)]
    return row


def independent_rows(rows: list) -> list:
    """Indices of a maximal independent prefix-greedy subset of ``rows``."""
    pivots = []
    keep = []
    for i, row in enumerate(rows):
        r = _reduce([Fraction(x) for x in row], pivots)
        col = next((j for j, x in enumerate(r) if x != 0), None)
        if col is None:
            continue
        inv = 1 / r[col]
        r = [x * inv for x in r]
        # keep pivots fully reduced against each other
        pivots = [(c, [a - p[col] * b for a, b in zip(p, r)]) for c, p in pivots]
        pivots.append((col, r))
        keep.append(i)
    return keep


def rank(rows: list) -> int:
    return len(independent_rows(rows))


def invert(matrix: list) -> list:
    """Inverse of a square rational matrix; raises ValueError if singular."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                c = a[r][col]
                a[r] = [x - c * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]
