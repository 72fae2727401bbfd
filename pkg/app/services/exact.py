"""
Exact rational linear algebra on small dense matrices.

Entries are ints or Fractions; every routine returns Fractions (or ints where
noted) and never touches floating point.
"""
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence

Number = int | Fraction
Matrix = Sequence[Sequence[Number]]


def _copy(rows: Matrix) -> List[List[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


def row_echelon(rows: Matrix) -> tuple[List[List[Fraction]], List[int]]:
    """
    Reduced row echelon form by Gauss-Jordan elimination.

    Returns:
        (reduced rows, pivot column indices)
    """
    a = _copy(rows)
    if not a:
        return a, []
    n_cols = len(a[0])
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        pivot = next((k for k in range(r, len(a)) if a[k][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        lead = a[r][c]
        a[r] = [x / lead for x in a[r]]
        for k in range(len(a)):
            if k != r and a[k][c] != 0:
                factor = a[k][c]
                a[k] = [x - factor * y for x, y in zip(a[k], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Matrix) -> int:
    if not rows:
        return 0
    return len(row_echelon(rows)[1])


def nullspace(rows: Matrix, n_cols: int) -> List[List[Fraction]]:
    """Basis of {x : rows . x = 0} in R^n_cols."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    reduced, pivots = row_echelon(rows)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n_cols
        x[f] = Fraction(1)
        for r, p in enumerate(pivots):
            x[p] = -reduced[r][f]
        basis.append(x)
    return basis


def determinant(rows: Matrix) -> Fraction:
    """Determinant by fraction elimination with row pivoting."""
    a = _copy(rows)
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        pivot = next((k for k in range(c, n) if a[k][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            det = -det
        lead = a[c][c]
        det *= lead
        for k in range(c + 1, n):
            if a[k][c] != 0:
                factor = a[k][c] / lead
                a[k] = [x - factor * y for x, y in zip(a[k], a[c])]
    return det


def sign(x: Number) -> int:
    return (x > 0) - (x < 0)


def solve(rows: Matrix, rhs: Sequence[Number]) -> Optional[List[Fraction]]:
    """
    Solve rows . x = rhs.

    Returns:
        The unique solution, or None when the system is inconsistent or the
        columns are dependent (solution not unique).
    """
    n_cols = len(rows[0]) if rows else 0
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = row_echelon(augmented)
    if n_cols in pivots:
        return None
    if len(pivots) < n_cols:
        return None
    x = [Fraction(0)] * n_cols
    for r, p in enumerate(pivots):
        x[p] = reduced[r][n_cols]
    return x


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    return sum(a * b for a, b in zip(u, v))


def primitive(vector: Sequence[Number]) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fractions = [Fraction(x) for x in vector]
    denom = 1
    for x in fractions:
        denom = denom * x.denominator // gcd(denom, x.denominator)
    ints = [int(x * denom) for x in fractions]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)
