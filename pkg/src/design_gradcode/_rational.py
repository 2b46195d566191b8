"""Exact rational linear algebra on small integer matrices."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(A) -> Matrix:
    return [[Fraction(int(x)) for x in row] for row in A]


def pivot_columns(M: Matrix) -> list[int]:
    """Pivot columns of the reduced row echelon form of ``M``."""
    R = [row[:] for row in M]
    n_rows = len(R)
    n_cols = len(R[0]) if R else 0
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(n_rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return pivots


def solve(A: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Solve the nonsingular square system ``A x = b`` by Gauss-Jordan."""
    n = len(A)
    aug = [list(A[i]) + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * p for a, p in zip(aug[i], aug[c])]
    return [aug[i][n] for i in range(n)]


def gram(A: Matrix) -> Matrix:
    """``A^T A``."""
    cols = list(zip(*A)) if A else []
    return [[sum((x * y for x, y in zip(ci, cj)), Fraction(0)) for cj in cols] for ci in cols]


def matvec_t(A: Matrix, y: Sequence[Fraction]) -> list[Fraction]:
    """``A^T y``."""
    cols = list(zip(*A)) if A else []
    return [sum((x * t for x, t in zip(c, y)), Fraction(0)) for c in cols]


def matvec(A: Matrix, x: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * t for a, t in zip(row, x)), Fraction(0)) for row in A]


def min_norm_normal(G: Matrix, h: Sequence[Fraction]) -> list[Fraction]:
    """Minimum-norm solution of the consistent normal equations ``G x = h``.

    ``G`` is symmetric positive semidefinite. Its pivot rows ``B`` span its
    row space, so ``x = G_B^T (G_B G_B^T)^{-1} h_B`` is the solution lying
    in that row space, which is the minimum-norm one.
    """
    n = len(G)
    if n == 0:
        return []
    B = pivot_columns(G)
    if not B:
        return [Fraction(0)] * n
    if len(B) == n:
        return solve(G, h)
    GB = [G[i] for i in B]
    GGt = [[sum((x * y for x, y in zip(ri, rj)), Fraction(0)) for rj in GB] for ri in GB]
    y = solve(GGt, [h[i] for i in B])
    return matvec_t(GB, y)


def min_norm_lstsq(A: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Minimum-norm minimizer of ``||A x - b||^2``, i.e. ``pinv(A) b``."""
    if not A or not A[0]:
        return []
    return min_norm_normal(gram(A), matvec_t(A, b))
