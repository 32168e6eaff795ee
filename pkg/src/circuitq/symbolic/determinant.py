"""Division-free determinants via the Berkowitz vector recursion.

Works over any commutative ring presented as (zero, one, add, mul, neg);
instances are provided for expression entries and for polynomial entries.
Being division-free, the computation stays inside the ring, so a matrix of
polynomials yields its determinant directly as a polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from . import expr as ex
from .expr import Expr
from .poly import Polynomial


@dataclass(frozen=True)
class Ring:
    zero: object
    one: object
    add: Callable
    mul: Callable
    neg: Callable


EXPR_RING = Ring(
    zero=ex.const(0),
    one=ex.const(1),
    add=lambda a, b: ex.add(a, b),
    mul=lambda a, b: ex.mul(a, b),
    neg=lambda a: ex.neg(a),
)

POLY_RING = Ring(
    zero=Polynomial.zero(),
    one=Polynomial.one(),
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    neg=lambda a: -a,
)


def _dot(row, col, ring: Ring):
    acc = ring.mul(row[0], col[0])
    for a, b in zip(row[1:], col[1:]):
        acc = ring.add(acc, ring.mul(a, b))
    return acc


def berkowitz_vector(matrix: Sequence[Sequence], ring: Ring) -> list:
    """Coefficients [1, c_{n-1}, ..., c_0] of det(xI - A), descending."""
    n = len(matrix)
    v = [ring.one, ring.neg(matrix[0][0])]
    for k in range(2, n + 1):
        a = matrix[k - 1][k - 1]
        row = [matrix[k - 1][j] for j in range(k - 1)]
        col = [matrix[i][k - 1] for i in range(k - 1)]
        sub = [[matrix[i][j] for j in range(k - 1)] for i in range(k - 1)]

        # First column of the (k+1) x k Toeplitz transform:
        # [1, -a, -row.col, -row.Mcol, -row.M^2col, ...]
        s = [ring.one, ring.neg(a)]
        vec = col
        for i in range(k - 1):
            s.append(ring.neg(_dot(row, vec, ring)))
            if i < k - 2:
                vec = [_dot(sub_row, vec, ring) for sub_row in sub]

        new_v = []
        for i in range(k + 1):
            acc = None
            for j in range(len(v)):
                d = i - j
                if 0 <= d < len(s):
                    term = ring.mul(s[d], v[j])
                    acc = term if acc is None else ring.add(acc, term)
            new_v.append(ring.zero if acc is None else acc)
        v = new_v
    return v


def _determinant(matrix: Sequence[Sequence], ring: Ring):
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise ValueError("determinant requires a square matrix")
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    if n == 1:
        return matrix[0][0]
    v = berkowitz_vector(matrix, ring)
    det = v[-1]
    if n % 2 == 1:
        det = ring.neg(det)
    return det


def berkowitz_determinant(matrix: Sequence[Sequence[Expr]]) -> Expr:
    """Division-free determinant of a matrix of expressions."""
    m = [[ex.as_expr(entry) for entry in row] for row in matrix]
    return _determinant(m, EXPR_RING)


def berkowitz_poly_determinant(matrix: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Determinant of a matrix of polynomials, collected as a polynomial."""
    return _determinant(matrix, POLY_RING)
