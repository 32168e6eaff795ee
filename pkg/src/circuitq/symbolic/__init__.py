"""Minimal symbolic core: expressions, polynomials, determinants, roots."""

from .determinant import berkowitz_determinant, berkowitz_poly_determinant
from .expr import (
    OMEGA_NAME,
    Add,
    Const,
    Div,
    Expr,
    IntPow,
    Mul,
    Neg,
    Sym,
    add,
    as_expr,
    compile_expr,
    const,
    div,
    evaluate,
    free_symbols,
    intpow,
    mul,
    neg,
    omega,
    sub,
    sym,
)
from .poly import (
    Polynomial,
    RationalFunction,
    rational_derivative_at,
    to_rational,
)
from .roots import halley_refine, polynomial_roots

__all__ = [
    "OMEGA_NAME",
    "Add",
    "Const",
    "Div",
    "Expr",
    "IntPow",
    "Mul",
    "Neg",
    "Polynomial",
    "RationalFunction",
    "Sym",
    "add",
    "as_expr",
    "berkowitz_determinant",
    "berkowitz_poly_determinant",
    "compile_expr",
    "const",
    "div",
    "evaluate",
    "free_symbols",
    "halley_refine",
    "intpow",
    "mul",
    "neg",
    "omega",
    "polynomial_roots",
    "sub",
    "rational_derivative_at",
    "sym",
    "to_rational",
]
