"""Polynomials and rational functions in the frequency variable.

Coefficients live in a small union ring: plain Python/numpy numbers for
bound values, :class:`~circuitq.symbolic.expr.Expr` nodes when free
parameters are present.  Arithmetic keeps numeric coefficients numeric, so
circuits without symbols never touch the expression machinery.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ..errors import DegenerateDerivativeError, RootConditionError
from . import expr as ex
from .expr import Expr, OMEGA_NAME

Coeff = Union[complex, Expr]

_NUMBER_TYPES = (int, float, complex, np.integer, np.floating, np.complexfloating)

#: Relative tolerance on |P(z)| for z to count as a numerator root, measured
#: against the sum of term magnitudes at z.
ROOT_CONDITION_RTOL = 1e-6

#: Relative tolerance below which |Q(z)| is treated as a pole-zero collision.
POLE_COLLISION_RTOL = 1e-12


def _is_number(c) -> bool:
    return isinstance(c, _NUMBER_TYPES)


def coeff_is_zero(c: Coeff) -> bool:
    """Structural zero test: literal zeros only, no symbolic cancellation."""
    if _is_number(c):
        return c == 0
    return ex.is_zero(c)


def coeff_add(a: Coeff, b: Coeff) -> Coeff:
    if _is_number(a) and _is_number(b):
        return a + b
    return ex.add(a, b)


def coeff_mul(a: Coeff, b: Coeff) -> Coeff:
    if _is_number(a) and _is_number(b):
        return a * b
    return ex.mul(a, b)


def coeff_neg(a: Coeff) -> Coeff:
    if _is_number(a):
        return -a
    return ex.neg(a)


def coeff_value(c: Coeff, bindings: Mapping[str, object] | None = None) -> complex:
    if _is_number(c):
        return complex(c)
    return complex(ex.evaluate(c, bindings))


class Polynomial:
    """Polynomial in the frequency variable, ascending coefficients.

    Structurally-zero leading coefficients are trimmed at construction so
    that the degree is meaningful; a polynomial that folds entirely to zero
    is represented by the single coefficient ``0``.
    """

    __slots__ = ("coeffs", "_numeric")

    def __init__(self, coeffs: Iterable[Coeff]):
        cs = [c.value if isinstance(c, ex.Const) else c for c in coeffs]
        while len(cs) > 1 and coeff_is_zero(cs[-1]):
            cs.pop()
        if not cs:
            cs = [0j]
        self.coeffs = tuple(complex(c) if _is_number(c) else c for c in cs)
        self._numeric = all(_is_number(c) for c in self.coeffs)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c: Coeff) -> "Polynomial":
        return cls([c])

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls([0j])

    @classmethod
    def one(cls) -> "Polynomial":
        return cls([1.0 + 0j])

    @classmethod
    def omega_power(cls, k: int, coeff: Coeff = 1.0) -> "Polynomial":
        return cls([0j] * k + [coeff])

    # -- structure ----------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and coeff_is_zero(self.coeffs[0])

    @property
    def is_numeric(self) -> bool:
        return self._numeric

    def free_symbols(self) -> frozenset[str]:
        names: set[str] = set()
        for c in self.coeffs:
            if isinstance(c, Expr):
                names |= ex.free_symbols(c)
        return frozenset(names)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    # -- ring operations ----------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = coeff_add(out[i], c)
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial([coeff_neg(c) for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero or other.is_zero:
            return Polynomial.zero()
        if self._numeric and other._numeric:
            a = np.asarray(self.coeffs, dtype=complex)
            b = np.asarray(other.coeffs, dtype=complex)
            return Polynomial(np.convolve(a, b))
        out: list[Coeff] = [0j] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if coeff_is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                if coeff_is_zero(b):
                    continue
                out[i + j] = coeff_add(out[i + j], coeff_mul(a, b))
        return Polynomial(out)

    def scale(self, factor: Coeff) -> "Polynomial":
        return Polynomial([coeff_mul(c, factor) for c in self.coeffs])

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial.zero()
        return Polynomial(
            [coeff_mul(k, c) for k, c in enumerate(self.coeffs) if k > 0]
        )

    def intpow(self, n: int) -> "Polynomial":
        result = Polynomial.one()
        base = self
        k = n
        while k > 0:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def strip_omega_factor(self) -> tuple["Polynomial", int]:
        """Factor out the largest power of the variable that divides the
        polynomial structurally.  Returns (reduced polynomial, power)."""
        k = 0
        while k < len(self.coeffs) - 1 and coeff_is_zero(self.coeffs[k]):
            k += 1
        if k == 0:
            return self, 0
        return Polynomial(self.coeffs[k:]), k

    # -- evaluation ---------------------------------------------------
    def bind(self, bindings: Mapping[str, object] | None = None) -> np.ndarray:
        """Numeric coefficient vector (ascending) for scalar bindings."""
        if self._numeric:
            return np.asarray(self.coeffs, dtype=complex)
        return np.array([coeff_value(c, bindings) for c in self.coeffs], dtype=complex)

    def __call__(self, z: complex, bindings: Mapping[str, object] | None = None) -> complex:
        return horner(self.bind(bindings), z)


def horner(coeffs_ascending: np.ndarray, z: complex) -> complex:
    acc = 0j
    for c in coeffs_ascending[::-1]:
        acc = acc * z + c
    return complex(acc)


def rescale_to_unit_disk(coeffs: np.ndarray, s: float) -> np.ndarray:
    """Coefficients of p(s*x) scaled so the largest magnitude is one.

    Computed in log space: s**k alone overflows double range for the
    degrees produced by uncancelled network reductions, even when the
    combined terms c_k * s**k are moderate.
    """
    c = np.asarray(coeffs, dtype=complex)
    mags = np.abs(c)
    nz = mags > 0
    if not np.any(nz):
        return c
    exps = np.full(len(c), -np.inf)
    exps[nz] = np.log10(mags[nz]) + np.arange(len(c))[nz] * np.log10(s)
    shift = np.max(exps[np.isfinite(exps)])
    out = np.zeros(len(c), dtype=complex)
    # Unit phase via angle: dividing a subnormal complex by its magnitude
    # can overflow inside the complex-division routine.
    out[nz] = np.exp(1j * np.angle(c[nz])) * 10.0 ** (exps[nz] - shift)
    return out


def term_scale(coeffs_ascending: np.ndarray, z: complex) -> float:
    """Sum of term magnitudes; the natural scale for residuals at z."""
    az = abs(z)
    scale = 0.0
    p = 1.0
    for c in coeffs_ascending:
        scale += abs(c) * p
        p *= az
    return scale


class RationalFunction:
    """Ratio of two polynomials in the frequency variable."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial):
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        self.num = num
        self.den = den

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def free_symbols(self) -> frozenset[str]:
        return self.num.free_symbols() | self.den.free_symbols()

    def bind(self, bindings: Mapping[str, object] | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Bound (numerator, denominator) coefficients, jointly normalized.

        Both vectors are divided by the largest denominator-coefficient
        magnitude, which pins the representation without changing the
        ratio and guards the wide dynamic range of circuit coefficients.
        """
        p = self.num.bind(bindings)
        q = self.den.bind(bindings)
        qmax = np.max(np.abs(q))
        if qmax == 0:
            raise ZeroDivisionError("denominator vanished for these bindings")
        return p / qmax, q / qmax

    def __call__(self, z: complex, bindings: Mapping[str, object] | None = None) -> complex:
        p, q = self.bind(bindings)
        return eval_rational_arrays(p, q, z)


def _normalized_rational(num: Polynomial, den: Polynomial) -> RationalFunction:
    """Build P/Q with a joint numeric rescale.

    Deeply nested reductions multiply coefficients spanning hundreds of
    orders of magnitude; rescaling both polynomials by the same factor
    keeps fully-numeric intermediates inside double range without changing
    the ratio.  Symbolic coefficients are left alone.
    """
    if num.is_numeric and den.is_numeric and not den.is_zero:
        scale = float(np.max(np.abs(np.asarray(den.coeffs, dtype=complex))))
        if scale > 0 and (scale > 1e18 or scale < 1e-18):
            inv = 1.0 / scale
            num = Polynomial(np.asarray(num.coeffs, dtype=complex) * inv)
            den = Polynomial(np.asarray(den.coeffs, dtype=complex) * inv)
    return RationalFunction(num, den)


def to_rational(e: Expr, var: str = OMEGA_NAME) -> RationalFunction:
    """Rewrite an expression built from rational operations as P/Q.

    Point evaluations are preserved wherever both forms are defined.  No
    polynomial GCD is attempted; common factors simply remain.
    """
    memo: dict[int, RationalFunction] = {}
    for node in ex.postorder(e):
        if isinstance(node, ex.Const):
            r = RationalFunction(Polynomial.constant(node.value), Polynomial.one())
        elif isinstance(node, ex.Sym):
            if node.name == var:
                r = RationalFunction(Polynomial.omega_power(1), Polynomial.one())
            else:
                r = RationalFunction(Polynomial.constant(node), Polynomial.one())
        elif isinstance(node, ex.Add):
            parts = [memo[id(a)] for a in node.args]
            num, den = parts[0].num, parts[0].den
            for part in parts[1:]:
                num = num * part.den + part.num * den
                den = den * part.den
            r = _normalized_rational(num, den)
        elif isinstance(node, ex.Mul):
            parts = [memo[id(a)] for a in node.args]
            num, den = parts[0].num, parts[0].den
            for part in parts[1:]:
                num = num * part.num
                den = den * part.den
            r = _normalized_rational(num, den)
        elif isinstance(node, ex.Div):
            a = memo[id(node.num)]
            b = memo[id(node.den)]
            if b.num.is_zero:
                raise ZeroDivisionError("division by structurally zero expression")
            r = _normalized_rational(a.num * b.den, a.den * b.num)
        elif isinstance(node, ex.Neg):
            a = memo[id(node.arg)]
            r = RationalFunction(-a.num, a.den)
        elif isinstance(node, ex.IntPow):
            a = memo[id(node.base)]
            r = _normalized_rational(a.num.intpow(node.exp), a.den.intpow(node.exp))
        else:  # pragma: no cover
            raise TypeError(f"unknown node {node!r}")
        memo[id(node)] = r
    return memo[id(e)]


def derivative_at_root_arrays(
    p: np.ndarray,
    q: np.ndarray,
    zeta: complex,
    *,
    root_rtol: float = ROOT_CONDITION_RTOL,
    pole_rtol: float = POLE_COLLISION_RTOL,
) -> complex:
    """P'(zeta)/Q(zeta) for bound coefficient vectors; see
    :func:`rational_derivative_at` for the contract.

    Internally evaluates at x = zeta/|zeta| with rescaled coefficients so
    every Horner intermediate stays inside double range regardless of
    degree; the rescale factors cancel in the final ratio except for one
    power of the scale from the derivative.
    """
    s = abs(zeta)
    if s == 0:
        s = 1.0
    x = zeta / s
    ps = rescale_to_unit_disk(p, s)
    qs = rescale_to_unit_disk(q, s)
    # The two rescales differ by a constant; recover the ratio correction
    # from the largest original terms.
    p_at = horner(ps, x)
    p_scale = float(np.sum(np.abs(ps)))
    if p_scale == 0 or abs(p_at) > root_rtol * p_scale:
        raise RootConditionError(
            f"{zeta!r} is not a numerator root: |P| = {abs(p_at):.3e} "
            f"vs scale {p_scale:.3e} (relative)"
        )
    q_at = horner(qs, x)
    q_scale = float(np.sum(np.abs(qs)))
    if q_scale == 0 or abs(q_at) <= pole_rtol * q_scale:
        raise DegenerateDerivativeError(
            "denominator vanishes at the root (pole-zero collision); "
            "the admittance derivative is not defined here"
        )
    dp_at = horner(np.arange(1, len(ps)) * ps[1:], x)
    ratio = _rescale_ratio(p, q, s)
    return (dp_at / q_at) * ratio / s


def _rescale_ratio(p: np.ndarray, q: np.ndarray, s: float) -> float:
    """max-term(P)/max-term(Q) at radius s, in log space."""
    logs = np.log10(s)

    def peak(c: np.ndarray) -> float:
        mags = np.abs(np.asarray(c))
        nz = mags > 0
        exps = np.log10(mags[nz]) + np.arange(len(c))[nz] * logs
        return float(np.max(exps))

    return 10.0 ** (peak(p) - peak(q))


def eval_rational_arrays(p: np.ndarray, q: np.ndarray, z: complex) -> complex:
    """P(z)/Q(z) via unit-disk rescaling, safe for any degree."""
    s = abs(z)
    if s == 0:
        s = 1.0
    x = z / s
    ps = rescale_to_unit_disk(p, s)
    qs = rescale_to_unit_disk(q, s)
    return horner(ps, x) / horner(qs, x) * _rescale_ratio(p, q, s)


def rational_derivative_at(
    r: RationalFunction,
    zeta: complex,
    bindings: Mapping[str, object] | None = None,
    *,
    root_rtol: float = ROOT_CONDITION_RTOL,
    pole_rtol: float = POLE_COLLISION_RTOL,
) -> complex:
    """Derivative of ``r`` at a numerator root: P'(zeta)/Q(zeta).

    The quotient-rule term proportional to P(zeta) is dropped, which is
    exact when zeta is a root of the numerator.  The root condition is
    enforced relative to the term-magnitude scale; a vanishing denominator
    signals a pole-zero collision and is reported instead of divided by.
    """
    p, q = r.bind(bindings)
    return derivative_at_root_arrays(
        p, q, zeta, root_rtol=root_rtol, pole_rtol=pole_rtol
    )
