import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitq.errors import DegenerateDerivativeError, RootConditionError
from circuitq.symbolic import expr as ex
from circuitq.symbolic.determinant import berkowitz_determinant
from circuitq.symbolic.poly import (
    Polynomial,
    RationalFunction,
    rational_derivative_at,
    to_rational,
)
from circuitq.symbolic.roots import halley_refine, polynomial_roots

from .oracles import lu_determinant


class TestExpressions:
    def test_constant_folding(self):
        e = ex.add(ex.const(2), ex.const(3), ex.mul(ex.const(0), ex.sym("x")))
        assert isinstance(e, ex.Const)
        assert e.value == 5

    def test_literal_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            ex.div(ex.sym("x"), ex.const(0))

    def test_free_symbols(self):
        e = ex.div(ex.add(ex.sym("a"), ex.const(1)), ex.mul(ex.sym("b"), ex.omega()))
        assert ex.free_symbols(e) == {"a", "b", "w"}

    def test_evaluate_matches_raw(self):
        # folding performed by the constructors never changes values
        rng = random.Random(3)
        for _ in range(200):
            depth = rng.randint(1, 6)
            syms = ["a", "b", "c"]

            def build(d):
                if d == 0:
                    if rng.random() < 0.5:
                        return ex.Sym(rng.choice(syms))
                    return ex.Const(complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
                op = rng.randrange(5)
                if op == 0:
                    return ex.Add(tuple(build(d - 1) for _ in range(rng.randint(2, 3))))
                if op == 1:
                    return ex.Mul(tuple(build(d - 1) for _ in range(rng.randint(2, 3))))
                if op == 2:
                    return ex.Neg(build(d - 1))
                if op == 3:
                    return ex.IntPow(build(d - 1), rng.randint(2, 3))
                return ex.Div(build(d - 1), ex.Add((build(d - 1), ex.Const(3.7))))

            raw = build(depth)
            bindings = {s: rng.uniform(0.5, 2.0) for s in syms}
            try:
                expected = ex.evaluate_raw(raw, bindings)
            except ZeroDivisionError:
                continue
            got = ex.evaluate(raw, bindings)
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_deep_dag_does_not_recurse(self):
        e = ex.sym("x")
        for _ in range(5000):
            e = ex.add(e, ex.const(1))
        assert ex.evaluate(e, {"x": 1.0}) == pytest.approx(5001.0)


class TestBerkowitz:
    def test_two_by_two(self):
        a, b, c, d = (ex.sym(s) for s in "abcd")
        det = berkowitz_determinant([[a, b], [c, d]])
        vals = {"a": 2.0, "b": 3.0, "c": 5.0, "d": 7.0}
        assert ex.evaluate(det, vals) == pytest.approx(2 * 7 - 3 * 5)

    def test_matches_lu_on_random_matrices(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 4, 6, 8):
            for _ in range(8):
                m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
                det = berkowitz_determinant(
                    [[ex.const(m[i, j]) for j in range(n)] for i in range(n)]
                )
                got = ex.evaluate(det)
                assert got == pytest.approx(lu_determinant(m), rel=1e-9)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            berkowitz_determinant([[ex.const(1), ex.const(2)]])

    def test_worked_rlc_fixture(self):
        # entries of the grounded two-node matrix of a C / R / L loop,
        # already multiplied by the frequency variable
        w = ex.omega()
        cs, rs, ls = ex.sym("Cv"), ex.sym("Rv"), ex.sym("Lv")
        m = [
            [
                ex.add(ex.mul(ex.const(1j), cs, w, w), ex.div(w, rs)),
                ex.neg(ex.div(w, rs)),
            ],
            [
                ex.neg(ex.div(w, rs)),
                ex.add(ex.div(ex.const(-1j), ls), ex.div(w, rs)),
            ],
        ]
        det = berkowitz_determinant(m)
        rat = to_rational(det)
        # det = (i w / (R L)) * (L C w^2 - i R C w - 1): proportional to the
        # quadratic after the structural w factor is stripped
        num, power = rat.num.strip_omega_factor()
        assert power >= 1
        rng = np.random.default_rng(5)
        for _ in range(4):
            b = {
                "Cv": rng.uniform(1e-14, 1e-12),
                "Rv": rng.uniform(10, 1e4),
                "Lv": rng.uniform(1e-9, 1e-7),
            }
            target = np.array(
                [-1.0, -1j * b["Rv"] * b["Cv"], b["Lv"] * b["Cv"]], dtype=complex
            )
            mine = num.bind(b) / rat.den.bind(b)[0]
            ratio = mine / target
            assert np.max(np.abs(ratio / ratio[0] - 1)) < 1e-10


class TestToRational:
    def test_parallel_lc(self):
        w = ex.omega()
        lv, cv = ex.sym("Lv"), ex.sym("Cv")
        y = ex.add(ex.div(ex.const(1), ex.mul(ex.const(1j), lv, w)), ex.mul(ex.const(1j), cv, w))
        r = to_rational(y)
        b = {"Lv": 1e-8, "Cv": 1e-13}
        for w_val in (1e9, 1e10, 3e10):
            direct = 1 / (1j * 1e-8 * w_val) + 1j * 1e-13 * w_val
            assert r(w_val, b) == pytest.approx(direct, rel=1e-12)

    def test_constant_expression(self):
        r = to_rational(ex.const(4.5))
        assert r.num.degree == 0 and r.den.degree == 0
        assert r(123.0) == pytest.approx(4.5)

    def test_nested_star_mesh_output_matches_pointwise(self):
        # three-node ladder reduced by hand: series(Y1, parallel(Y2, Y3))
        w = ex.omega()
        y1 = ex.div(ex.const(1), ex.mul(ex.const(1j), ex.const(2e-9), w))
        y2 = ex.mul(ex.const(1j), ex.const(3e-13), w)
        y3 = ex.div(ex.const(1), ex.const(70.0))
        inner = ex.add(y2, y3)
        series = ex.div(ex.mul(y1, inner), ex.add(y1, inner))
        r = to_rational(series)
        rng = np.random.default_rng(17)
        f = ex.compile_expr(series)
        for _ in range(50):
            w_val = complex(rng.uniform(1e9, 1e11), rng.uniform(-1e9, 1e9))
            assert r(w_val) == pytest.approx(f({"w": w_val}), rel=1e-9)


class TestRationalDerivative:
    def test_parallel_lc_slope_fixes_capacitance(self):
        # Y = (1 - L C w^2)/(i L w): at the resonance the slope is 2iC, so
        # |Im[Y']| / 2 recovers C
        lv, cv = 1e-8, 1e-13
        num = Polynomial([1.0, 0.0, -lv * cv])
        den = Polynomial([0.0, 1j * lv])
        r = RationalFunction(num, den)
        zeta = 1 / np.sqrt(lv * cv)
        dy = rational_derivative_at(r, zeta)
        assert dy == pytest.approx(2j * cv, rel=1e-9)
        assert abs(dy.imag) / 2 == pytest.approx(cv, rel=1e-9)

    def test_simple_ratio(self):
        r = RationalFunction(Polynomial([-2.0, 1.0]), Polynomial([1.0, 1.0]))
        assert rational_derivative_at(r, 2.0) == pytest.approx(1.0 / 3.0)

    def test_matches_finite_difference_on_planted_roots(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            roots = rng.uniform(0.5, 3.0, size=3) + 1j * rng.uniform(-0.2, 0.2, size=3)
            num = Polynomial(np.poly(roots)[::-1].tolist())
            den = Polynomial([1.0, rng.uniform(0.5, 1.5), rng.uniform(0.1, 0.4)])
            r = RationalFunction(num, den)
            z = complex(roots[0])
            dy = rational_derivative_at(r, z)
            h = 1e-6 * abs(z)
            fd = (r(z + h) - r(z - h)) / (2 * h)
            assert dy == pytest.approx(fd, rel=1e-6)

    def test_root_condition_enforced(self):
        r = RationalFunction(Polynomial([-2.0, 1.0]), Polynomial([1.0, 1.0]))
        with pytest.raises(RootConditionError):
            rational_derivative_at(r, 5.0)

    def test_pole_zero_collision_reported(self):
        shared = Polynomial([-2.0, 1.0])
        r = RationalFunction(shared * Polynomial([1.0, 1.0]), shared)
        with pytest.raises(DegenerateDerivativeError):
            rational_derivative_at(r, 2.0)


class TestRoots:
    def test_quadratic(self):
        got = sorted(polynomial_roots([-1.0, 0.0, 1.0]), key=lambda z: z.real)
        assert got[0] == pytest.approx(-1.0)
        assert got[1] == pytest.approx(1.0)

    def test_rlc_quadratic_closed_form(self):
        lv, cv, rv = 1e-8, 1e-13, 50.0
        # L C w^2 - i R C w - 1
        roots = polynomial_roots([-1.0, -1j * rv * cv, lv * cv])
        disc = np.sqrt(4 * lv * cv - rv**2 * cv**2)
        expected = {
            (1j * rv * cv + disc) / (2 * lv * cv),
            (1j * rv * cv - disc) / (2 * lv * cv),
        }
        for z in roots:
            assert min(abs(z - e) / abs(e) for e in expected) < 1e-9
            assert abs(z.imag - rv / (2 * lv)) / abs(z.imag) < 1e-9

    def test_construct_then_solve_round_trip(self):
        zeta = 3 + 0.1j
        coeffs = np.poly([zeta, np.conj(zeta)])[::-1]
        got = sorted(polynomial_roots(coeffs), key=lambda z: z.imag)
        assert got[0] == pytest.approx(np.conj(zeta), rel=1e-10)
        assert got[1] == pytest.approx(zeta, rel=1e-10)

    def test_zero_and_constant_polynomials_rejected(self):
        with pytest.raises(ValueError):
            polynomial_roots([0.0])
        with pytest.raises(ValueError):
            polynomial_roots([3.0])

    def test_vieta_checks(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            d = rng.integers(2, 7)
            coeffs = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
            coeffs[-1] += 3.0  # keep the leading coefficient well away from 0
            roots = polynomial_roots(coeffs)
            assert np.sum(roots) == pytest.approx(
                -coeffs[-2] / coeffs[-1], rel=1e-8, abs=1e-8
            )
            assert np.prod(roots) == pytest.approx(
                (-1) ** d * coeffs[0] / coeffs[-1], rel=1e-8, abs=1e-8
            )

    def test_wide_dynamic_range(self):
        # the characteristic scale of circuit polynomials
        lv, cv = 1e-8, 1e-13
        roots = polynomial_roots([1.0, 0.0, -lv * cv])
        w0 = 1 / np.sqrt(lv * cv)
        assert sorted(z.real for z in roots)[1] == pytest.approx(w0, rel=1e-10)


class TestHalley:
    def test_simple_refinement(self):
        z = halley_refine([-4.0, 0.0, 1.0], 1.9, rel_tol=1e-12)
        assert z == pytest.approx(2.0, rel=1e-12)

    def test_imaginary_part_snapped_to_zero(self):
        z = halley_refine([-4.0, 0.0, 1.0], 2.0 + 2e-13j, rel_tol=1e-11)
        assert z.imag == 0.0

    def test_residual_never_increases(self):
        rng = np.random.default_rng(41)
        for _ in range(120):
            d = rng.integers(2, 6)
            coeffs = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
            coeffs[-1] += 2.0
            guess = complex(rng.normal(), rng.normal())
            before = abs(np.polyval(coeffs[::-1], guess))
            z = halley_refine(coeffs, guess, rel_tol=1e-12, max_iter=40)
            after = abs(np.polyval(coeffs[::-1], z))
            assert after <= before * (1 + 1e-12)

    def test_refinement_beats_companion_output_on_high_q_pair(self):
        w0, q = 1e10, 1e7
        zeta = w0 * np.sqrt(1 - 1 / (4 * q * q)) + 1j * w0 / (2 * q)
        coeffs = np.poly([zeta, -np.conj(zeta)])[::-1]
        raw = polynomial_roots(coeffs)
        raw_plus = max(raw, key=lambda z: z.real)
        refined = halley_refine(coeffs, raw_plus, rel_tol=1e-14, max_iter=100)
        res_raw = abs(np.polyval(coeffs[::-1], raw_plus))
        res_ref = abs(np.polyval(coeffs[::-1], refined))
        assert res_ref <= res_raw
        assert refined == pytest.approx(zeta, rel=1e-12)
