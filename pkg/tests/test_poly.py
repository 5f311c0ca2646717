import random
from fractions import Fraction

import numpy as np
import pytest

from quasilin.poly import (
    NEG_INF,
    ExprError,
    Poly1,
    PolyN,
    RationalComplex,
    degree_profile,
    eval_matrix,
    parse_poly,
    parse_scalar,
    partial,
)


def _rand_scalar(rng, span=4):
    re = Fraction(rng.randint(-span, span), rng.randint(1, 3))
    im = Fraction(rng.randint(-span, span), rng.randint(1, 3))
    return RationalComplex(re, im)


def _rand_polyn(rng, nvars, deg=2, nterms=4):
    p = PolyN.zero(nvars)
    for _ in range(nterms):
        exps = tuple(rng.randint(0, deg) for _ in range(nvars))
        p = p + PolyN(nvars, {exps: _rand_scalar(rng)})
    return p


def _rand_poly1(rng, deg=4):
    return Poly1([_rand_scalar(rng) for _ in range(deg + 1)])


def test_rational_complex_field_ops():
    a = RationalComplex(Fraction(1, 2), Fraction(-3, 4))
    b = RationalComplex(2, 5)
    assert a + b == RationalComplex(Fraction(5, 2), Fraction(17, 4))
    assert a * b - b * a == RationalComplex(0)
    # division is exact: (a/b)*b == a
    assert (a / b) * b == a
    assert a.inverse() * a == 1
    with pytest.raises(ZeroDivisionError):
        RationalComplex(0).inverse()


def test_rational_complex_rejects_floats():
    with pytest.raises(TypeError):
        RationalComplex(0.5)


def test_poly1_degree_and_arith():
    z = Poly1.zero()
    assert z.degree() == NEG_INF
    assert Poly1.const(7).degree() == 0
    x = Poly1.x()
    p = x * x + 2 * x + 1
    assert p.degree() == 2
    assert p == (x + 1) * (x + 1)
    assert (p - p).degree() == NEG_INF
    assert p.eval_scalar(Fraction(1, 2)) == RationalComplex(Fraction(9, 4))


def test_poly1_ring_axioms_random():
    rng = random.Random(101)
    for _ in range(50):
        a, b, c = (_rand_poly1(rng) for _ in range(3))
        assert a * (b + c) == a * b + a * c
        assert (a * b) * c == a * (b * c)
        assert a + b == b + a
        assert a * b == b * a


def test_polyn_parse_example():
    p = parse_poly("2*x*y - 1", ["x", "y"])
    assert p == PolyN(2, {(1, 1): 2, (0, 0): -1})


def test_parse_rationals_decimals_imag():
    assert parse_scalar("3/4") == RationalComplex(Fraction(3, 4))
    assert parse_scalar("0.25") == RationalComplex(Fraction(1, 4))
    assert parse_scalar("1/2 + 3*i") == RationalComplex(Fraction(1, 2), 3)
    assert parse_scalar("-i") == RationalComplex(0, -1)
    assert parse_scalar("(1 + i)*(1 - i)") == RationalComplex(2)
    p = parse_poly("x^2/4 + (1/2 + i)*y", ["x", "y"])
    assert p.coeff((2, 0)) == RationalComplex(Fraction(1, 4))
    assert p.coeff((0, 1)) == RationalComplex(Fraction(1, 2), 1)


def test_parse_params_substitution():
    p = parse_poly("q*Y2 + C3", ["Y2"], params={"q": Fraction(1, 2), "C3": 3})
    assert p == PolyN(1, {(1,): Fraction(1, 2), (0,): 3})


def test_parse_errors_carry_position():
    with pytest.raises(ExprError) as err:
        parse_poly("x + * y", ["x", "y"])
    assert err.value.pos == 4
    with pytest.raises(ExprError) as err:
        parse_poly("x + beta", ["x", "y"])
    assert err.value.pos == 4
    with pytest.raises(ExprError):
        parse_poly("x/(y)", ["x", "y"])  # division only by constants
    with pytest.raises(ExprError):
        parse_poly("x^y", ["x", "y"])  # integer exponents only here
    with pytest.raises(ExprError):
        parse_poly("2x", ["x"])  # multiplication is explicit


def test_parse_print_round_trip_random():
    rng = random.Random(202)
    names = ["x", "y", "z"]
    for _ in range(120):
        p = _rand_polyn(rng, 3)
        assert parse_poly(p.to_text(names), names) == p
    for _ in range(60):
        p = _rand_poly1(rng)
        text = p.to_text("H")
        q = parse_poly(text, ["H"])
        assert all(q.coeff((k,)) == p.coeff(k) for k in range(6))


def test_partial_examples():
    p = parse_poly("x^2*y + 3*y", ["x", "y"])
    assert partial(p, 0) == parse_poly("2*x*y", ["x", "y"])
    assert partial(p, 1) == parse_poly("x^2 + 3", ["x", "y"])
    # derivative is a ring derivation
    rng = random.Random(303)
    for _ in range(40):
        a = _rand_polyn(rng, 2)
        b = _rand_polyn(rng, 2)
        for i in range(2):
            assert partial(a * b, i) == partial(a, i) * b + a * partial(b, i)


def test_degree_profile():
    p = parse_poly("x*y^2 + x", ["x", "y"])
    assert degree_profile(p, {1}) == 2
    assert degree_profile(p, {0}) == 1
    assert degree_profile(p, {0, 1}) == 3
    assert degree_profile(PolyN.const(2, 7), {0, 1}) == 0
    assert degree_profile(PolyN.zero(2), {0}) == 0


def test_eval_matrix_multiplicative():
    rng = np.random.default_rng(404)
    sr = random.Random(405)
    for _ in range(20):
        p = _rand_poly1(sr, deg=4)
        q = _rand_poly1(sr, deg=4)
        M = rng.uniform(-1, 1, (6, 6)) + 1j * rng.uniform(-1, 1, (6, 6))
        lhs = eval_matrix(p * q, M)
        rhs = eval_matrix(p, M) @ eval_matrix(q, M)
        scale = max(np.linalg.norm(rhs), 1e-30)
        assert np.linalg.norm(lhs - rhs) / scale < 1e-12


def test_eval_matrix_constant_and_zero():
    M = np.arange(9, dtype=float).reshape(3, 3)
    assert np.array_equal(eval_matrix(Poly1.const(7), M), 7 * np.eye(3))
    assert np.array_equal(eval_matrix(Poly1.zero(), M), np.zeros((3, 3)))


def test_polyn_eval_paths_agree():
    rng = random.Random(506)
    for _ in range(30):
        p = _rand_polyn(rng, 3)
        pt = [_rand_scalar(rng, 2) for _ in range(3)]
        exact = complex(p.eval_exact(pt))
        approx = p.eval_complex([complex(v) for v in pt])
        assert abs(exact - approx) <= 1e-9 * max(1.0, abs(exact))


def test_qs_exponent_in_scalar_env():
    env = {"q": Fraction(1, 2), "s": 3}
    assert parse_scalar("q^s", env) == RationalComplex(Fraction(1, 8))
    assert parse_scalar("2*q^s + s^2", env) == RationalComplex(Fraction(37, 4))
