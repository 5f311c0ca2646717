import random
from fractions import Fraction

import pytest

from quasilin.ncrewrite import (
    NcExpression,
    RewriteBudgetError,
    RewriteSystem,
    ad_power_nf,
    commutator_nf,
    normal_form,
    parse_nc,
)
from quasilin.poly import RationalComplex

Q_VALUES = [Fraction(1, 2), Fraction(2), Fraction(-1, 3)]


def _word(*names):
    return NcExpression.word(names)


def test_qosc_two_step_rewrite():
    # X*Y*Y -> q^2*Y*Y*X + (q+1)*Y, worked out by hand in two rule firings
    q = Fraction(1, 2)
    rs = RewriteSystem.q_oscillator(q)
    got = normal_form(_word("X", "Y", "Y"), rs)
    want = NcExpression({("Y", "Y", "X"): q * q, ("Y",): q + 1})
    assert got == want


def test_qosc_ad_power_closed_form():
    # ad_Y^n X = w^n Y^n X - w^(n-1) Y^(n-1) with w = 1 - q, exact for n=1..8
    for q in Q_VALUES:
        rs = RewriteSystem.q_oscillator(q)
        w = RationalComplex(1 - q)
        X = NcExpression.gen("X")
        for n in range(1, 9):
            got = ad_power_nf("Y", X, n, rs)
            want = NcExpression(
                {
                    ("Y",) * n + ("X",): w**n,
                    ("Y",) * (n - 1): -(w ** (n - 1)),
                }
            )
            assert got == want, (q, n)


def test_weyl_has_no_constant_tail():
    rs = RewriteSystem.weyl(Fraction(1, 2))
    got = commutator_nf(NcExpression.gen("Y"), NcExpression.gen("X"), rs)
    assert got == NcExpression({("Y", "X"): Fraction(1, 2)})


def test_aw_first_commutator():
    q, C1, C2, C3 = Fraction(1, 2), 2, 5, 3
    rs = RewriteSystem.aw_z(q, C1, C2, C3)
    got = commutator_nf(NcExpression.gen("Y"), NcExpression.gen("X"), rs)
    want = NcExpression({("Y", "X"): 1 - q, ("Z",): -1, (): -C3})
    assert got == want


def test_aw_second_ad_power_frozen():
    # hand-derived at q=1/2, C1=2, C3=3:
    # ad_Y^2 X = (1/4) Y Y X - 2 X + (1/2) Y Z - (3/2) Y - 4
    rs = RewriteSystem.aw_z(Fraction(1, 2), 2, 5, 3)
    got = ad_power_nf("Y", NcExpression.gen("X"), 2, rs)
    want = NcExpression(
        {
            ("Y", "Y", "X"): Fraction(1, 4),
            ("X",): -2,
            ("Y", "Z"): Fraction(1, 2),
            ("Y",): Fraction(-3, 2),
            (): -4,
        }
    )
    assert got == want


def _random_expression(rng, gens, max_len=5, nterms=3):
    e = NcExpression.zero()
    for _ in range(nterms):
        k = rng.randint(0, max_len)
        w = tuple(rng.choice(gens) for _ in range(k))
        c = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        if c:
            e = e + NcExpression({w: c})
    return e


def test_confluence_leftmost_vs_rightmost():
    rs = RewriteSystem.aw_z(Fraction(1, 2), 1, 1, 1)
    gens = ["Y", "Z", "X"]
    rng = random.Random(77)
    for _ in range(500):
        e = _random_expression(rng, gens)
        left = normal_form(e, rs, strategy="leftmost")
        right = normal_form(e, rs, strategy="rightmost")
        assert left == right
        # a normal form is a fixed point
        assert normal_form(left, rs) == left


def test_normal_form_is_linear():
    rs = RewriteSystem.aw_z(Fraction(1, 3), 1, 2, 3)
    rng = random.Random(78)
    for _ in range(60):
        a = _random_expression(rng, ["Y", "Z", "X"])
        b = _random_expression(rng, ["Y", "Z", "X"])
        s = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        lhs = normal_form(a * s + b, rs)
        rhs = normal_form(a, rs) * s + normal_form(b, rs)
        assert lhs == rhs


def test_budget_exhaustion_raises():
    rs = RewriteSystem.aw_z(Fraction(1, 2), 1, 1, 1)
    deep = NcExpression.word(("X",) * 4 + ("Y",) * 4)
    with pytest.raises(RewriteBudgetError):
        normal_form(deep, rs, budget=3)


def test_rule_shape_validation():
    ok = NcExpression({("Y", "X"): Fraction(1, 2), (): 1})
    bad_pair = {("Y", "X"): ok}  # (Y, X) is already in order
    with pytest.raises(ValueError):
        RewriteSystem(("Y", "X"), bad_pair)
    with pytest.raises(ValueError):
        RewriteSystem(("Y", "X"), {})  # missing rule for (X, Y)
    cubic = NcExpression({("Y", "Y", "X"): 1})
    with pytest.raises(ValueError):
        RewriteSystem(("Y", "X"), {("X", "Y"): cubic})
    wrong_swap = NcExpression({("X", "Y"): 1})
    with pytest.raises(ValueError):
        RewriteSystem(("Y", "X"), {("X", "Y"): wrong_swap})


def test_parse_nc_order_and_params():
    e = parse_nc("q*Y*X + Z + C3", ["X", "Y", "Z"], params={"q": Fraction(1, 2), "C3": 3})
    assert e == NcExpression({("Y", "X"): Fraction(1, 2), ("Z",): 1, (): 3})
    comm = parse_nc("X*Y - Y*X", ["X", "Y"])
    assert not comm.is_zero()
    assert parse_nc("(X + Y)^2", ["X", "Y"]) == NcExpression(
        {("X", "X"): 1, ("X", "Y"): 1, ("Y", "X"): 1, ("Y", "Y"): 1}
    )


def test_unknown_generator_rejected():
    rs = RewriteSystem.q_oscillator(Fraction(1, 2))
    with pytest.raises(ValueError):
        normal_form(NcExpression.gen("Q"), rs)
