import random
from fractions import Fraction

import pytest
import sympy
from sympy.polys.subresultants_qq_zz import sylvester
from hypothesis import given, settings, strategies as st

from fanfire.poly import BiPoly, PolyError, UPoly, rational_roots, resultant, strip_roots, sylvester_det, ugcd

X, Y = sympy.symbols("x y")


def rand_coeffs(rng, deg, lo=-5, hi=5):
    c = [Fraction(rng.randint(lo, hi), rng.randint(1, 3)) for _ in range(deg)]
    lead = 0
    while lead == 0:
        lead = rng.randint(lo, hi)
    return c + [Fraction(lead)]


def sympy_sylvester(a, b):
    pa = sympy.Poly(list(reversed([sympy.Rational(v.numerator, v.denominator) for v in a])), X)
    pb = sympy.Poly(list(reversed([sympy.Rational(v.numerator, v.denominator) for v in b])), X)
    return Fraction(str(sympy.Matrix(sylvester(pa.as_expr(), pb.as_expr(), X, 1)).det()))


@pytest.mark.parametrize("seed", range(60))
def test_resultant_equals_sylvester_determinant(seed):
    rng = random.Random(seed)
    a = rand_coeffs(rng, rng.randint(1, 4))
    b = rand_coeffs(rng, rng.randint(1, 4))
    r = resultant(a, b)
    assert r == sympy_sylvester(a, b)
    assert r == sylvester_det(a, b)


def test_resultant_common_root_vanishes():
    a = (UPoly([-1, 1]) * UPoly([2, 0, 1])).c
    b = (UPoly([-1, 1]) * UPoly([5, 3])).c
    assert resultant(a, b) == 0


def test_resultant_constants():
    assert resultant([Fraction(3)], [Fraction(1), Fraction(2), Fraction(1)]) == 9
    assert resultant([], [Fraction(1), Fraction(1)]) == 0


@pytest.mark.parametrize("seed", range(15))
def test_bivariate_resultant_matches_sympy(seed):
    rng = random.Random(1000 + seed)

    def rand_bi():
        terms = {}
        for _ in range(rng.randint(2, 5)):
            terms[(rng.randint(0, 2), rng.randint(0, 3))] = rng.randint(-3, 3)
        terms[(0, rng.randint(1, 3))] = rng.choice([1, 2, -1])
        return BiPoly(terms)

    f, g = rand_bi(), rand_bi()
    fy, gy = f.as_y_poly(), g.as_y_poly()
    while fy and fy[-1].is_zero():
        fy.pop()
    while gy and gy[-1].is_zero():
        gy.pop()
    ours = resultant(fy, gy, UPoly.const(1))

    def to_sym(p):
        return sum(sympy.Rational(v.numerator, v.denominator) * X**i * Y**j for (i, j), v in p.terms.items())

    # sympy.resultant may return the (-1)**(deg f * deg g) swapped value, so use the matrix itself
    theirs = sympy.Poly(sympy.expand(sympy.Matrix(sylvester(to_sym(f), to_sym(g), Y, 1)).det()), X)
    expected = UPoly([Fraction(str(c)) for c in reversed(theirs.all_coeffs())])
    assert ours == expected


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=6), st.lists(st.integers(-6, 6), min_size=1, max_size=6))
def test_gcd_matches_sympy(ca, cb):
    a, b = UPoly(ca), UPoly(cb)
    if a.is_zero() and b.is_zero():
        return
    g = ugcd(a, b)
    sg = sympy.Poly(list(reversed(ca)), X).gcd(sympy.Poly(list(reversed(cb)), X))
    expected = UPoly([Fraction(str(c)) for c in reversed(sg.monic().all_coeffs())])
    assert g == expected


@settings(max_examples=80, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=4), min_size=1, max_size=4), st.integers(-3, 3))
def test_rational_roots_of_built_polynomials(roots, k):
    p = UPoly([k or 1])
    for r in roots:
        p = p * UPoly([-r, 1])
    p = p * UPoly([1, 0, 1])  # no rational roots here
    assert rational_roots(p) == sorted(set(roots))
    assert strip_roots(p, set(roots)).deg == 2


def test_upoly_arithmetic():
    p = UPoly([1, 2, 3])
    q, r = p.divmod(UPoly([1, 1]))
    assert q * UPoly([1, 1]) + r == p
    assert p.derivative() == UPoly([2, 6])
    assert p(Fraction(1, 2)) == Fraction(1) + 1 + Fraction(3, 4)
    assert (p ** 2) / p == p


def test_bipoly_shear_and_json():
    f = BiPoly({(2, 0): 1, (0, 2): 1, (0, 0): -1})
    back = BiPoly.from_json(f.to_json())
    assert back == f
    g = f.shear(1)  # (x+y)^2 + y^2 - 1
    assert g == BiPoly({(2, 0): 1, (1, 1): 2, (0, 2): 2, (0, 0): -1})
    assert f.top_form_at(1) == 2


def test_bipoly_rejects_bad_coefficients():
    with pytest.raises(PolyError):
        BiPoly.from_json([{"coeff": "1/0", "xexp": 0, "yexp": 0}])
    with pytest.raises(PolyError):
        BiPoly.from_json([{"coeff": 1.5, "xexp": 0, "yexp": 0}])
