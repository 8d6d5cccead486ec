from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twistvoa.series import (
    FracSeries,
    IndeterminateError,
    delta_coefficients,
    format_series,
    parse_series,
)

HALF = F(1, 2)


def s(terms, denom=2, lo=None, hi=None):
    return FracSeries(terms, denom, lo, hi)


# -- arithmetic ------------------------------------------------------------------


def test_additive_inverse():
    assert (s({HALF: 1}) + s({HALF: -1})).is_zero()


def test_sum_mixes_integer_and_half_exponents():
    assert s({0: 1, 1: 1}) + s({HALF: 1}) == s({0: 1, HALF: 1, 1: 1})


def test_sum_window_is_intersection():
    out = s({0: 1}, 1, -1, 3) + s({1: 1}, 1, 0, 2)
    assert (out.lo, out.hi) == (0, 2)


def test_mismatched_denominators_rejected():
    with pytest.raises(ValueError):
        s({0: 1}, 1) + s({HALF: 1}, 2)


def test_products():
    assert s({HALF: 1}) * s({HALF: 1}) == s({1: 1})
    assert s({0: 1, 1: 1}, 1) * s({0: 1, 1: -1}, 1) == s({0: 1, 2: -1}, 1)


def test_product_window_shift():
    geo = s({k: 1 for k in range(4)}, 1, 0, 3)
    out = geo * s({-1: 1}, 1)
    assert out == s({-1: 1, 0: 1, 1: 1, 2: 1}, 1, -1, 2)


def test_derivatives():
    assert s({HALF: 1}).derivative() == s({-HALF: HALF})
    assert s({0: 7}).derivative().is_zero()
    assert s({F(-3, 2): 1}).derivative() == s({F(-5, 2): F(-3, 2)})


def test_residue():
    assert s({-1: 3, -HALF: 1}).residue() == 3
    assert s({0: 1}).residue() == 0


def test_residue_outside_window():
    with pytest.raises(IndeterminateError, match="indeterminate residue"):
        s({0: 1}, 1, 0, 3).residue()


def test_compose_examples():
    rho = s({HALF: 1, 1: 1})
    assert s({1: 1}, 1).compose(rho) == rho
    assert s({2: 1}, 1).compose(rho) == s({1: 1, F(3, 2): 2, 2: 1})


def test_compose_rejects_nonpositive_inner():
    with pytest.raises(ValueError):
        s({2: 1}, 1).compose(s({0: 1, 1: 1}, 1))


def test_power_keeps_exact_coefficients():
    out = s({HALF: 1, F(3, 2): 1}).power(2)
    assert all(isinstance(c, F) for c in out.terms.values())


def test_text_round_trip():
    text = "3/2*z^(-1/2) + z^(1) @window[-1/2,4]"
    assert format_series(parse_series(text)) == text


# -- properties ------------------------------------------------------------------

exps = st.integers(-6, 6).map(lambda n: F(n, 2))
coefs = st.fractions(min_value=-9, max_value=9, max_denominator=6)
series = st.dictionaries(exps, coefs, max_size=5).map(lambda d: FracSeries(d, 2))


@given(series, series)
def test_product_commutes(a, b):
    assert a * b == b * a


@given(series, series, series)
@settings(max_examples=50)
def test_product_distributes(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(series)
def test_residue_of_derivative_vanishes(a):
    assert a.derivative().residue() == 0


@given(series)
def test_format_parse_round_trip(a):
    assert parse_series(format_series(a), 2) == a


@given(st.lists(coefs.filter(lambda c: c != 0), min_size=1, max_size=3), st.integers(1, 3))
@settings(max_examples=40)
def test_compose_monomial_is_power(cs, n):
    inner = FracSeries({F(2 * k + 1, 2): c for k, c in enumerate(cs)}, 2)
    outer = FracSeries({n: 1}, 1)
    assert outer.compose(inner) == inner.power(n)


# -- Delta_z coefficients ----------------------------------------------------------


def _sympy_oracle(order):
    x, y = sympy.symbols("x y")
    g = -sympy.log((sympy.sqrt(1 + x) + sympy.sqrt(1 + y)) / 2)
    out = {}
    for m in range(order + 1):
        dm = sympy.diff(g, x, m) if m else g
        for n in range(order + 1 - m):
            d = sympy.diff(dm, y, n) if n else dm
            val = sympy.nsimplify(d.subs({x: 0, y: 0})) / (sympy.factorial(m) * sympy.factorial(n))
            out[(m, n)] = F(int(sympy.numer(val)), int(sympy.denom(val)))
    return out


def test_delta_named_values():
    c = delta_coefficients(2)
    assert c[0, 0] == 0
    assert c[1, 0] == c[0, 1] == F(-1, 4)
    assert c[1, 1] == F(1, 16)


def test_delta_matches_taylor_oracle_through_degree_8():
    c = delta_coefficients(8)
    oracle = _sympy_oracle(8)
    for (m, n), v in oracle.items():
        assert c[m, n] == v, (m, n)
        assert c[m, n] == c[n, m]


def test_delta_negative_order():
    with pytest.raises(ValueError):
        delta_coefficients(-1)


def test_delta_beyond_order_is_indeterminate():
    with pytest.raises(IndeterminateError):
        delta_coefficients(2)[2, 1]
