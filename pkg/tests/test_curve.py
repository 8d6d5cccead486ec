from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twistvoa.curve import (
    INFINITY,
    ORIGIN,
    CoverConfig,
    MarkedPoint,
    RationalFunction,
    even_function_basis,
    in_function_space,
    laurent_expand_at,
    local_expansion,
    odd_function_basis,
    pole_order,
    principal_part_solve,
    two_branch_config,
)
from twistvoa.series import FracSeries

R = RationalFunction
T = R.monomial(1, 1)
TS = sympy.Symbol("t")
WS = sympy.Symbol("w")


def to_sympy(f):
    num = sum(sympy.Rational(c.numerator, c.denominator) * TS**i for i, c in enumerate(f.num))
    den = sum(sympy.Rational(c.numerator, c.denominator) * TS**i for i, c in enumerate(f.den))
    return num / den


def sympy_expansion(f, p, hi):
    """Laurent coefficients of f in the uniformizer at p, by sympy."""
    if p.t0 is None:
        sub = 1 / WS
    else:
        sub = p.t0 + p.sign * WS
    g = sympy.together(to_sympy(f).subs(TS, sub))
    ser = sympy.series(g, WS, 0, hi + 1).removeO()
    out = {}
    for term in sympy.Add.make_args(sympy.expand(ser)):
        c, e = term.as_coeff_exponent(WS)
        if c != 0:
            out[int(e)] = F(int(c.p), int(c.q))
    return out


def three_point(s=1, lam=0):
    return two_branch_config().with_point(MarkedPoint(F(s), "pi_lambda", F(lam)))


# -- rational functions ------------------------------------------------------------


def test_parity():
    assert T.parity() == "odd"
    assert R.monomial(1, 2).parity() == "even"
    assert (T + 1).parity() is None


def test_reflect_is_involution():
    f = R((1, 2, 3), (5, 0, 1))
    assert f.reflect().reflect() == f


def test_arithmetic_reduces():
    f = R.pole(1, 1) * R((-1, 1))
    assert f == R((1,))


# -- expansions ----------------------------------------------------------------------


def test_expansion_examples():
    assert laurent_expand_at(T, ORIGIN, 3).terms == {F(1, 2): 1}
    assert laurent_expand_at(R.monomial(1, -1), ORIGIN, 3).terms == {F(-1, 2): 1}
    p, q = three_point(4).marked[2].fiber()
    assert local_expansion(T, p, 3) == {0: 2, 1: 1}
    # companion coordinate w' = -t - 2
    assert local_expansion(T, q, 3) == {0: -2, 1: -1}
    assert local_expansion(T, INFINITY, 3) == {-1: 1}


def test_pole_orders():
    p, _ = three_point(1).marked[2].fiber()
    assert pole_order(R.pole(1, 3), p) == 3
    assert pole_order(R.monomial(1, 5), INFINITY) == 5
    assert pole_order(R.monomial(1, 5), ORIGIN) == 0


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@given(st.lists(rationals, min_size=1, max_size=4), st.integers(0, 2), st.integers(-2, 2))
@settings(max_examples=25, deadline=None)
def test_expansion_matches_sympy(num, pole, shift):
    f = R(num) * R.pole(1, pole) * R.monomial(1, shift)
    cfg = three_point(1)
    for p in [ORIGIN, INFINITY, *cfg.marked[2].fiber()]:
        assert local_expansion(f, p, 4) == sympy_expansion(f, p, 4)


# -- function spaces -----------------------------------------------------------------


def test_branch_only_basis():
    basis = odd_function_basis(two_branch_config(), 3)
    assert set(basis) == {R.monomial(1, j) for j in (-3, -1, 1, 3)}
    assert R.monomial(1, 2) not in basis
    assert not in_function_space(R.monomial(1, 2), two_branch_config(), "odd")


def test_unramified_point_adds_odd_combinations():
    basis = odd_function_basis(three_point(1), 2)
    assert R((0, 2), (-1, 0, 1)) in basis  # 2t/(t^2 - 1)
    assert all(f.parity() == "odd" for f in basis)
    assert all(f.parity() == "even" for f in even_function_basis(three_point(1), 2))


def test_functions_outside_allowed_poles():
    assert not in_function_space(R.pole(2, 1) - R.pole(-2, 1), three_point(1), "odd")


def test_principal_part_simple_pole():
    cfg = three_point(1)
    p, _ = cfg.marked[2].fiber()
    f = principal_part_solve(cfg, p, FracSeries({-1: 1}, 1))
    assert f.parity() == "odd"
    # the odd solution 1/(t-1) + 1/(t+1)
    assert f == R.pole(1, 1) + R.pole(-1, 1)
    exp = local_expansion(f, p, 0)
    assert {j: c for j, c in exp.items() if j < 0} == {-1: 1}


def test_principal_part_double_pole():
    cfg = three_point(4)
    p, _ = cfg.marked[2].fiber()
    f = principal_part_solve(cfg, p, FracSeries({-2: 3, -1: 1}, 1))
    assert f.parity() == "odd"
    exp = sympy_expansion(f, p, 0)
    assert {j: c for j, c in exp.items() if j < 0} == {-2: 3, -1: 1}


def test_principal_part_zero():
    cfg = three_point(1)
    p, _ = cfg.marked[2].fiber()
    assert principal_part_solve(cfg, p, FracSeries({}, 1)).is_zero()


def test_principal_part_at_branch_point_unsupported():
    with pytest.raises(ValueError):
        principal_part_solve(three_point(1), ORIGIN, FracSeries({-1: 1}, 1))


# -- configurations ------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError, match="branch points"):
        CoverConfig([MarkedPoint(F(0), "pi_sigma")])
    with pytest.raises(ValueError, match="square"):
        three_point(2)
    with pytest.raises(ValueError, match="twisted"):
        CoverConfig([MarkedPoint(F(0), "pi_lambda", F(0)), MarkedPoint(None, "pi_sigma")])


def test_config_schema_errors_carry_path():
    bad = {"marked": [{"s": "0", "module": "pi_sigma"}, {"s": "inf", "module": "bogus"}]}
    with pytest.raises(ValueError, match=r"config\.marked\[1\]\.module"):
        CoverConfig.from_dict(bad)
    with pytest.raises(ValueError, match=r"config\.marked\[0\]"):
        CoverConfig.from_dict({"marked": [{"s": "0"}]})


def test_config_from_json():
    cfg = CoverConfig.from_json(
        '{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"},'
        '{"s":"1","module":{"pi_lambda":"0"},"point":"+"}],"degree_cutoff":4,"pole_bound":7}'
    )
    assert cfg.degree_cutoff == 4 and cfg.pole_bound == 7
    assert [m.module for m in cfg.marked] == ["pi_sigma", "pi_sigma", "pi_lambda"]
    assert cfg.family == "heisenberg"
