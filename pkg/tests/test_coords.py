from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twistvoa.coords import (
    CoordChange,
    DerElement,
    act_on_algebra,
    act_on_module,
    bivariate_expansion,
    compose_changes,
    exp_der,
    group_transform_check,
    infinitesimal_transform_check,
    invert_change,
    lie_algebra_iso,
    mu_map,
    primary_transform_check,
    s_sigma_conjugation_check,
)
from twistvoa.heisenberg import TWISTED, FockVector, omega, parse_fock
from twistvoa.series import FracSeries

C = CoordChange
B1 = parse_fock("b(-1)|0>")


def root(rho):
    return dict(rho.terms)


def test_mu_map():
    assert root(mu_map(C.scaling(-1))) == {1: 1}
    assert root(mu_map(C.identity())) == {1: 1}
    assert root(mu_map(C.from_coefficients([1, 1]))) == {1: 1, 2: 2, 3: 1}


def test_inverse_by_back_composition():
    rho = C.from_coefficients([1, 1])
    inv = invert_change(rho, 3)
    assert root(inv) == {1: 1, 3: -1, 5: 3}
    assert root(compose_changes(rho, inv, 3)) == {1: 1}


def test_inverse_matches_sympy_reversion():
    t, u = sympy.symbols("t u")
    rho = C.from_coefficients([1, F(2, 3), F(-1, 5)])
    inv = invert_change(rho, 4)
    # series reversion of t + 2/3 t^3 - 1/5 t^5 in the root variable
    g = sum(sympy.Rational(c.numerator, c.denominator) * u**m for m, c in root(inv).items())
    f = t + sympy.Rational(2, 3) * t**3 - sympy.Rational(1, 5) * t**5
    back = sympy.series(f.subs(t, g), u, 0, 9).removeO()
    assert sympy.expand(back) == u


def test_central_subgroup():
    assert root(compose_changes(C.scaling(-1), C.scaling(-1))) == {1: 1}


def test_zero_leading_rejected():
    with pytest.raises(ValueError):
        C.from_root({3: 1})


def test_lie_algebra_iso():
    assert lie_algebra_iso(DerElement.generator(0)) == FracSeries({1: 2}, 1)
    assert lie_algebra_iso(DerElement.generator(1)) == FracSeries({2: 2}, 1)
    assert lie_algebra_iso(DerElement.of({})).is_zero()


def test_module_action_examples():
    v = parse_fock("b(-1/2)|0;tw>")
    assert act_on_module(C.identity(), v) == v
    assert act_on_module(C.scaling(-1), v) == -v
    tw0 = FockVector.vacuum(TWISTED)
    assert act_on_module(exp_der(DerElement.of({1: 1}), 4), tw0) == tw0


def test_algebra_action_examples():
    A = parse_fock("b(-2)*b(-1)|0>")
    assert act_on_algebra(C.identity(1), A) == A
    assert act_on_algebra(C.scaling(2, 1), A) == F(1, 8) * A
    # z + z^2 + z^3 + z^4, a truncation of z/(1-z); b_(-1)|0> is primary
    assert act_on_algebra(C.from_root({1: 1, 2: 1, 3: 1, 4: 1}, 1), B1) == B1


def test_bivariate_expansion():
    one = FracSeries({0: 1}, 1)
    assert bivariate_expansion(C.identity(1)) == {1: one}
    assert bivariate_expansion({2: 1}) == {1: FracSeries({1: 2}, 1), 2: one}
    assert bivariate_expansion(C.from_root({1: 1, 2: 1}, 1)) == {1: FracSeries({0: 1, 1: 2}, 1), 2: one}


# -- transformation formulas ---------------------------------------------------------


@pytest.mark.parametrize("k", range(4))
@pytest.mark.parametrize("A", ["|0>", "b(-1)|0>", "1/2*b(-1)^2|0>", "b(-2)|0>"])
def test_infinitesimal(k, A):
    assert infinitesimal_transform_check(DerElement.generator(k), parse_fock(A), 3)


def test_infinitesimal_omega():
    assert infinitesimal_transform_check(DerElement.generator(1), omega(), 3)


def test_group_identity_and_sign():
    A = parse_fock("b(-2)*b(-1)|0>")
    assert group_transform_check(C.identity(), A, 3)
    assert group_transform_check(C.scaling(-1), A, 3)


def test_group_unipotent():
    assert group_transform_check(C.from_coefficients([1, 1]), B1, 3, 6)


def test_primary_law():
    assert primary_transform_check(C.identity(), B1, 3)
    # first terms of z^(1/2) (1+z)^(1/2)
    assert primary_transform_check(C.from_coefficients([1, F(1, 2), F(-1, 8)]), B1, 3)


def test_primary_rejects_omega():
    with pytest.raises(ValueError, match="not primary"):
        primary_transform_check(C.identity(), omega(), 2)


@given(st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=3), min_size=1, max_size=2))
@settings(max_examples=8, deadline=None)
def test_group_random_unipotent(tail):
    rho = C.from_coefficients([1] + tail)
    assert group_transform_check(rho, B1, 2, 4)


def test_s_sigma_conjugation():
    for A in ["b(-1)|0>", "b(-2)*b(-1)|0>", "1/2*b(-1)^2|0>", "b(-1)^3|0>"]:
        assert s_sigma_conjugation_check(parse_fock(A), 4)
