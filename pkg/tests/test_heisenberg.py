from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistvoa.heisenberg import (
    ONE,
    TWISTED,
    VACUUM_SECTOR,
    FockVector,
    apply_mode,
    basis_upto,
    commutator_check,
    delta_operator,
    format_fock,
    mode_support_check,
    omega,
    parse_fock,
    s_sigma,
    sigma,
    ta_lemma_check,
    translation,
    untwisted,
    vertex_mode,
    virasoro,
    wick_field_mode,
)

HALF = F(1, 2)
TW0 = FockVector.vacuum(TWISTED)
VAC = FockVector.vacuum()


def states(deg):
    return [FockVector._raw({m: ONE}, VACUUM_SECTOR) for m in basis_upto(VACUUM_SECTOR, deg)]


# -- modes on Fock spaces ----------------------------------------------------------


def test_twisted_central_term():
    assert apply_mode(HALF, apply_mode(-HALF, TW0)) == HALF * TW0


def test_annihilator_kills_vacuum():
    assert apply_mode(1, VAC).is_zero()


def test_zero_mode_is_charge():
    lam = FockVector.vacuum(untwisted(F(3)))
    assert apply_mode(0, lam) == 3 * lam


def test_wrong_sector_modes_rejected():
    with pytest.raises(ValueError):
        apply_mode(HALF, VAC)
    with pytest.raises(ValueError):
        apply_mode(1, TW0)
    with pytest.raises(ValueError):
        FockVector({(-HALF,): 1})


def test_parse_format_round_trip():
    for text in ("b(-2)*b(-1)^2|0>", "1/2*b(-1/2)^3|0;tw>", "|lam=3>"):
        assert format_fock(parse_fock(text)) == text


# -- fields ------------------------------------------------------------------------


def test_vacuum_field_is_identity():
    for v in [TW0, parse_fock("b(-3/2)*b(-1/2)|0;tw>"), parse_fock("b(-2)|0>")]:
        assert vertex_mode(VAC, -1, v) == v
        for n in (-3, -2, 0, 1, 2):
            assert vertex_mode(VAC, n, v).is_zero()


def test_creation_state_recovered():
    b1 = parse_fock("b(-1)|0>")
    assert vertex_mode(b1, -1, VAC) == b1


def test_w_of_vacuum_and_current():
    assert wick_field_mode((), -1, TW0) == TW0
    # W(b_(-1)|0>, z) = b(z^(1/2)): its (n)-mode is b_n
    v = parse_fock("b(-1/2)|0;tw>")
    for n in (F(-3, 2), -HALF, HALF, F(3, 2)):
        assert wick_field_mode((-1,), n, v) == apply_mode(n, v)


def test_w_quadratic_coefficients():
    # z^(-1) coefficient of W(b_(-1)^2, z) on the twisted vacuum is b_(-1/2)^2,
    # the z^(-2) coefficient vanishes
    assert wick_field_mode((-1, -1), 0, TW0) == parse_fock("b(-1/2)^2|0;tw>")
    assert wick_field_mode((-1, -1), 1, TW0).is_zero()


def test_w_rejects_positive_modes():
    with pytest.raises(ValueError):
        wick_field_mode((1,), 0, TW0)


def test_exp_delta():
    assert delta_operator(VAC).terms == {0: VAC}
    b1 = parse_fock("b(-1)|0>")
    assert delta_operator(b1).terms == {0: b1}
    half_sq = parse_fock("1/2*b(-1)^2|0>")
    assert delta_operator(half_sq).terms == {0: half_sq, -2: F(1, 16) * VAC}


def test_twisted_vacuum_weight():
    assert vertex_mode(omega(), 1, TW0) == F(1, 16) * TW0
    assert virasoro(0, TW0) == F(1, 16) * TW0


def test_virasoro_zero_mode():
    b1 = parse_fock("b(-1)|0>")
    assert virasoro(0, b1) == b1
    lam = FockVector.vacuum(untwisted(F(3)))
    assert virasoro(0, lam) == F(9, 2) * lam


# -- identities ----------------------------------------------------------------------


def test_commutator_free_field_specialization():
    b1 = parse_fock("b(-1)|0>")
    assert commutator_check(b1, b1, HALF, -HALF, 4)
    assert commutator_check(b1, b1, F(3, 2), F(-3, 2), 4)


def test_commutator_with_vacuum():
    B = parse_fock("b(-2)*b(-1)|0>")
    assert commutator_check(VAC, B, 2, 1, 3)


def test_commutator_rejects_inadmissible_modes():
    b1 = parse_fock("b(-1)|0>")
    with pytest.raises(ValueError, match="not admissible"):
        commutator_check(b1, b1, 1, HALF, 2)


@pytest.mark.parametrize("B", ["b(-1)|0>", "b(-2)*b(-1)|0>", "1/2*b(-1)^2|0>", "b(-3)|0>"])
@pytest.mark.parametrize("k", [-2, -1, 0, 1])
def test_l0_commutator_specialization(B, k):
    B = parse_fock(B)
    k = k + HALF * B.parity()
    delta = B.max_degree()
    for v in (FockVector._raw({m: ONE}, TWISTED) for m in basis_upto(TWISTED, 3)):
        lhs = virasoro(0, vertex_mode(B, k, v)) - vertex_mode(B, k, virasoro(0, v))
        assert lhs == (delta - k - 1) * vertex_mode(B, k, v)


@given(st.sampled_from(states(3)), st.sampled_from(states(3)), st.integers(-4, 4), st.integers(-4, 4))
@settings(max_examples=60, deadline=None)
def test_commutator_random(A, B, m2, k2):
    m = F(2 * m2 + A.parity(), 2)
    k = F(2 * k2 + B.parity(), 2)
    assert commutator_check(A, B, m, k, 3)


def test_ta_lemma_small():
    for A in states(3):
        assert ta_lemma_check(A, 3)


def test_translation_is_l_minus_one():
    for A in states(3):
        assert translation(A) == virasoro(-1, A)


def test_mode_support_small():
    for A in states(4):
        assert mode_support_check(A, 4)


def test_sigma_is_parity():
    assert sigma(parse_fock("b(-2)*b(-1)|0>")) == parse_fock("b(-2)*b(-1)|0>")
    assert sigma(parse_fock("b(-1)|0>")) == -parse_fock("b(-1)|0>")
    assert s_sigma(parse_fock("b(-1/2)|0;tw>")) == -parse_fock("b(-1/2)|0;tw>")
    assert s_sigma(TW0) == TW0
