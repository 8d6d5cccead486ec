from fractions import Fraction as F

import pytest
import sympy

from twistvoa.blocks import (
    Functional,
    TensorState,
    abelian_check,
    act_on_tensor,
    coinvariant_dims,
    coinvariant_solver,
    find_witness,
    heisenberg_slots,
    invariance_check,
    parity_annihilation_check,
    residue_sum_check,
    stabilized_dims,
    tensor_basis,
    vacuum_propagation_check,
)
from twistvoa.curve import MarkedPoint, RationalFunction, odd_function_basis, two_branch_config
from twistvoa.scalars import Surd

R = RationalFunction
HALF = F(1, 2)


def base(D=2, P=5):
    return two_branch_config(degree_cutoff=D, pole_bound=P)


def with_charge(cfg, lam, s=4):
    return cfg.with_point(MarkedPoint(F(s), "pi_lambda", lam))


def vac(cfg):
    return TensorState.vacuum(heisenberg_slots(cfg))


def to_sympy(c):
    if isinstance(c, Surd):
        return to_sympy(c.a) + to_sympy(c.b) * sympy.sqrt(c.d)
    return sympy.Rational(int(c.numerator), int(c.denominator))


def rank_oracle(cfg, D, P):
    """Graded dims of F_{<=D}/image from dense sympy ranks.

    dim(W cap F_{<=d}) = rank W - rank(projection of W to degrees > d).
    """
    slots = heisenberg_slots(cfg)
    sources = tensor_basis(slots, D)
    rows = []
    for f in odd_function_basis(cfg, P):
        for key, _ in sources:
            img = act_on_tensor(f, TensorState.basis_vector(key, slots), D)
            if not img.is_zero():
                rows.append(img.terms)
    cols = sorted({k for r in rows for k in r} | {k for k, _ in sources}, key=repr)
    deg = {k: sum((s.degree(x) for s, x in zip(slots, k)), F(0)) for k in cols}
    M = sympy.Matrix([[to_sympy(r.get(k, 0)) for k in cols] for r in rows])
    total = M.rank(simplify=True)
    grid = sorted({d for _, d in sources})

    def inside(d):
        above = [j for j, k in enumerate(cols) if deg[k] > d]
        return total - (M[:, above].rank(simplify=True) if above else 0)

    out, prev = {}, 0
    for d in grid:
        cur = inside(d)
        out[d] = sum(1 for _, e in sources if e == d) - (cur - prev)
        prev = cur
    return out


# -- the action ---------------------------------------------------------------------


def test_t_on_two_vacua():
    cfg = base()
    out = act_on_tensor(R.monomial(1, 1), vac(cfg))
    assert str(out) == "2*|0;tw> (x) b(-1/2)|0;tw>"


def test_inverse_t_on_two_vacua():
    cfg = base()
    assert str(act_on_tensor(R.monomial(1, -1), vac(cfg))) == "2*b(-1/2)|0;tw> (x) |0;tw>"


def test_even_function_acts_by_zero():
    cfg = with_charge(base(), F(1))
    for f in (R.monomial(1, 2), R.monomial(1, -2), R((1,), (-4, 0, 1))):
        assert act_on_tensor(f, vac(cfg)).is_zero()


def test_parity_annihilation():
    assert parity_annihilation_check(base(), 7, 2)
    assert parity_annihilation_check(with_charge(base(), Surd(0, 1, 2)), 5, 2)


def test_odd_generators_commute():
    assert abelian_check(base(), 3, 2)
    assert abelian_check(with_charge(base(), F(1)), 2, 1)


def test_window_below_degree_rejected():
    cfg = base()
    v = TensorState.basis_vector(tensor_basis(heisenberg_slots(cfg), 1)[-1][0], heisenberg_slots(cfg))
    with pytest.raises(ValueError, match="window"):
        act_on_tensor(R.monomial(1, 1), v, window=0)


# -- coinvariants ------------------------------------------------------------------------


def test_degree_zero():
    assert coinvariant_dims(base(), 0).dims == {0: 1}


def test_two_twisted_points_table():
    t = coinvariant_dims(base(3, 5), 3)
    assert t.stable
    assert t.dims[0] == 1
    assert t.dims == t.next_dims


@pytest.mark.parametrize(
    "cfg",
    [base(), with_charge(base(), F(0)), with_charge(base(), F(1)), with_charge(base(), Surd(0, 1, 2))],
    ids=["branch-only", "lam=0", "lam=1", "lam=sqrt2"],
)
@pytest.mark.parametrize("P", [1, 3])
def test_dims_match_rank_oracle(cfg, P):
    solver = coinvariant_solver(cfg, 2 if len(cfg.marked) == 2 else 1, P)
    assert solver.dims() == rank_oracle(cfg, solver.D, P)


def test_stabilization_search():
    t = stabilized_dims(base(2), 2, start=1)
    assert t.stable and t.pole_bound <= 5


def test_vacuum_propagation():
    assert vacuum_propagation_check(base(3), F(1), 3)
    assert vacuum_propagation_check(base(2), [F(1), F(4)], 2)


def test_vacuum_propagation_three_points():
    assert vacuum_propagation_check(with_charge(base(), Surd(0, 1, 2)), F(1), 2)


def test_memory_guard_marks_partial():
    t = coinvariant_dims(base(3), 3, 5, max_sources=10)
    assert t.partial
    assert t.source_degree < 3


# -- residue sums ----------------------------------------------------------------------


def test_residue_sum_equals_pairing():
    cfg = with_charge(base(), F(1))
    slots = heisenberg_slots(cfg)
    basis = tensor_basis(slots, 1)
    phi = Functional.coefficient(basis[1][0])
    for f in odd_function_basis(cfg, 2):
        for key, _ in basis:
            assert residue_sum_check(f, TensorState.basis_vector(key, slots), phi)


def test_quotient_functionals_are_invariant():
    for cfg in (base(), with_charge(base(1), Surd(0, 1, 2))):
        solver = coinvariant_solver(cfg, pole_bound=5)
        assert invariance_check(solver, odd_function_basis(cfg, 5))


def test_non_invariant_functional_has_witness():
    cfg = base()
    solver = coinvariant_solver(cfg, pole_bound=5)
    funcs = odd_function_basis(cfg, 5)
    phi = Functional.coefficient(((-1,), ()))  # b(-1/2)|0> (x) |0>
    hit = find_witness(solver, funcs, phi)
    assert hit is not None
    f, v, r = hit
    assert r != 0
    assert not invariance_check(solver, funcs, [phi])


def test_even_functions_give_zero_residue_sum():
    cfg = base()
    solver = coinvariant_solver(cfg, pole_bound=3)
    phi = Functional.coefficient(((-1,), ()))
    assert find_witness(solver, [R.monomial(1, 2), R.monomial(1, -4)], phi) is None
