"""Acceptance suite: twelve exact checks, one PASS/FAIL line each.

Runs under pytest (``pytest tests/test_acceptance.py``) or as a script.
Every comparison is equality of exact rationals or surds.
"""

import sys
import time
from fractions import Fraction as F

import pytest
import sympy

from twistvoa.affine import AffineSector, g_out_closure_check, jacobi_check
from twistvoa.blocks import (
    Functional,
    coinvariant_solver,
    find_witness,
    invariance_check,
    parity_annihilation_check,
    stabilized_dims,
    vacuum_propagation_check,
)
from twistvoa.coords import (
    CoordChange,
    DerElement,
    group_transform_check,
    infinitesimal_transform_check,
    primary_transform_check,
    s_sigma_conjugation_check,
)
from twistvoa.curve import MarkedPoint, odd_function_basis, two_branch_config
from twistvoa.heisenberg import (
    ONE,
    TWISTED,
    VACUUM_SECTOR,
    FockVector,
    apply_mode,
    basis_upto,
    commutator_check,
    mode_support_check,
    omega,
    parse_fock,
    ta_lemma_check,
    vertex_mode,
    virasoro,
)
from twistvoa.scalars import Surd
from twistvoa.series import delta_coefficients

HALF = F(1, 2)


def states(deg):
    return [FockVector._raw({m: ONE}, VACUUM_SECTOR) for m in basis_upto(VACUUM_SECTOR, deg)]


def modes(parity, bound):
    n = int(bound) + 1
    return [F(2 * i + parity, 2) for i in range(-n, n + 1) if abs(F(2 * i + parity, 2)) <= bound]


# -- criteria -------------------------------------------------------------------------


def crit_1():
    x, y = sympy.symbols("x y")
    g = -sympy.log((sympy.sqrt(1 + x) + sympy.sqrt(1 + y)) / 2)
    order = 8
    t0 = time.perf_counter()
    c = delta_coefficients(order)
    elapsed = time.perf_counter() - t0
    bad = []
    for m in range(order + 1):
        gm = sympy.diff(g, x, m) if m else g
        for n in range(order + 1 - m):
            d = sympy.diff(gm, y, n) if n else gm
            v = d.subs({x: 0, y: 0}) / (sympy.factorial(m) * sympy.factorial(n))
            if c[m, n] != F(int(v.p), int(v.q)) or c[m, n] != c[n, m]:
                bad.append((m, n))
    named = c[0, 0] == 0 and c[1, 0] == c[0, 1] == F(-1, 4) and c[1, 1] == F(1, 16)
    if bad:
        return False, "mismatches %s" % bad
    return named, "45 coefficients agree; expansion took %.3fs" % elapsed


def crit_2():
    tw = FockVector.vacuum(TWISTED)
    got = vertex_mode(omega(), 1, tw)
    return got == F(1, 16) * tw, "L_0|0;tw> = %s" % got


def crit_3():
    total = 0
    for A in states(4):
        for B in states(4):
            for m in modes(A.parity(), F(7, 2)):
                for k in modes(B.parity(), F(7, 2)):
                    w = commutator_check(A, B, m, k, 4)
                    total += w.checked
                    if not w:
                        return False, "[%s_(%s), %s_(%s)]: %s" % (A, m, B, k, w.detail)
    # the two named specializations, directly
    tw_basis = [FockVector._raw({m: ONE}, TWISTED) for m in basis_upto(TWISTED, 4)]
    for m in modes(1, F(7, 2)):
        for k in modes(1, F(7, 2)):
            for v in tw_basis:
                lhs = apply_mode(m, apply_mode(k, v)) - apply_mode(k, apply_mode(m, v))
                if lhs != (m * v if m == -k else 0 * v):
                    return False, "[b_%s, b_%s] on %s" % (m, k, v)
    for B in states(4):
        delta = B.max_degree()
        for k in modes(B.parity(), F(7, 2)):
            for v in tw_basis:
                lhs = virasoro(0, vertex_mode(B, k, v)) - vertex_mode(B, k, virasoro(0, v))
                if lhs != (delta - k - 1) * vertex_mode(B, k, v):
                    return False, "[L_0, %s_(%s)] on %s" % (B, k, v)
    return True, "%d matrix coefficients" % total


def crit_4():
    return _all("TA", ((str(A), ta_lemma_check(A, 4)) for A in states(5)))


def crit_5():
    return _all("support", ((str(A), mode_support_check(A, 5)) for A in states(5)))


def crit_6():
    return _all(
        "infinitesimal",
        (
            ("k=%d A=%s" % (k, A), infinitesimal_transform_check(DerElement.generator(k), A, 3, 6))
            for k in range(4)
            for A in states(3)
        ),
    )


def crit_7():
    rhos = [CoordChange.from_coefficients([1, 1]), CoordChange.from_coefficients([1, HALF, F(-1, 8)])]
    group_states = [FockVector.vacuum(), parse_fock("b(-1)|0>"), omega()]
    ws = [("rho=%s A=%s" % (r, A), group_transform_check(r, A, 3, 6)) for r in rhos for A in group_states]
    ws += [("primary rho=%s" % r, primary_transform_check(r, parse_fock("b(-1)|0>"), 3, 6)) for r in rhos]
    return _all("transform", ws)


def crit_8():
    return _all("S_sigma", ((str(A), s_sigma_conjugation_check(A, 4)) for A in states(4)))


def crit_9():
    base = two_branch_config()
    cfgs = [
        base,
        base.with_point(MarkedPoint(F(1), "pi_lambda", F(0))),
        base.with_point(MarkedPoint(F(4), "pi_lambda", Surd(0, 1, 2))),
    ]
    return _all("parity", ((str(len(c.marked)), parity_annihilation_check(c, 7, 2)) for c in cfgs))


def crit_10():
    base = two_branch_config(degree_cutoff=3)
    ws = [("two twisted points", vacuum_propagation_check(base, F(1), 3))]
    for lam in (F(0), Surd(0, 1, 2)):
        cfg = base.with_point(MarkedPoint(F(4), "pi_lambda", lam))
        ws.append(("three points, lam=%s" % lam, vacuum_propagation_check(cfg, F(1), 3)))
    return _all("vacuum propagation", ws)


def crit_11():
    ws = []
    for cfg in (
        two_branch_config(degree_cutoff=2),
        two_branch_config(degree_cutoff=1).with_point(MarkedPoint(F(4), "pi_lambda", Surd(0, 1, 2))),
    ):
        for P in (1, 5):
            solver = coinvariant_solver(cfg, pole_bound=P)
            ws.append(("P=%d points=%d" % (P, len(cfg.marked)), invariance_check(solver, odd_function_basis(cfg, P))))
    ok, detail = _all("invariance", ws)
    # negative control: coefficient extraction of b(-1/2)|0> (x) |0>
    cfg = two_branch_config(degree_cutoff=2)
    solver = coinvariant_solver(cfg, pole_bound=5)
    hit = find_witness(solver, odd_function_basis(cfg, 5), Functional.coefficient(((-1,), ())))
    if hit is None:
        return False, "non-invariant functional produced no witness"
    return ok, detail + "; control witness f=%s residue %s" % (hit[0], hit[2])


def crit_12():
    ws = [(s, jacobi_check(AffineSector(tw, F(1)), 2)) for s, tw in (("untwisted", False), ("twisted", True))]
    cfg = two_branch_config("affine_twisted", F(1), degree_cutoff=2)
    ws.append(("g_out closure", g_out_closure_check(cfg, 5)))
    ok, detail = _all("affine", ws)
    if not ok:
        return ok, detail
    t = stabilized_dims(cfg, 2, start=1)
    if not t.stable:
        return False, "affine table did not stabilize"
    v = vacuum_propagation_check(cfg, F(1), 2)
    return bool(v), "stable at P=%d; with an extra V_k point: %s" % (t.pole_bound, v.detail)


def _all(label, witnesses):
    count = 0
    for name, w in witnesses:
        count += 1
        if not w:
            return False, "%s failed at %s: %s" % (label, name, w.detail)
    return True, "%d %s checks" % (count, label)


CRITERIA = [
    (1, "Delta_z coefficients match a Taylor oracle", crit_1),
    (2, "twisted vacuum weight 1/16", crit_2),
    (3, "commutator formula on the degree-4 slice", crit_3),
    (4, "Y(TA) = d/dz Y(A)", crit_4),
    (5, "mode support", crit_5),
    (6, "infinitesimal transformation", crit_6),
    (7, "group transformation and primary law", crit_7),
    (8, "S_sigma conjugation", crit_8),
    (9, "even functions act by zero", crit_9),
    (10, "vacuum propagation", crit_10),
    (11, "residue sums and invariance", crit_11),
    (12, "affine sector", crit_12),
]


def run(number, label, fn, out=sys.stdout):
    t0 = time.perf_counter()
    ok, detail = fn()
    out.write("%s %2d %s (%.1fs): %s\n" % ("PASS" if ok else "FAIL", number, label, time.perf_counter() - t0, detail))
    out.flush()
    return ok


@pytest.mark.parametrize("number,label,fn", CRITERIA, ids=["criterion_%02d" % c[0] for c in CRITERIA])
def test_criterion(number, label, fn, capsys):
    with capsys.disabled():
        sys.stdout.write("\n")
        ok = run(number, label, fn, sys.stdout)
    assert ok


if __name__ == "__main__":
    results = [run(*c) for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
