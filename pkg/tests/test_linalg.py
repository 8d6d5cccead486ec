from fractions import Fraction as F

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from twistvoa.linalg import Echelon, null_space, rank

entries = st.fractions(min_value=-3, max_value=3, max_denominator=2)
matrices = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(entries, min_size=n, max_size=n), min_size=1, max_size=6)
)


def rows_of(m):
    return [{j: c for j, c in enumerate(r) if c} for r in m]


@given(matrices)
@settings(max_examples=80)
def test_rank_matches_sympy(m):
    assert rank(rows_of(m)) == sympy.Matrix(m).rank()


@given(matrices)
@settings(max_examples=60)
def test_null_space_is_kernel(m):
    cols = list(range(len(m[0])))
    basis = null_space(rows_of(m), cols)
    assert len(basis) == len(cols) - sympy.Matrix(m).rank()
    for vec in basis:
        for r in m:
            assert sum(r[j] * vec.get(j, 0) for j in cols) == 0


def test_pivot_is_highest_column():
    e = Echelon(lambda c: c)
    assert e.add({0: 1, 3: 2}) == 3
    assert e.add({0: 2, 3: 4}) is None
    assert e.add({1: 1, 3: 1}) == 1
    assert e.pivots == {3, 1}


def test_normal_form_and_membership():
    e = Echelon(lambda c: c)
    e.extend([{2: 1, 0: 1}, {1: 1}])
    assert e.contains({2: 3, 0: 3, 1: F(1, 2)})
    assert e.normal_form({2: 1}) == {0: -1}
