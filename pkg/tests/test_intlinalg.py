from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from kgtwist.intlinalg import matmul, smith_normal_form


def _det(m):
    return int(Matrix(m).det()) if m else 1


def _check(a):
    snf = smith_normal_form(a)
    assert matmul(matmul(snf.left, a), snf.right) == snf.diag
    assert abs(_det(snf.left)) == 1 and abs(_det(snf.right)) == 1
    d = snf.invariant_factors
    assert all(x > 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
    for i, row in enumerate(snf.diag):
        for j, x in enumerate(row):
            if i != j or i >= snf.rank:
                assert x == 0
    return snf


def test_known_example():
    snf = _check([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert snf.invariant_factors == [2, 6, 12]


def test_zero_and_empty():
    assert _check([[0, 0], [0, 0]]).rank == 0
    snf = smith_normal_form([], 0, 3)
    assert snf.rank == 0 and snf.right == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=m, max_size=m)))


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_agrees_with_sympy(a):
    snf = _check(a)
    ref = sympy_snf(Matrix(a), domain=ZZ)
    ref_diag = [abs(int(ref[i, i])) for i in range(min(ref.shape)) if ref[i, i] != 0]
    assert snf.invariant_factors == ref_diag
