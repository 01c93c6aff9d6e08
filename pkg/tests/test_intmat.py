from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from fintopos import intmat

small_ints = st.integers(min_value=-6, max_value=6)


@st.composite
def matrices(draw, max_side=5):
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    return [[draw(small_ints) for _ in range(n)] for _ in range(m)]


def sympy_factors(A):
    D = smith_normal_form(Matrix(A), domain=ZZ)
    return sorted(abs(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0)


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_invariant_factors_match_sympy(A):
    assert sorted(intmat.invariant_factors(A)) == sympy_factors(A)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_invariant_factors_form_a_divisibility_chain(A):
    d = intmat.invariant_factors(A)
    assert all(x > 0 for x in d)
    assert all(b % a == 0 for a, b in zip(d, d[1:]))


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_smith_transforms_are_unimodular_and_diagonalize(A):
    n = len(A[0])
    D, U, Uinv, V = intmat.smith_with_transforms(A, n)
    m = len(A)
    assert intmat.matmul(intmat.matmul(U, A), V) == D
    assert intmat.matmul(U, Uinv) == intmat.identity(m)
    assert all(D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    assert abs(Matrix(V).det()) == 1


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_rank_and_kernel(A):
    n = len(A[0])
    assert intmat.rank(A) == Matrix(A).rank()
    K = intmat.kernel_basis(A, n)
    assert len(K) == n - intmat.rank(A)
    for v in K:
        assert all(sum(a * x for a, x in zip(row, v)) == 0 for row in A)


def test_lattice_quotient_of_z2_by_diagonal_twice():
    e1, e2 = {0: 1}, {1: 1}
    assert intmat.lattice_quotient([e1, e2], [{0: 2, 1: 2}], 2) == (1, [2])


def test_zero_matrix_has_no_factors():
    assert intmat.invariant_factors([[0, 0], [0, 0]]) == []
