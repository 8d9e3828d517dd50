from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psatz.exactlinalg import (
    InconsistentSystem,
    NotDecomposable,
    RatMatrix,
    adjugate,
    char_poly,
    det,
    elementary_symmetric,
    gauss_solve_affine,
    gram_to_sos,
    inverse,
    is_psd_exact,
    ldlt,
    nullspace,
    quadratic_form,
    rank,
)
from psatz.ratpoly import Monomial, Polynomial

import oracles

F = Fraction
one, yv = Monomial.one(), Monomial.var("y")
small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def symmetric(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    grid = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            grid[i][j] = grid[j][i] = draw(small)
    return RatMatrix(grid)


@st.composite
def gram_of(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, n))
    A = RatMatrix([[draw(small) for _ in range(n)] for _ in range(k)])
    return A.T @ A


class TestGauss:
    def test_unique(self):
        sol = gauss_solve_affine([[1, 1], [1, -1]], [1, 1])
        assert sol.particular == (1, 0) and sol.basis == ()

    def test_inconsistent(self):
        with pytest.raises(InconsistentSystem):
            gauss_solve_affine([[0]], [1])

    def test_free_columns(self):
        sol = gauss_solve_affine([[1, 2, 3]], [6])
        assert sol.particular == (6, 0, 0)
        assert sol.basis == ((-2, 1, 0), (-3, 0, 1))
        assert sol.free == (1, 2)

    @given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=4), st.lists(small, min_size=4, max_size=4))
    def test_solution_set(self, rows, x0):
        rhs = [sum((a * x for a, x in zip(r, x0)), F(0)) for r in rows]
        sol = gauss_solve_affine(rows, rhs)
        for v in [sol.particular] + [
            tuple(p + b for p, b in zip(sol.particular, vec)) for vec in sol.basis
        ]:
            assert [sum((a * x for a, x in zip(r, v)), F(0)) for r in rows] == rhs
        assert len(sol.basis) == 4 - rank(RatMatrix(rows))
        if sol.basis:
            assert rank(RatMatrix(list(sol.basis))) == len(sol.basis)


class TestCharPoly:
    def test_zero(self):
        assert char_poly(RatMatrix.zeros(2)) == [0, 0, 1]

    def test_rank_one_diag(self):
        # (X)(X)(X)(X - 2) = X^4 - 2 X^3
        assert char_poly(RatMatrix.diag([2, 0, 0, 0])) == [0, 0, 0, -2, 1]

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            char_poly(RatMatrix([[1, 2], [0, 1]]))

    @given(symmetric())
    def test_matches_sympy(self, M):
        assert char_poly(M) == oracles.charpoly_coeffs(M)

    @given(symmetric(max_n=3), symmetric(max_n=3), st.randoms(use_true_random=False))
    def test_hidden_blocks_match_sympy(self, A, B, rnd):
        M = RatMatrix.block_diag([A, B])
        perm = list(range(M.rows))
        rnd.shuffle(perm)
        P = RatMatrix([[M[i, j] for j in perm] for i in perm])
        assert char_poly(P) == oracles.charpoly_coeffs(P)

    @given(symmetric())
    def test_leading_coefficient(self, M):
        assert char_poly(M)[-1] == (-1) ** M.rows


class TestPsd:
    def test_rank_one(self):
        v = is_psd_exact(RatMatrix.diag([2, 0, 0, 0]))
        assert v.is_psd and v.kernel_dim == 3 and not v.positive_definite

    def test_indefinite(self):
        v = is_psd_exact(RatMatrix.diag([1, -1]))
        assert not v.is_psd and v.failing_index is not None

    def test_empty_matrix_is_psd(self):
        assert is_psd_exact(RatMatrix.zeros(0)).positive_definite

    @given(gram_of(max_n=4))
    def test_gram_matrices(self, M):
        v = is_psd_exact(M)
        assert v.is_psd
        assert v.kernel_dim == M.rows - rank(M)

    @given(symmetric())
    def test_agrees_with_sympy(self, M):
        assert is_psd_exact(M).is_psd == oracles.is_psd(M)

    @given(gram_of())
    def test_zero_prefix(self, M):
        seq = is_psd_exact(M).signs
        k = next((i for i, s in enumerate(seq) if s != 0), len(seq))
        assert all(s == 0 for s in seq[:k]) and all(s > 0 for s in seq[k:])


class TestLdlt:
    def test_diagonal(self):
        res = ldlt(RatMatrix.diag([F(2, 3), F(1, 3)]))
        assert res.U == RatMatrix.identity(2) and res.D == (F(2, 3), F(1, 3))

    def test_rank_one(self):
        res = ldlt(RatMatrix([[1, 1], [1, 1]]))
        assert res.U == RatMatrix([[1, 1], [0, 1]]) and res.D == (1, 0)
        assert res.reconstruct() == RatMatrix([[1, 1], [1, 1]])

    def test_indefinite(self):
        with pytest.raises(NotDecomposable) as info:
            ldlt(RatMatrix([[0, 1], [1, 0]]))
        assert info.value.index == 0

    @given(symmetric())
    def test_round_trip_when_decomposable(self, M):
        try:
            res = ldlt(M)
        except NotDecomposable:
            assert not oracles.is_psd(M)
            return
        assert res.reconstruct() == M
        for i in range(M.rows):
            assert res.U[i, i] == 1
            assert all(res.U[i, j] == 0 for j in range(i))


class TestSos:
    def test_witness_block(self):
        assert gram_to_sos(RatMatrix.diag([F(2, 3), F(1, 3)]), [one, yv]) == [
            (F(2, 3), Polynomial.constant(1)),
            (F(1, 3), Polynomial.var("y")),
        ]

    def test_zero(self):
        assert gram_to_sos(RatMatrix.zeros(3), [one, yv, yv * yv]) == []

    def test_rank_one(self):
        assert gram_to_sos(RatMatrix([[1, 1], [1, 1]]), [one, yv]) == [(1, 1 + Polynomial.var("y"))]

    def test_rejects_non_psd(self):
        with pytest.raises(ValueError):
            gram_to_sos(RatMatrix.diag([1, -1]), [one, yv])

    @given(gram_of(max_n=4))
    def test_expansion(self, Q):
        monos = [Monomial.var("x", k) for k in range(Q.rows)]
        total = Polynomial()
        for d, l in gram_to_sos(Q, monos):
            assert d > 0
            total = total + l * l * d
        assert total == quadratic_form(Q, monos)


class TestDeterminants:
    @given(symmetric())
    def test_det_matches_sympy(self, M):
        assert det(M) == oracles.det(M)

    @given(symmetric(max_n=4))
    def test_adjugate_identity(self, M):
        assert M @ adjugate(M) == RatMatrix.identity(M.rows).scale(det(M))

    def test_adjugate_of_rank_deficient(self):
        M = RatMatrix([[1, 1, 0], [1, 1, 0], [0, 0, 2]])
        assert adjugate(M) == RatMatrix([[2, -2, 0], [-2, 2, 0], [0, 0, 0]])
        assert adjugate(RatMatrix.zeros(3)) == RatMatrix.zeros(3)

    def test_inverse_and_nullspace(self):
        M = RatMatrix([[2, 1], [1, 1]])
        assert inverse(M) @ M == RatMatrix.identity(2)
        assert nullspace(RatMatrix([[1, 1], [1, 1]])) == [(-1, 1)]


@given(st.lists(st.fractions(min_value=0, max_value=10, max_denominator=7), min_size=1, max_size=6))
def test_elementary_symmetric_nonnegative(xs):
    sig = elementary_symmetric(xs)
    assert sig[0] == 1 and all(s >= 0 for s in sig)
    assert sig[1] == sum(xs)


@given(symmetric())
def test_float_view(M):
    assert np.allclose(M.to_float(), M.to_float().T)
