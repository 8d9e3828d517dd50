from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from psatz.exactlinalg import RatMatrix, is_psd_exact
from psatz.parse import parse_polynomial
from psatz.reduction import pencil_from_matrices, slice
from psatz.sdpnum import (
    SolveStatus,
    common_kernel,
    convergents,
    degeneracy_probe,
    denominator_ladder,
    rationalize,
    rationalize_one,
    slice_by_estimate,
    solve_feasibility,
    symbolic_determinant,
)
from psatz.verifier import verify_from_alpha

import cases
import oracles


def exact_check(pencil, alpha, max_den=10**6):
    """Rationalize on the denominator ladder until the pencil matrix is exactly PSD."""
    for den in denominator_ladder(max_den):
        point = rationalize(alpha, den)
        if is_psd_exact(pencil.matrix_at(point)).is_psd:
            return point
    return None


def random_interior_pencil(rng, n, m):
    """Pencil with a known point where the matrix is strictly diagonally dominant."""
    def sym():
        A = [[F(rng.randint(-5, 5)) for _ in range(n)] for _ in range(n)]
        return RatMatrix([[A[i][j] + A[j][i] for j in range(n)] for i in range(n)])

    basis = [sym() for _ in range(m)]
    star = [F(rng.randint(-20, 20), rng.randint(1, 4)) for _ in range(m)]
    D = [list(r) for r in sym()]
    D = RatMatrix([[D[i][j] if i != j else sum(abs(x) for x in D[i]) + 1 for j in range(n)] for i in range(n)])
    target = D
    for a, Fi in zip(star, basis):
        target = target - Fi.scale(a)
    return pencil_from_matrices(-target, basis)


class TestRationalize:
    @pytest.mark.parametrize(
        "x, max_den, expected",
        [(0.333333333, 10, F(1, 3)), (-0.2727272727, 20, F(-3, 11)), (78.99999999, 100, F(79))],
    )
    def test_examples(self, x, max_den, expected):
        assert rationalize_one(x, max_den) == expected

    def test_vector(self):
        assert rationalize([0.5, -2.0, 0.0], 4) == [F(1, 2), F(-2), F(0)]

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            rationalize_one(1.0, 0)
        with pytest.raises(ValueError):
            rationalize_one(float("nan"), 10)

    def test_convergents_of_derived_value(self):
        # continued fraction of 2727/10000 is [0; 3, 1, 2, 302, ...]
        got = list(convergents(F(2727, 10000)))[:4]
        assert got == [0, F(1, 3), F(1, 4), F(3, 11)]

    def test_ladder(self):
        assert denominator_ladder(10**3) == [1, 10, 100, 1000]
        assert denominator_ladder(50) == [1, 10, 50]
        assert denominator_ladder(1) == [1]

    @given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(1, 10**6))
    def test_convergent_bound(self, x, max_den):
        r = rationalize_one(x, max_den)
        assert r.denominator <= max_den
        if r.denominator > 1 or abs(F(x) - r) < 1:
            assert abs(F(x) - r) <= F(1, r.denominator**2)


class TestSolver:
    def test_rank_one_pencil_stalls(self):
        out = solve_feasibility(cases.pencil("rank_one"))
        assert out.status is SolveStatus.STALLED
        assert out.message == "terminated due to small steps"
        # the unique solution is an integer point, so rounding the stalled estimate finds it
        assert exact_check(cases.pencil("rank_one"), out.alpha) == [5, -7]

    def test_unsliced_two_var_stalls(self):
        pen = cases.pencil("two_var_basis")
        out = solve_feasibility(pen)
        assert out.status is SolveStatus.STALLED
        assert out.mu_trace and out.iterations == len(out.mu_trace)

    def test_full_segment_pencil_stalls_near_line(self):
        pen = cases.pencil("segment")
        out = solve_feasibility(pen)
        assert out.status is SolveStatus.STALLED
        assert 91 * (out.alpha[0] + out.alpha[2]) == pytest.approx(1811, abs=1e-2)
        assert out.alpha[1] == pytest.approx(-3 / 11, abs=1e-4)

    def test_homogeneous_pencil_stalls(self):
        out = solve_feasibility(cases.pencil("homogeneous"))
        assert out.status is SolveStatus.STALLED

    def test_sliced_two_var_recovers_certificate(self):
        pen = slice(cases.pencil("two_var_basis"), [-9, 1, 0], -10)
        out = solve_feasibility(pen)
        assert out.status is SolveStatus.FEASIBLE
        point = exact_check(pen, out.alpha)
        assert point is not None
        assert verify_from_alpha(pen, point, cases.problem("two_var")).valid

    def test_segment_line_is_feasible(self):
        pen = cases.pencil("segment")
        line = slice(slice(pen, [0, 1, 0], F(-3, 11)), [91, 91], 1811)
        out = solve_feasibility(line)
        assert out.status is SolveStatus.FEASIBLE
        assert exact_check(line, out.alpha) is not None

    def test_negative_definite_constant_is_likely_infeasible(self):
        pen = pencil_from_matrices(RatMatrix.identity(2), [RatMatrix.diag([1, 0]), RatMatrix.diag([1, 0])])
        assert solve_feasibility(pen).status is SolveStatus.LIKELY_INFEASIBLE

    def test_zero_parameters(self):
        assert solve_feasibility(pencil_from_matrices(-RatMatrix.identity(3), [])).status is SolveStatus.FEASIBLE
        assert (
            solve_feasibility(pencil_from_matrices(RatMatrix.identity(3), [])).status
            is SolveStatus.LIKELY_INFEASIBLE
        )
        assert solve_feasibility(pencil_from_matrices(RatMatrix.zeros(2), [])).status is SolveStatus.FEASIBLE

    def test_common_kernel_is_removed(self):
        # the third coordinate is annihilated by every matrix
        pen = pencil_from_matrices(
            -RatMatrix.diag([1, 0, 0]), [RatMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 0]]), RatMatrix.diag([0, 1, 0])]
        )
        assert common_kernel(pen) == [(0, 0, 1)]
        out = solve_feasibility(pen)
        assert out.status is SolveStatus.FEASIBLE and out.kernel_dim == 1
        assert exact_check(pen, out.alpha) is not None

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_feasibility(cases.pencil("rank_one"), tol=0)

    def test_iteration_limit(self):
        out = solve_feasibility(cases.pencil("two_var_basis"), max_iter=3)
        assert out.status is SolveStatus.STALLED and out.iterations == 3

    def test_interior_pencils(self, rng):
        """Nonempty interior makes numeric-then-rationalize work."""
        verified = 0
        for _ in range(100):
            pen = random_interior_pencil(rng, rng.randint(2, 5), rng.randint(1, 3))
            out = solve_feasibility(pen)
            # soundness gate
            if out.status is SolveStatus.FEASIBLE:
                assert out.min_eig_estimate >= -1e-7
                F0f, Fsf = pen.float_matrices()
                M = -F0f + sum(a * Fi for a, Fi in zip(out.alpha, Fsf))
                assert np.linalg.eigvalsh(M)[0] >= -1e-7
                verified += exact_check(pen, out.alpha) is not None
        assert verified >= 95


class TestProbe:
    def test_homogeneous_symbolic_determinant(self):
        rep = degeneracy_probe(cases.pencil("homogeneous"), [0, 0])
        a1, a2 = parse_polynomial("a1"), parse_polynomial("a2")
        assert rep.symbolic_det == (a1**2 + a2**2) ** 2
        assert rep.singular

    def test_rank_one_point(self):
        pen = cases.pencil("rank_one")
        assert pen.matrix_at(cases.RANK_ONE_POINT) == cases.RANK_ONE_MATRIX
        rep = degeneracy_probe(pen, cases.RANK_ONE_POINT)
        assert rep.phi_value == 0 and rep.gradient == (0, 0) and rep.singular

    def test_identity_pencil(self):
        rep = degeneracy_probe(pencil_from_matrices(-RatMatrix.identity(3), []), [])
        assert rep.phi_value == 1 and rep.gradient == () and not rep.singular
        assert rep.symbolic_det == parse_polynomial("1")

    def test_smooth_point(self):
        rep = degeneracy_probe(cases.pencil("rank_one"), [0, 0])
        assert rep.phi_value == oracles.det(cases.pencil("rank_one").matrix_at([0, 0]))
        assert not rep.singular

    def test_size_guard(self):
        pen = pencil_from_matrices(-RatMatrix.identity(9), [RatMatrix.identity(9)])
        rep = degeneracy_probe(pen, [1])
        assert rep.symbolic_det is None
        assert rep.phi_value == 2**9 and rep.gradient == (9 * 2**8,)

    def test_two_var_determinant_vanishes_identically(self):
        # one direction is annihilated by every matrix of the pencil
        rep = degeneracy_probe(cases.pencil("two_var_basis"), cases.TWO_VAR_POINT)
        assert rep.common_kernel_dim == 1
        assert rep.symbolic_det is not None and rep.symbolic_det.is_zero()
        assert rep.singular

    @pytest.mark.parametrize("name", ["rank_one", "homogeneous", "segment"])
    def test_determinant_matches_sympy(self, name):
        pen = cases.pencil(name)
        expr, syms = oracles.pencil_det(pen)
        assert oracles.to_sympy(symbolic_determinant(pen)) == expr

    @pytest.mark.parametrize("name", ["rank_one", "homogeneous", "segment"])
    def test_two_routes_agree(self, name, rng):
        pen = cases.pencil(name)
        sym = symbolic_determinant(pen)
        names = [f"a{i + 1}" for i in range(pen.m)]
        for _ in range(10):
            point = [F(rng.randint(-40, 40), rng.randint(1, 5)) for _ in range(pen.m)]
            rep = degeneracy_probe(pen, point)
            env = dict(zip(names, point))
            assert sym.eval(env) == rep.phi_value
            assert tuple(sym.diff(v).eval(env) for v in names) == rep.gradient

    @given(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=4), min_size=2, max_size=2))
    def test_singular_iff_both_vanish(self, point):
        rep = degeneracy_probe(cases.pencil("rank_one"), point, symbolic=False)
        assert rep.singular == (rep.phi_value == 0 and all(g == 0 for g in rep.gradient))


class TestSliceByEstimate:
    def test_two_var_second_parameter(self):
        pen = cases.pencil("two_var_basis")
        sliced = slice_by_estimate(pen, [2.0, 8.0000001, 79.0], 1, max_den=10)
        assert sliced.m == 2
        assert sliced.matrix_at([2, 79]) == pen.matrix_at([2, 8, 79])

    def test_segment_line(self):
        pen = cases.pencil("segment")
        sliced = slice_by_estimate(pen, [10.0, -0.2727, 9.0], 1, max_den=20)
        assert sliced.matrix_at([1, 2]) == pen.matrix_at([1, F(-3, 11), 2])

    def test_slice_everything(self):
        pen = cases.pencil("two_var_basis")
        est = [2.0, 8.0, 79.0]
        for _ in range(3):
            pen = slice_by_estimate(pen, est, pen.m - 1)
            est = est[:-1]
        assert pen.m == 0
        assert is_psd_exact(pen.matrix_at([])).is_psd
        assert solve_feasibility(pen).status is not SolveStatus.LIKELY_INFEASIBLE

    def test_index_range(self):
        with pytest.raises(IndexError):
            slice_by_estimate(cases.pencil("rank_one"), [0.0, 0.0], 2)


def test_numpy_oracle_on_sliced_point():
    pen = slice(cases.pencil("two_var_basis"), [-9, 1, 0], -10)
    M = np.array(pen.matrix_at([2, 79]).to_float())
    assert np.linalg.eigvalsh(M)[0] > -1e-9
    assert oracles.is_psd(pen.matrix_at([2, 79]))
    assert sp.Matrix(oracles.sym_matrix(pen.matrix_at([2, 79]))).rank() < pen.size
