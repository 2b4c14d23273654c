from fractions import Fraction as F

import numpy as np
import pytest

from qbdmop.example import GOLDEN, delta0, golden_norms
from qbdmop.matrix import (
    DimensionError,
    Mat,
    MixedBackendError,
    NotPositiveDefiniteError,
    SingularMatrixError,
    cholesky,
    det,
    is_positive_definite,
    is_symmetric,
    ldlt,
    mat_inverse,
    mat_mul,
    parse_scalar,
    solve,
    transpose,
)

I2 = Mat.identity(2)


class TestParse:
    def test_rational(self):
        assert parse_scalar("-7/12") == F(-7, 12)
        assert parse_scalar(" 6/8 ") == F(3, 4)
        assert parse_scalar("+3") == F(3)

    def test_lowest_terms_positive_denominator(self):
        x = parse_scalar("-10/4")
        assert (x.numerator, x.denominator) == (-5, 2)

    def test_float(self):
        assert parse_scalar("0.25") == 0.25
        assert isinstance(parse_scalar("0.25"), float)
        assert parse_scalar("0.1", exact=True) == F(1, 10)
        assert parse_scalar("1/3", exact=False) == pytest.approx(1 / 3)

    def test_bad(self):
        with pytest.raises(ValueError):
            parse_scalar("one")
        with pytest.raises(ZeroDivisionError):
            parse_scalar("1/0")


class TestMul:
    def test_identity(self):
        m = Mat([[1, 2], [3, 4]])
        assert mat_mul(I2, m) == m

    def test_permutation_swaps_columns(self):
        assert Mat([[1, 2], [3, 4]]) @ Mat([[0, 1], [1, 0]]) == Mat([[2, 1], [4, 3]])

    def test_delta0_inverse(self):
        d = delta0(GOLDEN)
        assert d == Mat([[1, F(-5, 6)], [1, -6]])
        assert d @ mat_inverse(d) == I2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            Mat([[1, 2]]) @ Mat([[1, 2]])

    def test_mixed_realizations(self):
        with pytest.raises(MixedBackendError):
            I2 @ Mat.identity(2, exact=False)
        with pytest.raises(MixedBackendError):
            Mat([[F(1), 0.5]])

    def test_int_entries_follow_realization(self):
        assert Mat([[1, 2]], exact=False).entries == (1.0, 2.0)
        assert Mat([[1, 2]]).exact


class TestInverse:
    def test_identity_and_diagonal(self):
        assert mat_inverse(I2) == I2
        assert mat_inverse(Mat([[2, 0], [0, 4]])) == Mat([[F(1, 2), 0], [0, F(1, 4)]])

    def test_golden_norm_inverse(self):
        h0 = Mat([[F(79, 216), F(-5, 24)], [F(-5, 24), F(11, 3)]])
        assert h0 == golden_norms(0)
        assert mat_inverse(h0).row_sums() == (F(648, 217), F(96, 217))

    def test_singular_exact(self):
        with pytest.raises(SingularMatrixError):
            mat_inverse(Mat([[1, 2], [2, 4]]))

    def test_singular_float_threshold(self):
        with pytest.raises(SingularMatrixError):
            mat_inverse(Mat([[1.0, 1.0], [1.0, 1.0 + 1e-15]]))

    def test_float_residual(self):
        a = Mat([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]])
        r = (a @ mat_inverse(a)).to_numpy() - np.eye(3)
        assert np.max(np.abs(r)) < 1e-14

    def test_solve_and_det(self):
        a = Mat([[2, 1], [1, 3]])
        x = solve(a, Mat([[1], [2]]))
        assert a @ x == Mat([[1], [2]])
        assert det(a) == 5


class TestFactorizations:
    def test_transpose(self):
        m = Mat([[1, 2, 3], [4, 5, 6]])
        assert transpose(m).shape == (3, 2)
        assert transpose(transpose(m)) == m

    def test_symmetry(self):
        assert is_symmetric(Mat([[1, 2], [2, 1]]))
        assert not is_symmetric(Mat([[1, 2], [F(2001, 1000), 1]]))
        assert not is_symmetric(Mat([[1, 2, 3], [2, 1, 3]]))

    def test_cholesky_trivial(self):
        assert cholesky(Mat.identity(2, exact=False)) == Mat.identity(2, exact=False)
        assert cholesky(Mat([[4.0, 0.0], [0.0, 9.0]])) == Mat([[2.0, 0.0], [0.0, 3.0]])

    def test_cholesky_golden_pi0(self):
        pi0 = mat_inverse(golden_norms(0)).to_float()
        U = cholesky(pi0)
        assert U[1, 0] == 0.0
        assert np.max(np.abs((U.T @ U - pi0).to_numpy())) < 1e-12

    def test_cholesky_refuses_exact(self):
        with pytest.raises(MixedBackendError):
            cholesky(I2)

    def test_ldlt_exact_reconstruction(self):
        a = mat_inverse(golden_norms(3))
        L, d = ldlt(a)
        assert L @ Mat.diag(d) @ L.T == a
        assert all(v > 0 for v in d)

    def test_not_positive_definite(self):
        bad = Mat([[1, 2], [2, 1]])
        assert not is_positive_definite(bad)
        with pytest.raises(NotPositiveDefiniteError):
            ldlt(bad)
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(bad.to_float())
        with pytest.raises(NotPositiveDefiniteError):
            ldlt(Mat([[1, 2], [3, 4]]))

    def test_float_pd_uses_trace_threshold(self):
        assert is_positive_definite(Mat([[1.0, 0.0], [0.0, 1e-10]]))
        assert not is_positive_definite(Mat([[1.0, 0.0], [0.0, 1e-14]]))
