from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp

from conftest import hankel_monic, sym
from qbdmop import GOLDEN, FamilyParams, normalized_family, weight_spec
from qbdmop.example import delta_n
from qbdmop.matrix import Mat, mat_inverse
from qbdmop.mop import (
    RecurrenceError,
    WeightError,
    WeightSpec,
    discretized_recurrence,
    evaluate_Q,
    monic_recurrence,
    moments,
    orthogonality_check,
    stochastic_normalize,
)

UNIFORM = WeightSpec(0, 0, (Mat([[1]]),))
GOLDEN_W = weight_spec(GOLDEN)


class TestMoments:
    def test_uniform(self):
        assert [m[0, 0] for m in moments(UNIFORM, 6)] == [F(1, k + 1) for k in range(7)]

    def test_golden_s0(self):
        assert moments(GOLDEN_W, 0)[0] == Mat([[F(2, 3), F(1, 4)], [F(1, 4), F(1, 6)]])

    def test_against_symbolic_integrals(self):
        x = sp.symbols("x")
        w = weight_spec(FamilyParams(2, 1, F(1, 3)))
        Wx = sp.Matrix(2, 2, lambda i, j: sum(sp.Rational(str(c[i, j])) * x**p for p, c in enumerate(w.poly)))
        Wx = Wx * x**2 * (1 - x)
        for k, S in enumerate(moments(w, 4)):
            assert sym(S) == (x**k * Wx).applyfunc(lambda e: sp.integrate(e, (x, 0, 1)))

    def test_float_path_agrees(self):
        ex = moments(GOLDEN_W, 10)
        fl = moments(GOLDEN_W, 10, exact=False)
        assert max(np.max(np.abs(a.to_float().to_numpy() - b.to_numpy())) for a, b in zip(ex, fl)) < 1e-14

    def test_exact_needs_integer_exponents(self):
        with pytest.raises(WeightError):
            moments(WeightSpec(0.5, 0, (Mat([[1.0]]),)), 3, exact=True)


class TestWeightSpec:
    def test_rejects_asymmetric_or_indefinite(self):
        with pytest.raises(WeightError):
            WeightSpec(0, 0, (Mat([[1, 1], [0, 1]]),))
        with pytest.raises(WeightError):
            WeightSpec(0, 0, (Mat([[1, 2], [2, 1]]),))
        with pytest.raises(WeightError):
            WeightSpec(-1, 0, (Mat([[1]]),))


class TestMonic:
    def test_uniform(self):
        fam = monic_recurrence(moments(UNIFORM, 9), 4)
        assert fam.beta[0] == Mat([[F(1, 2)]])
        assert fam.gamma[1] == Mat([[F(1, 12)]])
        assert all(b == Mat([[F(1, 2)]]) for b in fam.beta)

    @pytest.mark.parametrize("params", [GOLDEN, FamilyParams(1, 1, F(1, 2)), FamilyParams(0, 2, F(5, 2))])
    def test_against_block_hankel(self, params):
        moms = moments(weight_spec(params), 11)
        fam = monic_recurrence(moms, 4)
        for n in range(5):
            coeffs, h, beta = hankel_monic(moms, n)
            assert sym(fam.h[n]) == h
            assert sym(fam.beta[n]) == beta
            if fam.monic is not None:
                assert [sym(c) for c in fam.monic[n]] == coeffs
            if n:
                assert sym(fam.gamma[n]) == h * sym(fam.h[n - 1]).inv()

    def test_needs_enough_moments(self):
        with pytest.raises(ValueError):
            monic_recurrence(moments(UNIFORM, 4), 3)

    def test_degenerate_weight(self):
        # a point-like weight: rank-one moments cannot support degree 1
        S = [Mat([[F(1, 2) ** k]]) for k in range(6)]
        with pytest.raises(RecurrenceError):
            monic_recurrence(S, 2)


class TestNormalize:
    def test_identity_normalization(self):
        fam = monic_recurrence(moments(GOLDEN_W, 7), 3)
        out = stochastic_normalize(fam, [Mat.identity(2)] * 5)
        assert all(a == Mat.identity(2) for a in out.A)
        assert out.B == fam.beta and out.C[1:] == fam.gamma[1:] and out.norms == fam.h

    def test_golden_norm0(self):
        fam = normalized_family(GOLDEN, 2)
        assert fam.norms[0] == Mat([[F(79, 216), F(-5, 24)], [F(-5, 24), F(11, 3)]])

    def test_pi0_is_inverse_conjugated_s0(self):
        fam = normalized_family(GOLDEN, 2)
        L0 = delta_n(GOLDEN, 0)
        S0 = moments(GOLDEN_W, 0)[0]
        assert fam.pi0() == mat_inverse(L0 @ S0 @ L0.T)

    def test_norm_identities_exact(self, golden_run_20):
        fam = golden_run_20.family
        for n in range(20):
            h, B = fam.norms[n], fam.B[n]
            assert B @ h == h @ B.T
            assert h @ fam.C[n + 1].T == fam.A[n] @ fam.norms[n + 1]

    def test_short_normalization(self):
        fam = monic_recurrence(moments(GOLDEN_W, 7), 3)
        with pytest.raises(ValueError):
            stochastic_normalize(fam, [Mat.identity(2)] * 3)

    def test_stochastic_violation(self):
        fam = monic_recurrence(moments(GOLDEN_W, 7), 3)
        with pytest.raises(RecurrenceError):
            stochastic_normalize(fam, [Mat.identity(2)] * 5, stochastic=True)


class TestFloatRoute:
    def test_matches_exact_golden(self):
        ex = normalized_family(GOLDEN, 20)
        fl = normalized_family(GOLDEN, 20, exact=False)
        for name in ("A", "B", "norms"):
            for a, b in zip(getattr(ex, name), getattr(fl, name)):
                d = np.max(np.abs(a.to_float().to_numpy() - b.to_numpy()))
                assert d < 1e-12 * max(1.0, float(a.max_abs()))

    def test_monic_matches_exact(self):
        ex = monic_recurrence(moments(GOLDEN_W, 21), 10)
        fl = discretized_recurrence(GOLDEN_W.conjugated(Mat.identity(2, exact=False)), 10)
        for a, b in zip(ex.beta, fl.beta):
            assert np.max(np.abs(a.to_float().to_numpy() - b.to_numpy())) < 1e-11

    def test_long_run_stays_stochastic(self):
        fam = normalized_family(FamilyParams(0.5, 1.5, 1.0), 80)
        for n in range(80):
            s = (fam.B[n] + fam.A[n] + (fam.C[n] if n else Mat.zeros(2, exact=False))).row_sums()
            assert max(abs(v - 1) for v in s) < 1e-12

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            discretized_recurrence(GOLDEN_W, 10, order=5)


class TestEvaluate:
    def test_q0(self):
        fam = normalized_family(GOLDEN, 3)
        assert evaluate_Q(fam, F(1, 3), 0) == [Mat.identity(2)]

    def test_rows_sum_to_one_at_one(self):
        fam = normalized_family(GOLDEN, 20)
        for Q in evaluate_Q(fam, F(1), 20):
            assert Q.row_sums() == (1, 1)

    def test_uniform_odd_vanish_at_half(self):
        fam = monic_recurrence(moments(UNIFORM, 13), 6)
        vals = evaluate_Q(fam, F(1, 2), 7)
        assert [v[0, 0] for v in vals[1::2]] == [0, 0, 0, 0]
        assert all(v[0, 0] != 0 for v in vals[0::2])

    def test_float_point(self):
        fam = normalized_family(GOLDEN, 5)
        ex = evaluate_Q(fam, F(1, 4))
        fl = evaluate_Q(fam, 0.25)
        assert all(np.allclose(a.to_float().to_numpy(), b.to_numpy(), atol=1e-12) for a, b in zip(ex, fl))


class TestOrthogonality:
    def test_golden(self):
        fam = normalized_family(GOLDEN, 9)
        t = orthogonality_check(fam, GOLDEN_W, 8)
        assert t[0, 0] < 1e-13 and t[0, 1] < 1e-12
        assert t.max() < 1e-10

    def test_uniform_scalar(self):
        fam = monic_recurrence(moments(UNIFORM, 13), 6)
        t = orthogonality_check(fam, UNIFORM)
        assert np.all(np.diag(t) < 1e-14)

    def test_detects_wrong_weight(self):
        fam = normalized_family(GOLDEN, 4)
        other = weight_spec(FamilyParams(0, 0, F(1, 4)))
        assert orthogonality_check(fam, other, 3).max() > 1e-4
