from fractions import Fraction as F

import pytest

from qbdmop import GOLDEN, FamilyParams, normalized_family
from qbdmop.example import (
    ParameterError,
    Recurrence,
    classify,
    delta0,
    delta_n,
    golden_A,
    golden_B,
    golden_blocks,
    golden_C,
    golden_norms,
    golden_pi_block,
    pochhammer,
    weight_at,
)
from qbdmop.matrix import Mat, det, is_symmetric, mat_inverse

TRIPLES = [
    (0, 0, F(1, 2)), (1, 2, F(1, 2)), (0, 1, F(1, 4)), (3, 1, F(7, 5)),
    (0.5, 1.5, 1.0), (-0.5, -0.5, 0.25), (2.0, 0.0, 0.9),
]


class TestParams:
    def test_ranges(self):
        with pytest.raises(ParameterError):
            FamilyParams(-1, 0, F(1, 2))
        with pytest.raises(ParameterError):
            FamilyParams(0, 0, 1)
        with pytest.raises(ParameterError):
            FamilyParams(0, 0, 0)

    def test_make(self):
        assert FamilyParams.make("0", "0", "0.5") == GOLDEN
        assert not FamilyParams.make("0.5", "1", "1/2").exact
        with pytest.raises(ParameterError):
            FamilyParams.make("0.5", "1", "1/2", exact=True)
        assert isinstance(FamilyParams.make(0, 0, "1/2", exact=False).k, float)


class TestWeight:
    def test_at_one(self):
        # the (1-x) factors vanish; the corner is k + beta - k + 1 = 1
        assert weight_at(GOLDEN, F(1)) == Mat([[1, 0], [0, 0]])

    def test_at_half(self):
        assert weight_at(GOLDEN, F(1, 2)) == Mat([[F(5, 8), F(1, 4)], [F(1, 4), F(1, 8)]])

    @pytest.mark.parametrize("triple", TRIPLES)
    def test_symmetric(self, triple):
        p = FamilyParams(*triple)
        for x in (F(1, 7), F(1, 2), F(5, 6)):
            xv = x if p.exact else float(x)
            assert is_symmetric(weight_at(p, xv))


class TestDelta:
    def test_golden_delta0(self):
        assert delta_n(GOLDEN, 0) == Mat([[1, F(-5, 6)], [1, -6]])

    @pytest.mark.parametrize("triple", TRIPLES)
    def test_delta_n_at_zero_is_delta0(self, triple):
        p = FamilyParams(*triple)
        d, d0 = delta_n(p, 0), delta0(p)
        if p.exact:
            assert d == d0
        else:
            assert (d - d0).max_abs() < 1e-14

    def test_nonsingular(self):
        assert all(det(delta_n(GOLDEN, n)) != 0 for n in range(21))

    def test_pochhammer(self):
        assert pochhammer(F(7, 3), 0) == 1
        assert pochhammer(3, 4) == 3 * 4 * 5 * 6
        with pytest.raises(ValueError):
            pochhammer(1, -1)


class TestGolden:
    def test_level_zero(self):
        assert golden_B(0) == Mat([[F(163, 217), F(121, 2604)], [F(39, 217), F(54, 217)]])
        assert golden_A(0).row(0) == (F(1989, 12964), F(68, 1389))

    def test_c1_positive(self):
        assert min(golden_C(1).entries) > 0
        with pytest.raises(ValueError):
            golden_C(0)

    def test_norms_and_pi(self):
        assert golden_norms(0) == Mat([[F(79, 216), F(-5, 24)], [F(-5, 24), F(11, 3)]])
        assert golden_pi_block(0) == (F(648, 217), F(96, 217))
        for n in range(21):
            assert mat_inverse(golden_norms(n)).row_sums() == golden_pi_block(n)

    def test_positive_entries_and_row_sums(self):
        for n in range(51):
            g = golden_blocks(n)
            parts = [g.A, g.B] + ([g.C] if n else [])
            assert all(v > 0 for p in parts for v in p.entries)
            total = g.A + g.B + (g.C if n else Mat.zeros(2))
            assert total.row_sums() == (1, 1)

    def test_pipeline_reconciliation(self, golden_run_20):
        fam = golden_run_20.family
        for n in range(11):
            g = golden_blocks(n)
            assert (fam.A[n], fam.B[n], fam.norms[n]) == (g.A, g.B, golden_norms(n))
            if n:
                assert fam.C[n] == g.C

    def test_growth(self):
        p1, p2 = golden_pi_block(10_000)
        assert abs(p1 / 10_000 - 1) < 5e-2 and abs(p2 / 10_000 - 1) < 5e-2


class TestClassify:
    def test_golden(self):
        c = classify(GOLDEN)
        assert c.recurrence is Recurrence.NULL_RECURRENT and c.unique
        assert c.label == "null recurrent; unique invariant distribution"

    def test_transient(self):
        c = classify(FamilyParams(0, 1, F(1, 2)))
        assert c.recurrence is Recurrence.TRANSIENT and c.unique is None
        assert c.label == "transient; uniqueness unknown"

    def test_negative_beta(self):
        assert classify(FamilyParams(0, F(-1, 2), F(1, 4))).recurrence is Recurrence.NULL_RECURRENT

    def test_k_does_not_matter(self):
        assert {classify(FamilyParams(0, 2, k)).recurrence for k in (F(1, 10), 1, F(29, 10))} == {
            Recurrence.TRANSIENT
        }


def test_normalized_family_needs_exact_params():
    with pytest.raises(ParameterError):
        normalized_family(FamilyParams(0.5, 1.0, 0.5), 3, exact=True)
