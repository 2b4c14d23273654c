"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp

from qbdmop import GOLDEN, Mat, build_model, run_pipeline
from qbdmop.matrix import mat_inverse


def F(text) -> Fraction:
    return Fraction(text)


def reflecting_walk(levels: int, exact: bool = True):
    """Scalar walk: up/down 1/2, reflection at 0 keeps 1/2 in place."""
    half = Fraction(1, 2) if exact else 0.5
    zero = Fraction(0) if exact else 0.0
    blocks = [{"B": [[half]], "A": [[half]]}]
    blocks += [{"B": [[zero]], "A": [[half]], "C": [[half]]} for _ in range(1, levels)]
    return build_model(1, "discrete", blocks, exact=exact)


def product_potentials(m, pi0: Mat, n_max: int) -> list[Mat]:
    """Potentials by the full product formula (C_1^T..C_n^T)^{-1} Pi_0 (A_0..A_{n-1})."""
    out = [pi0]
    for n in range(1, n_max + 1):
        left = m.C(1).T
        right = m.A(0)
        for j in range(2, n + 1):
            left = left @ m.C(j).T
        for j in range(1, n):
            right = right @ m.A(j)
        out.append(mat_inverse(left) @ pi0 @ right)
    return out


def sym(m: Mat) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(v.numerator, v.denominator) for v in row] for row in m])


def hankel_monic(moms, n: int):
    """Monic degree-n polynomial coefficients from the block Hankel system (sympy).

    Solves ``sum_i c_i S_{i+j} = -S_{n+j}`` for ``j < n``; returns
    ``(coeffs, h_n, beta_n)`` as sympy matrices.
    """
    S = [sym(s) for s in moms]
    N = S[0].shape[0]
    if n == 0:
        coeffs = [sp.eye(N)]
    else:
        H = sp.BlockMatrix([[S[i + j] for j in range(n)] for i in range(n)]).as_explicit()
        rhs = -sp.BlockMatrix([[S[n + j] for j in range(n)]]).as_explicit()
        c = rhs * H.inv()
        coeffs = [c[:, i * N:(i + 1) * N] for i in range(n)] + [sp.eye(N)]
    h = sum((coeffs[i] * S[i + n] for i in range(n + 1)), sp.zeros(N))
    xh = sp.zeros(N)
    for i in range(n + 1):
        for j in range(n + 1):
            xh += coeffs[i] * S[i + j + 1] * coeffs[j].T
    return coeffs, h, xh * h.inv()


@pytest.fixture(scope="session")
def golden_run_50():
    return run_pipeline(GOLDEN, 50)


@pytest.fixture(scope="session")
def golden_run_20():
    return run_pipeline(GOLDEN, 20)


@pytest.fixture(scope="session")
def golden_float_run():
    return run_pipeline(GOLDEN.as_float(), 40)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
