import math

import numpy as np
import pytest
from scipy.special import roots_jacobi

from qbdmop.quadrature import gauss_jacobi, jacobi_recurrence, order_for_degree


def test_midpoint():
    x, w = gauss_jacobi(0, 0, 1)
    assert x.tolist() == [0.5] and w.tolist() == pytest.approx([1.0], abs=1e-15)


def test_two_point_legendre():
    x, w = gauss_jacobi(0, 0, 2)
    d = 1 / (2 * math.sqrt(3))
    assert np.allclose(x, [0.5 - d, 0.5 + d], atol=1e-15)
    assert np.allclose(w, [0.5, 0.5], atol=1e-15)


def test_degree_five_exact():
    x, w = gauss_jacobi(0, 0, 3)
    assert abs(np.dot(w, x**5) - 1 / 6) < 1e-15


@pytest.mark.parametrize("alpha,beta", [(0, 0), (1, 2), (0.5, 1.5), (-0.5, -0.5), (-0.9, 3.0)])
@pytest.mark.parametrize("order", [1, 4, 17])
def test_against_scipy(alpha, beta, order):
    # scipy's rule is for (1-t)**a (1+t)**b on [-1, 1]; x = (1+t)/2 maps our weight to a=beta, b=alpha
    t, wt = roots_jacobi(order, beta, alpha)
    x, w = gauss_jacobi(alpha, beta, order)
    assert np.allclose(x, (1 + t) / 2, rtol=0, atol=1e-13)
    assert np.allclose(w, wt / 2 ** (alpha + beta + 1), rtol=1e-11)


@pytest.mark.parametrize("alpha,beta", [(0, 0), (2, 3), (0.5, 1.5)])
def test_exactness_against_beta_function(alpha, beta):
    order = 6
    x, w = gauss_jacobi(alpha, beta, order)
    assert np.all((x > 0) & (x < 1)) and np.all(w > 0)
    for k in range(2 * order):
        exact = math.exp(math.lgamma(alpha + k + 1) + math.lgamma(beta + 1) - math.lgamma(alpha + beta + k + 2))
        assert abs(np.dot(w, x**k) - exact) < 1e-14 * max(exact, 1)


def test_recurrence_legendre():
    a, b = jacobi_recurrence(0, 0, 4)
    assert np.allclose(a, 0.5)
    assert np.allclose(b[1:], [1 / 12, 1 / 15, 9 / 140])


def test_errors_and_sizing():
    with pytest.raises(ValueError):
        gauss_jacobi(-1, 0, 3)
    with pytest.raises(ValueError):
        gauss_jacobi(0, 0, 0)
    assert 2 * order_for_degree(20) - 1 >= 20
