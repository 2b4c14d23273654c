"""Gauss-Jacobi rules on [0, 1] for the weight x**alpha * (1 - x)**beta."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal


def jacobi_recurrence(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Monic recurrence coefficients on [0, 1].

    Returns ``(a, b)`` with ``x p_k = p_{k+1} + a_k p_k + b_k p_{k-1}`` for
    ``k < n``; ``b[0]`` is unused and set to 0.
    """
    # On [-1, 1] the weight (1-t)**beta (1+t)**alpha maps to ours under x = (1+t)/2.
    a_, b_ = float(beta), float(alpha)
    s = a_ + b_
    k = np.arange(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        alph = (b_**2 - a_**2) / ((2 * k + s) * (2 * k + s + 2))
        bet = (
            4 * k * (k + a_) * (k + b_) * (k + s)
            / ((2 * k + s) ** 2 * (2 * k + s + 1) * (2 * k + s - 1))
        )
    if n > 0:
        alph[0] = (b_ - a_) / (s + 2)
        bet[0] = 0.0
    if n > 1:
        bet[1] = 4 * (1 + a_) * (1 + b_) / ((2 + s) ** 2 * (3 + s))
    return (1 + alph) / 2, bet / 4


@lru_cache(maxsize=64)
def _rule(alpha: float, beta: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    a, b = jacobi_recurrence(alpha, beta, order)
    if order == 1:
        nodes, vecs = a.copy(), np.ones((1, 1))
    else:
        nodes, vecs = eigh_tridiagonal(a, np.sqrt(b[1:]))
    mass = math.exp(math.lgamma(alpha + 1) + math.lgamma(beta + 1) - math.lgamma(alpha + beta + 2))
    weights = mass * vecs[0, :] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(alpha: float, beta: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point Gauss rule for x**alpha (1-x)**beta on [0, 1].

    The rule integrates polynomials of degree ``2*order - 1`` exactly.  Nodes
    come from the eigenvalues of the symmetric Jacobi matrix of the monic
    recurrence (Golub-Welsch); weights from the first eigenvector components.
    Nodes are returned in ascending order.

    >>> x, w = gauss_jacobi(0, 0, 1)
    >>> float(x[0]), float(w[0])
    (0.5, 1.0)
    """
    if not (alpha > -1 and beta > -1):
        raise ValueError(f"need alpha, beta > -1, got {alpha}, {beta}")
    if order < 1:
        raise ValueError("order must be at least 1")
    return _rule(float(alpha), float(beta), int(order))


def order_for_degree(degree: int) -> int:
    """Node count that integrates degree ``degree`` exactly, plus a margin of 8."""
    return (max(degree, 0) + 2) // 2 + 8
