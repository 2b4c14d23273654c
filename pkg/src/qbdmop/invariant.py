"""Invariant measures built from potential coefficients, plus a brute-force oracle."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .matrix import Mat, Scalar, solve
from .model import (
    BlockTridiagonal,
    Kind,
    LevelVector,
    ModelError,
    row_apply,
    truncate_lumped,
    truncate_lumped_array,
)
from .potential import PotentialSequence


class InvariantError(ValueError):
    pass


class InvariantVector(LevelVector):
    """Level-blocked invariant measure; block n is ``(Pi_n e)^T``."""


def invariant_vector(ps: PotentialSequence) -> InvariantVector:
    """Row sums of each potential coefficient, one block per level.

    Negative components mean some ``Pi_n`` is not positive semi-definite,
    which can only come from an inconsistent model/``pi0`` pair.
    """
    if len(ps) == 0:
        raise InvariantError("empty potential sequence")
    blocks = []
    for n, pi in enumerate(ps):
        block = pi.row_sums()
        if any(v < 0 for v in block):
            raise InvariantError(f"negative component at level {n}: {block}")
        blocks.append(block)
    return InvariantVector(tuple(blocks))


def stationarity_residual(m: BlockTridiagonal, v: LevelVector, levels: int) -> list[Scalar]:
    """Max-norm per level of ``vP - v`` (discrete) or ``vQ`` (continuous), levels ``0..levels-1``."""
    applied = row_apply(v, m, levels)
    out = []
    for k in range(levels):
        if m.kind is Kind.DISCRETE:
            diff = [a - b for a, b in zip(applied[k], v[k])]
        else:
            diff = list(applied[k])
        out.append(max(abs(d) for d in diff))
    return out


def brute_force_invariant(m: BlockTridiagonal, L: int, exact: bool = False) -> LevelVector:
    """Stationary vector of the lumped truncation on levels ``0..L``.

    Solves ``(P^T - I) x = 0`` with the normalization ``sum(x) = 1`` taking the
    place of the last (redundant) balance equation.  ``exact=True`` runs a
    rational elimination and needs an exact model; keep ``L`` small there.
    """
    if m.kind is not Kind.DISCRETE:
        raise ModelError("the truncation oracle needs a discrete-time model")
    if L < 2:
        raise ModelError("oracle truncation level must be at least 2")
    N = m.N
    if exact:
        if not m.exact:
            raise InvariantError("exact oracle needs an exact model")
        P = truncate_lumped(m, L)
        size = P.rows
        rows = [
            [P[j, i] - (1 if i == j else 0) for j in range(size)] for i in range(size - 1)
        ]
        rows.append([Fraction(1)] * size)
        rhs = Mat([[0]] * (size - 1) + [[1]])
        x = solve(Mat(rows), rhs).column(0)
    else:
        P = truncate_lumped_array(m, L)
        size = P.shape[0]
        M = P.T - np.eye(size)
        M[-1, :] = 1.0
        rhs = np.zeros(size)
        rhs[-1] = 1.0
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise InvariantError(f"oracle solve failed: {exc}") from None
        if not np.all(np.isfinite(x)):
            raise InvariantError("oracle solve produced non-finite values")
        x = tuple(float(v) for v in x)
    return LevelVector(tuple(tuple(x[n * N : (n + 1) * N]) for n in range(L + 1)))


def normalize_truncated(v: LevelVector, L: int) -> LevelVector:
    """Blocks ``0..L`` of ``v`` scaled to sum to one."""
    if L < 0:
        raise InvariantError("empty range")
    if L + 1 > len(v):
        raise InvariantError(f"vector has {len(v)} blocks, {L + 1} requested")
    head = v.blocks[: L + 1]
    total = sum(x for b in head for x in b)
    if total <= 0:
        raise InvariantError("zero mass on the requested range")
    return LevelVector(tuple(tuple(x / total for x in b) for b in head))


def rescaled_relative_error(reference: LevelVector, other: LevelVector, levels: int = 6) -> float:
    """Max relative error of ``other`` against ``reference`` on blocks ``0..levels-1``.

    ``other`` is first rescaled so that its first component matches the
    reference (invariant measures are only defined up to scale).
    """
    ref = reference.to_numpy()[:levels]
    oth = other.to_numpy()[:levels]
    if ref.shape != oth.shape:
        raise InvariantError("vectors do not cover the requested levels")
    if oth[0, 0] == 0:
        raise InvariantError("cannot rescale: first component is zero")
    oth = oth * (ref[0, 0] / oth[0, 0])
    return float(np.max(np.abs(oth - ref) / np.abs(ref)))
