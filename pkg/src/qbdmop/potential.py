"""Matrix-valued potential coefficients and the symmetry conditions they satisfy."""

from __future__ import annotations

from dataclasses import dataclass

from .matrix import (
    Mat,
    MixedBackendError,
    NotPositiveDefiniteError,
    Scalar,
    cholesky,
    is_positive_definite,
    is_symmetric,
    mat_inverse,
)
from .model import BlockTridiagonal

#: Float symmetry tolerance, relative to the largest entry of the matrix.
SYMMETRY_TOL = 1e-11


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialSequence:
    """``pi0`` is the level-0 coefficient; ``items[n-1]`` is the level-n one."""

    pi0: Mat
    items: tuple[Mat, ...] = ()

    def __len__(self) -> int:
        return 1 + len(self.items)

    def __getitem__(self, n: int) -> Mat:
        if n < 0:
            raise IndexError("negative level")
        return self.pi0 if n == 0 else self.items[n - 1]

    def __iter__(self):
        yield self.pi0
        yield from self.items

    @property
    def exact(self) -> bool:
        return self.pi0.exact


def _sym_residual(m: Mat) -> Scalar:
    r = (m - m.T).max_abs()
    if m.exact:
        return r
    return r / (m.max_abs() or 1.0)


def potential_coefficients(
    m: BlockTridiagonal, pi0: Mat, n_max: int, tol: float = SYMMETRY_TOL
) -> PotentialSequence:
    """Potential coefficients up to level ``n_max``.

    Uses the one-step form ``Pi_n = (C_n^T)^{-1} Pi_{n-1} A_{n-1}``.  Every
    result must be symmetric (exactly, or within ``tol`` relative to its
    largest entry on the float backend); an asymmetric result means ``pi0``
    does not belong to this model.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if pi0.exact != m.exact:
        if pi0.exact:
            pi0 = pi0.to_float()
        else:
            raise MixedBackendError("float pi0 with an exact model")
    if pi0.shape != (m.N, m.N):
        raise PotentialError(f"pi0 has shape {pi0.shape}, expected {(m.N, m.N)}")
    if not is_symmetric(pi0, tol) or not is_positive_definite(pi0):
        raise PotentialError("pi0 must be symmetric positive definite")
    if not m.available(n_max + 1):
        raise PotentialError(f"model has {len(m)} levels, {n_max + 1} needed")
    items = []
    prev = pi0
    for n in range(1, n_max + 1):
        cur = mat_inverse(m.C(n).T) @ prev @ m.A(n - 1)
        res = _sym_residual(cur)
        if (m.exact and res != 0) or (not m.exact and res > tol):
            raise PotentialError(
                f"potential coefficient at level {n} is not symmetric (residual {float(res):.3g});"
                " pi0 does not match the model"
            )
        items.append(cur)
        prev = cur
    return PotentialSequence(pi0, tuple(items))


@dataclass(frozen=True)
class SymmetryReport:
    """Per-level residuals of ``Pi_n B_n = B_n^T Pi_n`` and ``Pi_n A_n = C_{n+1}^T Pi_{n+1}``.

    Exact residuals are Fractions (zero means the identity holds).  Float
    residuals are relative to the largest entry of ``Pi_n``.
    """

    diagonal: tuple[Scalar, ...]
    offdiagonal: tuple[Scalar, ...]
    exact: bool
    tol: float = SYMMETRY_TOL

    def _bad(self, r) -> bool:
        return r != 0 if self.exact else r >= self.tol

    @property
    def ok(self) -> bool:
        return not any(self._bad(r) for r in self.diagonal + self.offdiagonal)

    def failures(self) -> list[tuple[str, int]]:
        out = [("diagonal", n) for n, r in enumerate(self.diagonal) if self._bad(r)]
        out += [("offdiagonal", n) for n, r in enumerate(self.offdiagonal) if self._bad(r)]
        return sorted(out, key=lambda t: t[1])

    @property
    def max_residual(self) -> Scalar:
        return max(self.diagonal + self.offdiagonal, default=0)


def check_symmetry_conditions(
    m: BlockTridiagonal, ps: PotentialSequence, levels: int | None = None, tol: float = SYMMETRY_TOL
) -> SymmetryReport:
    levels = len(ps) if levels is None else levels
    if levels > len(ps):
        raise PotentialError(f"sequence covers {len(ps)} levels, {levels} requested")

    def rel(r: Mat, pi: Mat):
        v = r.max_abs()
        return v if r.exact else v / (pi.max_abs() or 1.0)

    diag = []
    off = []
    for n in range(levels):
        pi = ps[n]
        B = m.B(n)
        diag.append(rel(pi @ B - B.T @ pi, pi))
        if n + 1 < levels:
            off.append(rel(pi @ m.A(n) - m.C(n + 1).T @ ps[n + 1], pi))
    return SymmetryReport(tuple(diag), tuple(off), m.exact, tol)


def symmetrizer(pi_n: Mat) -> Mat:
    """One upper-triangular ``R_n`` with ``R_n^T R_n = pi_n`` (float backend).

    Any ``U R_n`` with orthogonal ``U`` is equally valid; this picks the
    Cholesky factor.
    """
    if pi_n.exact:
        pi_n = pi_n.to_float()
    if not is_positive_definite(pi_n):
        raise NotPositiveDefiniteError("symmetrizer needs a positive definite matrix")
    return cholesky(pi_n)
