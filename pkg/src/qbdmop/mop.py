"""Matrix-valued orthogonal polynomials on [0, 1].

The inner product is ``<P, R> = int P(x) W(x) R(x)^T dx`` throughout.  For
monic polynomials ``P_n`` this gives

    x P_n = P_{n+1} + beta_n P_n + gamma_n P_{n-1},
    beta_n = <x P_n, P_n> h_n^{-1},   gamma_n = h_n h_{n-1}^{-1},

with ``h_n = <P_n, P_n>``.  A normalization ``Q_n = L_n P_n L_0^{-1}`` turns
the recurrence into ``x Q_n = A_n Q_{n+1} + B_n Q_n + C_n Q_{n-1}``.

Two constructions are offered.  :func:`monic_recurrence` works from the
moment sequence and is the exact (rational) route.  :func:`discretized_recurrence`
runs block Lanczos on a Gauss-Jacobi discretization of the weight; it is
the float route, and avoids the ill-conditioning of float moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .matrix import (
    Mat,
    MixedBackendError,
    Scalar,
    is_positive_definite,
    is_symmetric,
    mat_inverse,
)
from .model import ROW_SUM_TOL, BlockTridiagonal, Kind, Level, build_model
from .quadrature import gauss_jacobi, order_for_degree

#: Relative tolerance of the float orthogonality verification.
ORTHO_TOL = 1e-8


class WeightError(ValueError):
    pass


class RecurrenceError(ArithmeticError):
    """The monic construction broke down (singular norm or lost orthogonality)."""


def _is_nonneg_int(v) -> bool:
    if isinstance(v, float):
        return False
    return Fraction(v).denominator == 1 and v >= 0


@dataclass(frozen=True)
class WeightSpec:
    """``W(x) = x**alpha (1-x)**beta * sum_j poly[j] x**j`` on [0, 1]."""

    alpha: Scalar
    beta: Scalar
    poly: tuple[Mat, ...]

    def __post_init__(self):
        poly = tuple(self.poly)
        object.__setattr__(self, "poly", poly)
        if not (self.alpha > -1 and self.beta > -1):
            raise WeightError(f"need alpha, beta > -1, got {self.alpha}, {self.beta}")
        if not poly:
            raise WeightError("empty polynomial part")
        shape = poly[0].shape
        if shape[0] != shape[1] or any(c.shape != shape for c in poly):
            raise WeightError("polynomial coefficients must be square and of equal size")
        if len({c.exact for c in poly}) != 1:
            raise MixedBackendError("polynomial coefficients mix exact and float entries")
        for j, c in enumerate(poly):
            if not is_symmetric(c, 1e-14):
                raise WeightError(f"coefficient of x**{j} is not symmetric")
        for x in np.linspace(0, 1, 17)[1:-1]:
            if not is_positive_definite(self.poly_at(float(x))):
                raise WeightError(f"weight is not positive definite at x={x:g}")

    @property
    def N(self) -> int:
        return self.poly[0].rows

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    @property
    def exact(self) -> bool:
        """Rational moments exist: integer exponents and rational coefficients."""
        return self.poly[0].exact and _is_nonneg_int(self.alpha) and _is_nonneg_int(self.beta)

    def poly_at(self, x: Scalar) -> Mat:
        coeffs = self.poly
        if isinstance(x, float) and coeffs[0].exact:
            coeffs = tuple(c.to_float() for c in coeffs)
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc.scale(x) + c
        return acc

    def at(self, x: Scalar) -> Mat:
        """Evaluate the weight matrix at ``x``."""
        if not 0 <= x <= 1:
            raise WeightError(f"x={x} outside [0, 1]")
        exact_pow = not isinstance(x, float) and self.exact
        if exact_pow:
            x = Fraction(x)
            f = x ** int(self.alpha) * (1 - x) ** int(self.beta)
        else:
            x = float(x)
            f = x ** float(self.alpha) * (1 - x) ** float(self.beta)
        return self.poly_at(x).scale(f)

    def poly_array(self, xs: np.ndarray) -> np.ndarray:
        """Polynomial part at each point of ``xs`` as an array ``(len(xs), N, N)``."""
        coeffs = [c.to_numpy() for c in self.poly]
        out = np.zeros((len(xs), self.N, self.N))
        for c in reversed(coeffs):
            out = out * xs[:, None, None] + c
        return out

    def conjugated(self, L: Mat) -> "WeightSpec":
        """The equivalent weight ``L W L^T``."""
        coeffs = self.poly
        if L.exact != coeffs[0].exact:
            L = L.to_float()
            coeffs = tuple(c.to_float() for c in coeffs)
        return WeightSpec(self.alpha, self.beta, tuple(L @ c @ L.T for c in coeffs))


def _beta_integral(a: int, b: int) -> Fraction:
    return Fraction(math.factorial(a) * math.factorial(b), math.factorial(a + b + 1))


def moments(w: WeightSpec, k_max: int, exact: bool | None = None) -> list[Mat]:
    """``S_k = int_0^1 x**k W(x) dx`` for ``k = 0..k_max``.

    The exact path sums Beta integrals ``a! b! / (a+b+1)!`` and needs integer
    exponents with rational coefficients.  The float path uses a Gauss-Jacobi
    rule sized to integrate ``x**(k_max + deg)`` exactly.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    if exact is None:
        exact = w.exact
    if exact:
        if not w.exact:
            raise WeightError("exact moments need nonnegative integer alpha, beta and rational coefficients")
        a0, b0 = int(w.alpha), int(w.beta)
        out = []
        for k in range(k_max + 1):
            acc = Mat.zeros(w.N, exact=True)
            for j, c in enumerate(w.poly):
                acc = acc + c.scale(_beta_integral(k + j + a0, b0))
            out.append(acc)
        return out
    x, wts = gauss_jacobi(float(w.alpha), float(w.beta), order_for_degree(k_max + w.degree))
    vals = w.poly_array(x) * wts[:, None, None]
    out = []
    xk = np.ones_like(x)
    for _ in range(k_max + 1):
        out.append(Mat.from_numpy(np.einsum("q,qij->ij", xk, vals)))
        xk = xk * x
    return out


@dataclass(frozen=True)
class MopFamily:
    """Monic recurrence data for levels ``0..n_max`` plus an optional normalization.

    ``gamma[0]`` and ``C[0]`` are ``None``.  ``monic`` holds the ascending
    coefficient lists of ``P_0..P_{n_max+1}`` when the family was built from
    moments.  After :func:`stochastic_normalize`, ``lambdas``, ``A``, ``B``,
    ``C`` and ``norms`` are filled; ``A`` may be one shorter than ``B`` when
    the normalization sequence ends at ``n_max``.
    """

    beta: tuple[Mat, ...]
    gamma: tuple[Mat | None, ...]
    h: tuple[Mat, ...]
    monic: tuple[tuple[Mat, ...], ...] | None = None
    lambdas: tuple[Mat, ...] | None = None
    A: tuple[Mat, ...] | None = None
    B: tuple[Mat, ...] | None = None
    C: tuple[Mat | None, ...] | None = None
    norms: tuple[Mat, ...] | None = None

    @property
    def n_max(self) -> int:
        return len(self.beta) - 1

    @property
    def N(self) -> int:
        return self.beta[0].rows

    @property
    def exact(self) -> bool:
        return self.beta[0].exact

    @property
    def normalized(self) -> bool:
        return self.lambdas is not None

    def recurrence(self) -> tuple[tuple, tuple, tuple]:
        """``(A, B, C)``; the identity normalization when none was applied."""
        if self.normalized:
            return self.A, self.B, self.C
        one = Mat.identity(self.N, self.exact)
        return (one,) * (self.n_max + 1), self.beta, self.gamma

    def squared_norms(self) -> tuple[Mat, ...]:
        return self.norms if self.normalized else self.h

    def pi0(self) -> Mat:
        """Level-0 potential coefficient: inverse of the first squared norm."""
        return mat_inverse(self.squared_norms()[0])

    def to_float(self) -> "MopFamily":
        if not self.exact:
            return self

        def conv(seq):
            if seq is None:
                return None
            return tuple(None if m is None else m.to_float() for m in seq)

        return MopFamily(
            conv(self.beta), conv(self.gamma), conv(self.h),
            None if self.monic is None else tuple(conv(p) for p in self.monic),
            conv(self.lambdas), conv(self.A), conv(self.B), conv(self.C), conv(self.norms),
        )


def _check_pd(h: Mat, n: int) -> None:
    if not is_positive_definite(h):
        raise RecurrenceError(f"squared norm h_{n} is singular or not positive definite")


def monic_recurrence(moms: Sequence[Mat], n_max: int) -> MopFamily:
    """Monic recurrence from moments ``S_0..S_{2 n_max + 1}``.

    Each polynomial is carried with its moment row ``T_j = sum_i c_i S_{i+j}``
    (``<P, x**j I>``), updated by the same three-term combination as the
    coefficients.  The new polynomial must satisfy ``T_j = 0`` for all ``j``
    below its degree, which is its orthogonality to every lower-degree
    polynomial; a violation is a hard error.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    K = len(moms) - 1
    if K < 2 * n_max + 1:
        raise ValueError(f"need {2 * n_max + 2} moments, got {len(moms)}")
    S0 = moms[0]
    exact = S0.exact
    N = S0.rows
    zero = Mat.zeros(N, exact=exact)
    ident = Mat.identity(N, exact)

    def bilinear(T, coeffs, shift):
        acc = zero
        for j, c in enumerate(coeffs):
            acc = acc + T[j + shift] @ c.T
        return acc

    coeffs = [(ident,)]
    T_cur = list(moms)
    T_prev: list[Mat] | None = None
    h = [bilinear(T_cur, coeffs[0], 0)]
    _check_pd(h[0], 0)
    betas, gammas = [], [None]
    h_inv = [mat_inverse(h[0])]
    for n in range(n_max + 1):
        P = coeffs[n]
        b = bilinear(T_cur, P, 1) @ h_inv[n]
        betas.append(b)
        g = None
        if n > 0:
            g = h[n] @ h_inv[n - 1]
            gammas.append(g)
        new = [zero] + list(P)
        for i, c in enumerate(P):
            new[i] = new[i] - b @ c
        if g is not None:
            for i, c in enumerate(coeffs[n - 1]):
                new[i] = new[i] - g @ c
        length = K - n
        T_new = [T_cur[j + 1] - b @ T_cur[j] for j in range(length)]
        if g is not None:
            T_new = [t - g @ T_prev[j] for j, t in enumerate(T_new)]
        for j in range(n + 1):
            t = T_new[j]
            if exact:
                bad = t.max_abs() != 0
            else:
                scale = sum(float(c.max_abs()) * float(moms[i + j].max_abs()) for i, c in enumerate(new))
                bad = float(t.max_abs()) > ORTHO_TOL * scale
            if bad:
                raise RecurrenceError(
                    f"P_{n + 1} is not orthogonal to x^{j} (residual {float(t.max_abs()):.3g})"
                )
        coeffs.append(tuple(new))
        T_prev, T_cur = T_cur, T_new
        if n < n_max:
            hn = bilinear(T_cur, new, 0)
            _check_pd(hn, n + 1)
            h.append(hn)
            h_inv.append(mat_inverse(hn))
    return MopFamily(tuple(betas), tuple(gammas), tuple(h), tuple(coeffs))


def discretized_recurrence(w: WeightSpec, n_max: int, order: int | None = None) -> MopFamily:
    """Float monic recurrence by block Lanczos on a Gauss-Jacobi discretization.

    With ``order`` nodes the discrete inner product equals the continuous
    one for integrands up to degree ``2*order - 1``; the default covers
    ``<P_{n_max+1}, P_{n_max+1}>`` with a margin.  Writing the polynomial part
    at node ``q`` as ``G_q G_q^T``, a polynomial becomes the block row
    ``[P(x_q) G_q sqrt(w_q)]_q``; Lanczos with full reorthogonalization yields
    orthonormal recurrence blocks, converted to monic form through the
    leading coefficients ``K_n`` (``h_n = K_n^{-1} K_n^{-T}``).  The final
    orthonormality of the block basis is verified.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if order is None:
        order = order_for_degree(2 * n_max + 2 + w.degree)
    if order < n_max + 2:
        raise ValueError(f"{order} nodes cannot support degree {n_max + 1}")
    x, wts = gauss_jacobi(float(w.alpha), float(w.beta), order)
    N = w.N
    try:
        G = np.linalg.cholesky(w.poly_array(x)) * np.sqrt(wts)[:, None, None]
    except np.linalg.LinAlgError:
        raise WeightError("weight is not positive definite at a quadrature node") from None
    xs = np.repeat(x, N)

    def qr_rows(block):
        # block = R U with R lower triangular and orthonormal rows in U
        q, r = np.linalg.qr(block.T)
        return r.T, q.T

    R0, U0 = qr_rows(np.transpose(G, (1, 0, 2)).reshape(N, -1))
    U = [U0]
    K = [np.linalg.inv(R0)]
    betas, gammas, hs = [], [None], []
    A_prev = None
    for n in range(n_max + 1):
        Kn = K[n]
        Kinv = np.linalg.inv(Kn)
        hs.append(Mat.from_numpy(Kinv @ Kinv.T))
        _check_pd(hs[-1], n)
        V = U[n] * xs
        Bt = V @ U[n].T
        V = V - Bt @ U[n]
        if n > 0:
            V = V - A_prev.T @ U[n - 1]
            gammas.append(Mat.from_numpy(Kinv @ A_prev.T @ K[n - 1]))
        for _ in range(2):
            for Uk in U:
                V = V - (V @ Uk.T) @ Uk
        At, Un = qr_rows(V)
        if not np.all(np.isfinite(At)) or np.min(np.abs(np.diag(At))) == 0:
            raise RecurrenceError(f"Lanczos breakdown at degree {n + 1}")
        betas.append(Mat.from_numpy(Kinv @ Bt @ Kn))
        U.append(Un)
        K.append(np.linalg.solve(At, Kn))
        A_prev = At
    basis = np.vstack(U)
    loss = np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0])))
    if not loss < 1e-10:
        raise RecurrenceError(f"block basis lost orthonormality ({loss:.3g})")
    return MopFamily(tuple(betas), tuple(gammas), tuple(hs))


def stochastic_normalize(
    fam: MopFamily,
    lambdas: Sequence[Mat],
    stochastic: bool = False,
    tol: float = ROW_SUM_TOL,
) -> MopFamily:
    """Apply ``Q_n = L_n P_n L_0^{-1}``.

    ``A_n = L_n L_{n+1}^{-1}``, ``B_n = L_n beta_n L_n^{-1}``,
    ``C_n = L_n gamma_n L_{n-1}^{-1}`` and ``|Q_n|^2 = L_n h_n L_n^T``.  ``A_n``
    is produced for every ``n <= n_max`` with ``L_{n+1}`` supplied.  With
    ``stochastic=True`` the blocks must be nonnegative with unit row sums.
    """
    n_max = fam.n_max
    if len(lambdas) < n_max + 1:
        raise ValueError(f"need {n_max + 1} normalization matrices, got {len(lambdas)}")
    lambdas = tuple(lambdas[: n_max + 2])
    if fam.exact:
        if not all(L.exact for L in lambdas):
            raise MixedBackendError("float normalization for an exact family")
    else:
        lambdas = tuple(L.to_float() for L in lambdas)
    inv = [mat_inverse(L) for L in lambdas]
    A = tuple(lambdas[n] @ inv[n + 1] for n in range(min(n_max + 1, len(lambdas) - 1)))
    B = tuple(lambdas[n] @ fam.beta[n] @ inv[n] for n in range(n_max + 1))
    C = (None,) + tuple(lambdas[n] @ fam.gamma[n] @ inv[n - 1] for n in range(1, n_max + 1))
    norms = tuple(lambdas[n] @ fam.h[n] @ lambdas[n].T for n in range(n_max + 1))
    out = replace(fam, lambdas=lambdas, A=A, B=B, C=C, norms=norms)
    if stochastic:
        _check_stochastic(out, tol)
    return out


def _check_stochastic(fam: MopFamily, tol: float) -> None:
    for n in range(fam.n_max + 1):
        parts = [fam.B[n]]
        if n < len(fam.A):
            parts.append(fam.A[n])
        if n > 0:
            parts.append(fam.C[n])
        for p in parts:
            if min(p.entries) < (0 if fam.exact else -tol):
                raise RecurrenceError(f"negative entry in normalized blocks at level {n}")
        if n >= len(fam.A):
            continue
        total = parts[0]
        for p in parts[1:]:
            total = total + p
        for i, s in enumerate(total.row_sums()):
            if (fam.exact and s != 1) or (not fam.exact and abs(s - 1) > tol):
                raise RecurrenceError(f"row {i} of level {n} sums to {s}, not 1")


def as_model(fam: MopFamily, kind: Kind | str = Kind.DISCRETE) -> BlockTridiagonal:
    """Validated block-tridiagonal model from a normalized family."""
    if not fam.normalized:
        raise ValueError("family has no normalization")
    levels = []
    for n in range(fam.n_max + 1):
        levels.append(
            Level(fam.B[n], fam.A[n] if n < len(fam.A) else None, fam.C[n] if n else None)
        )
    return build_model(fam.N, kind, levels, exact=fam.exact)


def evaluate_Q(fam: MopFamily, x: Scalar, n_max: int | None = None) -> list[Mat]:
    """``Q_0(x)..Q_{n_max}(x)`` from ``Q_{n+1} = A_n^{-1}((xI - B_n) Q_n - C_n Q_{n-1})``.

    Unnormalized families give the monic values.
    """
    A, B, C = fam.recurrence()
    if n_max is None:
        n_max = len(A)
    if n_max > len(A):
        raise ValueError(f"family supports degree {len(A)} at most")
    if isinstance(x, float) and fam.exact:
        return evaluate_Q(fam.to_float(), x, n_max)
    exact = fam.exact
    xI = Mat.identity(fam.N, exact).scale(x)
    Q = [Mat.identity(fam.N, exact)]
    prev = None
    for n in range(n_max):
        nxt = (xI - B[n]) @ Q[n]
        if prev is not None:
            nxt = nxt - C[n] @ prev
        prev = Q[n]
        Q.append(mat_inverse(A[n]) @ nxt)
    return Q


def orthogonality_check(
    fam: MopFamily, w: WeightSpec, n_max: int | None = None, order: int | None = None
) -> np.ndarray:
    """Table ``r[n, m] = max|int Q_n Wt Q_m^T - delta_nm |Q_n|^2|`` by quadrature.

    ``Wt = L_0 W L_0^T`` for a normalized family, ``W`` otherwise.  The ``Q_n``
    are evaluated at the nodes through the three-term recurrence.
    """
    fam = fam.to_float()
    A, B, C = fam.recurrence()
    norms = fam.squared_norms()
    if n_max is None:
        n_max = min(len(A), len(norms) - 1)
    if n_max > len(A) or n_max > len(norms) - 1:
        raise ValueError("family too short for the requested degree")
    if order is None:
        order = order_for_degree(2 * n_max + w.degree) + 4
    x, wts = gauss_jacobi(float(w.alpha), float(w.beta), order)
    M = w.poly_array(x)
    if fam.normalized:
        L0 = fam.lambdas[0].to_numpy()
        M = np.einsum("ij,qjk,lk->qil", L0, M, L0)
    M = M * wts[:, None, None]
    N = fam.N
    Q = [np.broadcast_to(np.eye(N), (len(x), N, N)).copy()]
    for n in range(n_max):
        nxt = x[:, None, None] * Q[n] - np.einsum("ij,qjk->qik", B[n].to_numpy(), Q[n])
        if n > 0:
            nxt -= np.einsum("ij,qjk->qik", C[n].to_numpy(), Q[n - 1])
        Q.append(np.einsum("ij,qjk->qik", np.linalg.inv(A[n].to_numpy()), nxt))
    table = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        for m in range(n_max + 1):
            g = np.einsum("qij,qjk,qlk->il", Q[n], M, Q[m])
            if n == m:
                g = g - norms[n].to_numpy()
            table[n, m] = np.max(np.abs(g))
    return table
