"""The two-phase example family W(alpha, beta, k) on [0, 1].

Besides the weight and its stochastic normalization ``Delta_n``, this module
carries closed forms at ``alpha = beta = 0, k = 1/2`` for the recurrence
blocks, the squared norms and the invariant blocks ``Pi_n e``.  They are
stored as factored polynomials in ``n`` so they evaluate exactly at any level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .invariant import InvariantVector, invariant_vector
from .matrix import Mat, Scalar, det
from .model import BlockTridiagonal, Level, build_model
from .mop import (
    MopFamily,
    WeightSpec,
    as_model,
    discretized_recurrence,
    monic_recurrence,
    moments,
    stochastic_normalize,
)
from .potential import PotentialSequence, potential_coefficients


class ParameterError(ValueError):
    pass


def _is_nonneg_int(v) -> bool:
    return not isinstance(v, float) and Fraction(v).denominator == 1 and v >= 0


@dataclass(frozen=True)
class FamilyParams:
    alpha: Scalar
    beta: Scalar
    k: Scalar

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ParameterError(f"need alpha, beta > -1 (got {self.alpha}, {self.beta})")
        if not (0 < self.k < self.beta + 1):
            raise ParameterError(f"need 0 < k < beta + 1 (got k={self.k}, beta={self.beta})")

    @classmethod
    def make(cls, alpha, beta, k, exact: bool | None = None) -> "FamilyParams":
        """Build from numbers or strings, exact when possible unless ``exact=False``.

        ``exact=True`` requires nonnegative integer ``alpha`` and ``beta``.
        """
        vals = [Fraction(str(v)) if isinstance(v, (str, float)) else Fraction(v) for v in (alpha, beta, k)]
        if exact is None:
            exact = _is_nonneg_int(vals[0]) and _is_nonneg_int(vals[1])
        if exact:
            if not (_is_nonneg_int(vals[0]) and _is_nonneg_int(vals[1])):
                raise ParameterError(
                    "the exact backend needs nonnegative integer alpha and beta "
                    f"(got alpha={alpha}, beta={beta})"
                )
            return cls(*vals)
        return cls(*(float(v) for v in vals))

    @property
    def exact(self) -> bool:
        return (
            not any(isinstance(v, float) for v in (self.alpha, self.beta, self.k))
            and _is_nonneg_int(self.alpha)
            and _is_nonneg_int(self.beta)
        )

    def as_float(self) -> "FamilyParams":
        return FamilyParams(float(self.alpha), float(self.beta), float(self.k))


GOLDEN = FamilyParams(Fraction(0), Fraction(0), Fraction(1, 2))


def is_golden(p: FamilyParams) -> bool:
    return (p.alpha, p.beta, p.k) == (0, 0, 0.5)


def _one(p: FamilyParams):
    return Fraction(1) if p.exact else 1.0


def weight_spec(p: FamilyParams) -> WeightSpec:
    """``x**alpha (1-x)**beta [[k x^2 + c, c(1-x)], [c(1-x), c(1-x)^2]]`` with ``c = beta - k + 1``."""
    one = _one(p)
    c = (p.beta - p.k + 1) * one
    k = p.k * one
    zero = 0 * one
    poly = (
        Mat([[c, c], [c, c]]),
        Mat([[zero, -c], [-c, -2 * c]]),
        Mat([[k, zero], [zero, c]]),
    )
    return WeightSpec(p.alpha, p.beta, poly)


def weight_at(p: FamilyParams, x: Scalar) -> Mat:
    return weight_spec(p).at(x)


def pochhammer(z, n: int):
    """Rising factorial ``z (z+1) ... (z+n-1)``; 1 for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1
    for i in range(n):
        out *= z + i
    return out


def _pochhammer_ratio(num, den, n: int):
    # (num)_n / (den)_n term by term, so floats neither overflow nor underflow.
    out = 1
    for i in range(n):
        out *= (num + i) / (den + i)
    return out


def _nonzero(value, what: str, n: int):
    if value == 0:
        raise ParameterError(f"zero denominator factor {what} at n={n}")
    return value


def delta_coefficients(p: FamilyParams, n: int) -> tuple[Scalar, Scalar]:
    """The scalars ``(a_n, b_n)`` entering ``Delta_n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    one = _one(p)
    a, b, k = p.alpha * one, p.beta * one, p.k * one
    s = a + b
    ratio = _pochhammer_ratio(s + n + 3, b + 2, n) if not p.exact else Fraction(
        pochhammer(s + n + 3, n), pochhammer(b + 2, n)
    )
    common = n * (s + n + 2) + k * (a + 1)
    den_a = n * s**2 + n * (2 * n + 5) * s + n * (n + 2) * (n + 3) + k * (
        2 * a * b + 2 * b - k * (n + 2) + a**2 + 5 * a - 2 * k * a - n**2 + 4
    )
    den_b = (n**2 + 2 * n * k) * s + n * (n + 5) * k + k**2 * (a - n + 1) + n**2 * (n + 3)
    a_n = -ratio * (s - k + n + 3) * common / _nonzero(den_a, "in a_n", n)
    b_n = ratio * (k + n) * common / _nonzero(den_b, "in b_n", n)
    return a_n, b_n


def delta_n(p: FamilyParams, n: int) -> Mat:
    """The normalization matrix ``Delta_n`` (``Delta_0`` at ``n = 0``)."""
    one = _one(p)
    a, b, k = p.alpha * one, p.beta * one, p.k * one
    a_n, b_n = delta_coefficients(p, n)
    t = n**2 + n * (a + b + 3) + k * (a + 2 * b - 2 * k + 4)
    m11 = -a_n * t / _nonzero(k * (a + b - k + n + 3), "k(alpha+beta-k+n+3)", n)
    m22 = -b_n * t / _nonzero((k + n) * (b - k + 1), "(k+n)(beta-k+1)", n)
    return Mat([[m11, a_n], [b_n, m22]])


def delta0(p: FamilyParams) -> Mat:
    """``Delta_0`` from its own closed form (independent of :func:`delta_n`)."""
    one = _one(p)
    a, b, k = p.alpha * one, p.beta * one, p.k * one
    return Mat(
        [
            [one, -(a + b - k + 3) / (a + 2 * b - 2 * k + 4)],
            [one, -(a + 2 * b - 2 * k + 4) / (b - k + 1)],
        ]
    )


# -- closed forms at alpha = beta = 0, k = 1/2 ------------------------------
# Polynomials in n, highest degree first.

_N = (1, 0)
_N1 = (1, 1)
_N2 = (1, 2)
_N3 = (1, 3)
_2N1 = (2, 1)
_2N3 = (2, 3)
_2N5 = (2, 5)
_Q1 = (2, 4, 1)
_Q2 = (2, 8, 7)
_Q3 = (4, 10, 3)
_CU = (4, 14, 9, 1)
_R1 = (16, 160, 572, 860, 463)
_R2 = (16, 96, 188, 132, 31)
_R3 = (16, 32, -4, -20, 7)
_S = (4, 2, -3)
_T = (4, 2, -7, 2)
_U = (8, 32, 36, 8, -5)
_V = (4, 26, 49, 28)
_W = (4, 18, 17)
_E3 = (2, 0, -1)


def _poly(c: Sequence[int], n: int) -> int:
    acc = 0
    for v in c:
        acc = acc * n + v
    return acc


def _rf(n: int, scale, num: Sequence, den: Sequence) -> Fraction:
    """``scale * prod(num) / prod(den)``; factors are coefficient tuples or (tuple, power)."""

    def prod(factors):
        out = 1
        for f in factors:
            if isinstance(f[0], tuple):
                poly, power = f
            else:
                poly, power = f, 1
            out *= _poly(poly, n) ** power
        return out

    return Fraction(scale) * Fraction(prod(num), prod(den))


@lru_cache(maxsize=4096)
def golden_A(n: int) -> Mat:
    if n < 0:
        raise ValueError("A_n needs n >= 0")
    a11 = _rf(n, Fraction(1, 2), [(_N3, 2), _Q1, _W, (16, 128, 348, 368, 117)],
              [_N2, _2N3, _Q2, _Q3, _R1])
    a12 = _rf(n, 2, [_N3, _Q1, (2, 12, 17), _V], [_N2, _2N3, _Q2, _Q3, _R1])
    a21 = _rf(n, 2, [(_N3, 2), (_Q1, 2), _W], [_2N3, _Q2, _CU, _R1])
    a22 = _rf(n, Fraction(1, 2), [_N3, _Q1, _V, (16, 128, 348, 368, 125)],
              [_2N3, _Q2, _CU, _R1])
    return Mat([[a11, a12], [a21, a22]])


@lru_cache(maxsize=4096)
def golden_B(n: int) -> Mat:
    if n < 0:
        raise ValueError("B_n needs n >= 0")
    d = [_Q1, _Q2, _R2]
    b11 = _rf(n, 1, [(32, 384, 1928, 5256, 8450, 8148, 4577, 1365, 163)], d)
    b12 = _rf(n, Fraction(1, 2), [_CU, (32, 320, 1240, 2320, 2114, 834, 121)], [_N2, _Q3] + d)
    b21 = _rf(n, Fraction(1, 2), [_N2, _Q3, (32, 256, 760, 1040, 674, 186, 13)], [_CU] + d)
    b22 = _rf(n, 1, [(2, 6, 3), (4, 18, 21, 6), (4, 18, 21, 3)], d)
    return Mat([[b11, b12], [b21, b22]])


@lru_cache(maxsize=4096)
def golden_C(n: int) -> Mat:
    if n < 1:
        raise ValueError("C_n is defined for n >= 1 only")
    e = [_2N3, _E3, _R3]
    c11 = _rf(n, Fraction(1, 2), [_N, _N1, _S, (32, 192, 328, 32, -226, -4, 33)], [_N2, _Q3] + e)
    c12 = _rf(n, 1, [_N, _T, _U], [_N2, _Q3] + e)
    c21 = _rf(n, 1, [_N, _N1, _S, _U], [_CU] + e)
    c22 = _rf(n, Fraction(1, 2), [_N, _T, (32, 192, 392, 288, -34, -132, -43)], [_CU] + e)
    return Mat([[c11, c12], [c21, c22]])


def golden_blocks(n: int) -> Level:
    """Recurrence blocks at level ``n`` (``C`` is ``None`` at level 0)."""
    return Level(golden_B(n), golden_A(n), golden_C(n) if n > 0 else None)


@lru_cache(maxsize=4096)
def golden_norms(n: int) -> Mat:
    """Squared norm ``|Q_n|^2`` at ``alpha = beta = 0, k = 1/2`` (not diagonal)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    n11 = _rf(n, 1, [_Q1, (16, 160, 628, 1212, 1173, 514, 79)], [_N1, _2N3, (_Q3, 2), (_N2, 3)])
    off = _rf(n, Fraction(-1, 2), [_2N1, _2N5, _Q1], [_N1, (_N2, 2), _Q3, _CU])
    n22 = _rf(n, 1, [_Q1, (16, 128, 388, 564, 417, 152, 22)], [_N1, _N2, _2N3, (_CU, 2)])
    return Mat([[n11, off], [off, n22]])


def golden_pi_block(n: int) -> tuple[Fraction, Fraction]:
    """``Pi_n e`` at ``alpha = beta = 0, k = 1/2``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = [_Q1, _Q2, _R2]
    p1 = _rf(n, 2, [(_N1, 2), (_N2, 2), _2N3, _Q3, (4, 14, 9)], d)
    p2 = _rf(n, 2, [_N1, _N2, _2N3, _CU, (4, 22, 33, 8)], d)
    return p1, p2


def golden_model(levels: int, exact: bool = True) -> BlockTridiagonal:
    """Validated golden model on levels ``0..levels-1`` with a closed-form generator."""
    if levels < 1:
        raise ValueError("need at least one level")
    m = build_model(2, "discrete", [golden_blocks(n) for n in range(levels)],
                    generator=golden_blocks, exact=True)
    return m if exact else m.to_float()


# -- classification ----------------------------------------------------------


class Recurrence(str, enum.Enum):
    NULL_RECURRENT = "null recurrent"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class Classification:
    recurrence: Recurrence
    unique: bool | None

    @property
    def label(self) -> str:
        if self.unique:
            return f"{self.recurrence.value}; unique invariant distribution"
        return f"{self.recurrence.value}; uniqueness unknown"


def classify(p: FamilyParams) -> Classification:
    """Never positive recurrent: null recurrent iff ``beta <= 0``, else transient.

    Recurrence makes the invariant measure unique; for the transient case no
    uniqueness claim is made.
    """
    if p.beta <= 0:
        return Classification(Recurrence.NULL_RECURRENT, True)
    return Classification(Recurrence.TRANSIENT, None)


# -- the full pipeline -------------------------------------------------------


@dataclass(frozen=True)
class PipelineRun:
    params: FamilyParams
    family: MopFamily
    model: BlockTridiagonal
    potentials: PotentialSequence
    invariant: InvariantVector

    @property
    def weight(self) -> WeightSpec:
        return weight_spec(self.params)


def normalized_family(
    p: FamilyParams, n_max: int, exact: bool | None = None, stochastic: bool = True
) -> MopFamily:
    """Monic family of ``W`` normalized by ``Delta_n``; ``A`` covers ``0..n_max``.

    With ``stochastic=True`` the blocks must be nonnegative with unit row
    sums.  Row sums are one for every admissible triple, but for larger
    ``beta`` relative to ``k`` the level-0 blocks pick up a negative entry
    (for instance at ``(1, 2, 1/2)``); pass ``stochastic=False`` to study
    such weights as polynomial families only.
    """
    if exact is None:
        exact = p.exact
    if exact and not p.exact:
        raise ParameterError("exact pipeline needs nonnegative integer alpha, beta and rational k")
    if not exact:
        p = p.as_float()
    w = weight_spec(p)
    if exact:
        fam = monic_recurrence(moments(w, 2 * n_max + 1, exact=True), n_max)
    else:
        fam = discretized_recurrence(w, n_max)
    lambdas = [delta_n(p, n) for n in range(n_max + 2)]
    for n, L in enumerate(lambdas):
        d = det(L)
        if d == 0:
            raise ParameterError(f"Delta_{n} is singular")
    return stochastic_normalize(fam, lambdas, stochastic=stochastic)


def run_pipeline(p: FamilyParams, levels: int, exact: bool | None = None) -> PipelineRun:
    """Weight -> monic recurrence -> normalization -> model -> potentials -> invariant.

    The model covers levels ``0..levels``.
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    fam = normalized_family(p, levels, exact)
    model = as_model(fam)
    ps = potential_coefficients(model, fam.pi0(), levels)
    return PipelineRun(p, fam, model, ps, invariant_vector(ps))
