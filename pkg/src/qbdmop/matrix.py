"""Small dense matrices over exact rationals or binary64 floats.

A :class:`Mat` holds one scalar realization for all of its entries: either
:class:`fractions.Fraction` (exact) or ``float``.  Python ints are accepted on
input and coerced to whichever realization the other entries use (rational
when the matrix has no floats).  Mixing ``Fraction`` and ``float`` entries, or
combining an exact matrix with a float one, raises :class:`MixedBackendError`.

The phase count in the target problems is tiny (2 in the worked example), so
every kernel here is a plain O(n^3) loop.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

import numpy as np

Scalar = Union[Fraction, float]

#: Relative pivot threshold for singularity on the float backend.
FLOAT_PIVOT_TOL = 1e-13

#: Default relative symmetry tolerance on the float backend.
FLOAT_SYM_TOL = 1e-11

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


class MixedBackendError(TypeError):
    """Exact and float scalars were combined."""


class DimensionError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    pass


def parse_scalar(text: str, exact: bool | None = None) -> Scalar:
    """Parse ``"p/q"``, an integer literal or a decimal float literal.

    With ``exact=None`` a rational literal (``"3"``, ``"-7/12"``) becomes a
    Fraction and anything else a float.  ``exact=True`` also accepts decimal
    literals such as ``"0.5"`` and converts them exactly; ``exact=False``
    always returns a float.
    """
    text = text.strip()
    m = _RATIONAL_RE.match(text)
    if m is not None:
        num, den = int(m.group(1)), int(m.group(2) or 1)
        if den == 0:
            raise ZeroDivisionError(f"zero denominator in {text!r}")
        value = Fraction(num, den)
        return float(value) if exact is False else value
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"cannot parse scalar {text!r}") from None
    if exact:
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {text!r} has no exact form")
        return Fraction(text)
    return value


def format_scalar(x: Scalar) -> str:
    """Render a Fraction as ``"p/q"`` (or ``"p"``) and a float with ``repr``."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def _coerce_row(values: Iterable, exact: bool) -> tuple:
    out = []
    for v in values:
        if isinstance(v, bool):
            raise TypeError("booleans are not matrix entries")
        if exact:
            if isinstance(v, float):
                raise MixedBackendError("float entry in exact matrix")
            if isinstance(v, Fraction):
                out.append(v)
            elif isinstance(v, (int, Rational)):
                out.append(Fraction(v))
            else:
                raise TypeError(f"unsupported entry type {type(v).__name__}")
        else:
            if isinstance(v, Fraction):
                raise MixedBackendError("Fraction entry in float matrix")
            out.append(float(v))
    return tuple(out)


def _detect_exact(rows: Sequence[Sequence]) -> bool:
    has_float = has_frac = False
    for row in rows:
        for v in row:
            if isinstance(v, (float, np.floating)):
                has_float = True
            elif isinstance(v, Fraction):
                has_frac = True
    if has_float and has_frac:
        raise MixedBackendError("matrix mixes Fraction and float entries")
    return not has_float


class Mat:
    """Immutable dense matrix.

    >>> Mat([[1, 2], [3, 4]]) @ Mat([[0, 1], [1, 0]])
    Mat([[2, 1], [4, 3]])
    """

    __slots__ = ("_rows", "_exact")

    def __init__(self, rows: Sequence[Sequence], exact: bool | None = None):
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise DimensionError("matrix must have at least one row and column")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        if exact is None:
            exact = _detect_exact(rows)
        self._exact = bool(exact)
        self._rows = tuple(_coerce_row(r, self._exact) for r in rows)

    @classmethod
    def _raw(cls, rows: tuple, exact: bool) -> "Mat":
        obj = cls.__new__(cls)
        obj._rows = rows
        obj._exact = exact
        return obj

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "Mat":
        one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
        return cls._raw(
            tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)),
            exact,
        )

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None, exact: bool = True) -> "Mat":
        zero = Fraction(0) if exact else 0.0
        cols = rows if cols is None else cols
        return cls._raw(tuple((zero,) * cols for _ in range(rows)), exact)

    @classmethod
    def diag(cls, values: Sequence, exact: bool | None = None) -> "Mat":
        n = len(values)
        zero = 0.0 if any(isinstance(v, float) for v in values) else 0
        return cls([[values[i] if i == j else zero for j in range(n)] for i in range(n)], exact)

    @classmethod
    def from_numpy(cls, array) -> "Mat":
        array = np.asarray(array, dtype=float)
        if array.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls._raw(tuple(tuple(float(v) for v in row) for row in array), False)

    # -- basic protocol --------------------------------------------------

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return len(self._rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self._rows), len(self._rows[0])

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def entries(self) -> tuple:
        """Row-major flat tuple of entries."""
        return tuple(v for row in self._rows for v in row)

    def tolist(self) -> list[list[Scalar]]:
        return [list(r) for r in self._rows]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self._exact == other._exact and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._exact, self._rows))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(format_scalar(v) for v in r) + "]" for r in self._rows)
        return f"Mat([{body}])"

    # -- conversions -----------------------------------------------------

    def to_float(self) -> "Mat":
        if not self._exact:
            return self
        return Mat._raw(tuple(tuple(float(v) for v in r) for r in self._rows), False)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self._rows], dtype=float)

    def like(self, other: "Mat") -> "Mat":
        """Return ``self`` in the realization of ``other`` (exact -> float only)."""
        if self._exact == other._exact:
            return self
        if other._exact:
            raise MixedBackendError("cannot convert a float matrix to exact")
        return self.to_float()

    # -- arithmetic ------------------------------------------------------

    def _check_same(self, other: "Mat") -> None:
        if self._exact != other._exact:
            raise MixedBackendError("operands use different scalar realizations")

    def __add__(self, other: "Mat") -> "Mat":
        if not isinstance(other, Mat):
            return NotImplemented
        self._check_same(other)
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return Mat._raw(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows)),
            self._exact,
        )

    def __sub__(self, other: "Mat") -> "Mat":
        if not isinstance(other, Mat):
            return NotImplemented
        self._check_same(other)
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return Mat._raw(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows)),
            self._exact,
        )

    def __neg__(self) -> "Mat":
        return Mat._raw(tuple(tuple(-a for a in r) for r in self._rows), self._exact)

    def scale(self, c) -> "Mat":
        if self._exact:
            if isinstance(c, float):
                raise MixedBackendError("float scale factor on exact matrix")
            c = Fraction(c)
        else:
            if isinstance(c, Fraction):
                c = float(c)
        return Mat._raw(tuple(tuple(c * a for a in r) for r in self._rows), self._exact)

    def __mul__(self, c) -> "Mat":
        if isinstance(c, Mat):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Mat") -> "Mat":
        if not isinstance(other, Mat):
            return NotImplemented
        return mat_mul(self, other)

    @property
    def T(self) -> "Mat":
        return Mat._raw(tuple(zip(*self._rows)), self._exact)

    def max_abs(self) -> Scalar:
        return max(abs(v) for r in self._rows for v in r)

    def trace(self) -> Scalar:
        if self.rows != self.cols:
            raise DimensionError("trace of a non-square matrix")
        return sum((self._rows[i][i] for i in range(self.rows)), self._zero())

    def _zero(self) -> Scalar:
        return Fraction(0) if self._exact else 0.0

    def row_sums(self) -> tuple:
        return tuple(sum(r, self._zero()) for r in self._rows)

    def vec_left(self, v: Sequence[Scalar]) -> tuple:
        """Row vector times matrix: ``v @ self``."""
        if len(v) != self.rows:
            raise DimensionError("vector length does not match matrix rows")
        zero = self._zero()
        out = []
        for j in range(self.cols):
            acc = zero
            for i, vi in enumerate(v):
                if vi:
                    acc += vi * self._rows[i][j]
            out.append(acc)
        return tuple(out)

    def vec_right(self, v: Sequence[Scalar]) -> tuple:
        """Matrix times column vector: ``self @ v``."""
        if len(v) != self.cols:
            raise DimensionError("vector length does not match matrix columns")
        return tuple(sum((a * b for a, b in zip(r, v)), self._zero()) for r in self._rows)


def mat_mul(a: Mat, b: Mat) -> Mat:
    if a._exact != b._exact:
        raise MixedBackendError("operands use different scalar realizations")
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    bcols = tuple(zip(*b._rows))
    zero = a._zero()
    rows = tuple(
        tuple(sum((x * y for x, y in zip(r, c)), zero) for c in bcols) for r in a._rows
    )
    return Mat._raw(rows, a._exact)


def transpose(a: Mat) -> Mat:
    return a.T


def is_symmetric(a: Mat, tol: float | None = None) -> bool:
    """Exact equality for rational matrices, ``max|a - a^T| <= tol * max|a|`` for floats.

    ``tol`` defaults to :data:`FLOAT_SYM_TOL` on the float backend; pass 0 for
    a strict comparison.
    """
    if a.rows != a.cols:
        return False
    if a.exact:
        return a == a.T
    if tol is None:
        tol = FLOAT_SYM_TOL
    scale = a.max_abs() or 1.0
    return (a - a.T).max_abs() <= tol * scale


def _gauss_jordan(a: Mat, rhs: list[list]) -> list[list]:
    """Solve ``a X = rhs`` in place on copies; rhs is a list of rows."""
    n = a.rows
    if a.cols != n:
        raise DimensionError("matrix must be square")
    m = [list(r) for r in a._rows]
    x = [list(r) for r in rhs]
    exact = a.exact
    if not exact:
        thresh = FLOAT_PIVOT_TOL * (a.max_abs() or 1.0)
    for col in range(n):
        if exact:
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(m[r][col]))
            if abs(m[piv][col]) <= thresh:
                piv = None
        if piv is None:
            raise SingularMatrixError(f"singular matrix (no pivot in column {col})")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            x[col], x[piv] = x[piv], x[col]
        p = m[col][col]
        prow, xrow = m[col], x[col]
        for r in range(n):
            if r == col:
                continue
            f = m[r][col]
            if not f:
                continue
            f = f / p
            mr = m[r]
            for c in range(col, n):
                mr[c] -= f * prow[c]
            xr = x[r]
            for c in range(len(xr)):
                xr[c] -= f * xrow[c]
    for r in range(n):
        p = m[r][r]
        x[r] = [v / p for v in x[r]]
    return x


def mat_inverse(a: Mat) -> Mat:
    """Inverse by Gauss-Jordan elimination.

    Raises :class:`SingularMatrixError` when no nonzero pivot exists (exact)
    or the best pivot is below ``1e-13 * max|a|`` (float).
    """
    ident = Mat.identity(a.rows, a.exact)
    return Mat._raw(tuple(tuple(r) for r in _gauss_jordan(a, ident.tolist())), a.exact)


def solve(a: Mat, b: Mat) -> Mat:
    """Solve ``a x = b`` for a square nonsingular ``a``."""
    if a.exact != b.exact:
        raise MixedBackendError("operands use different scalar realizations")
    if b.rows != a.rows:
        raise DimensionError("right-hand side has wrong row count")
    return Mat._raw(tuple(tuple(r) for r in _gauss_jordan(a, b.tolist())), a.exact)


def det(a: Mat) -> Scalar:
    if a.rows != a.cols:
        raise DimensionError("determinant of a non-square matrix")
    m = [list(r) for r in a._rows]
    n = a.rows
    d = Fraction(1) if a.exact else 1.0
    for col in range(n):
        if a.exact:
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(m[r][col]))
            if m[piv][col] == 0:
                piv = None
        if piv is None:
            return a._zero()
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            d = -d
        p = m[col][col]
        d *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return d


def leading_minors(a: Mat) -> list[Scalar]:
    n = a.rows
    return [det(Mat._raw(tuple(r[:k] for r in a._rows[:k]), a.exact)) for k in range(1, n + 1)]


def ldlt(a: Mat) -> tuple[Mat, tuple]:
    """Square-root-free factorization ``a = L diag(d) L^T`` with unit lower ``L``.

    Raises :class:`NotPositiveDefiniteError` if a pivot is not positive
    (float: not above ``1e-13 * trace``).
    """
    if not is_symmetric(a):
        raise NotPositiveDefiniteError("LDL^T needs a symmetric matrix")
    n = a.rows
    zero, one = (Fraction(0), Fraction(1)) if a.exact else (0.0, 1.0)
    L = [[one if i == j else zero for j in range(n)] for i in range(n)]
    d = [zero] * n
    thresh = zero if a.exact else FLOAT_PIVOT_TOL * abs(a.trace())
    for j in range(n):
        dj = a[j, j] - sum((L[j][k] ** 2 * d[k] for k in range(j)), zero)
        if dj <= thresh:
            raise NotPositiveDefiniteError(f"non-positive pivot {dj} at index {j}")
        d[j] = dj
        for i in range(j + 1, n):
            s = a[i, j] - sum((L[i][k] * L[j][k] * d[k] for k in range(j)), zero)
            L[i][j] = s / dj
    return Mat._raw(tuple(tuple(r) for r in L), a.exact), tuple(d)


def is_positive_definite(a: Mat) -> bool:
    """Exact: every leading principal minor is positive.  Float: LDL^T pivots."""
    if a.rows != a.cols or not is_symmetric(a):
        return False
    if a.exact:
        return all(m > 0 for m in leading_minors(a))
    try:
        ldlt(a)
    except NotPositiveDefiniteError:
        return False
    return True


def cholesky(a: Mat) -> Mat:
    """Upper-triangular ``U`` with ``U^T U = a`` (float backend only).

    Exact matrices have no rational square root in general; use :func:`ldlt`.
    """
    if a.exact:
        raise MixedBackendError("cholesky needs the float backend; use ldlt for exact input")
    L, d = ldlt(a)
    n = a.rows
    sq = [math.sqrt(v) for v in d]
    return Mat._raw(
        tuple(tuple(L[j, i] * sq[i] if j >= i else 0.0 for j in range(n)) for i in range(n)),
        False,
    )
