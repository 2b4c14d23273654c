"""Block-tridiagonal quasi-birth-and-death models.

A model stores a finite prefix of levels ``(B_n, A_n, C_n)`` and, optionally,
a generator callback that produces any further level on demand.  Discrete
models are stochastic (rows of ``C_n + B_n + A_n`` sum to one); continuous
models are generators (rows sum to zero, off-diagonal rates nonnegative).
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .matrix import (
    FLOAT_PIVOT_TOL,
    DimensionError,
    Mat,
    MixedBackendError,
    Scalar,
    det,
    parse_scalar,
)

#: Absolute row-sum tolerance on the float backend.
ROW_SUM_TOL = 1e-12


class Kind(str, enum.Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


class ModelError(ValueError):
    """A model violates a structural invariant.

    ``level`` and ``row`` locate the failure when it is tied to a block row.
    """

    def __init__(self, message: str, level: int | None = None, row: int | None = None):
        where = []
        if level is not None:
            where.append(f"level {level}")
        if row is not None:
            where.append(f"row {row}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.reason = message
        self.level = level
        self.row = row


@dataclass(frozen=True)
class Level:
    B: Mat
    A: Mat | None = None
    C: Mat | None = None


@dataclass(frozen=True)
class LevelVector:
    """Row vector partitioned into per-level blocks of length N."""

    blocks: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        if blocks and len({len(b) for b in blocks}) != 1:
            raise DimensionError("all blocks must have the same length")
        object.__setattr__(self, "blocks", blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, n):
        return self.blocks[n]

    def __iter__(self):
        return iter(self.blocks)

    @property
    def N(self) -> int:
        return len(self.blocks[0]) if self.blocks else 0

    def flat(self) -> tuple[Scalar, ...]:
        return tuple(v for b in self.blocks for v in b)

    def scaled(self, c) -> "LevelVector":
        return type(self)(tuple(tuple(c * v for v in b) for b in self.blocks))

    def __add__(self, other: "LevelVector") -> "LevelVector":
        if len(other) != len(self):
            raise DimensionError("level vectors of different length")
        return LevelVector(
            tuple(tuple(a + b for a, b in zip(x, y)) for x, y in zip(self.blocks, other.blocks))
        )

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(v) for v in b] for b in self.blocks], dtype=float)


@dataclass(frozen=True)
class BlockTridiagonal:
    """A validated QBD model; build it with :func:`build_model`."""

    N: int
    kind: Kind
    levels: tuple[Level, ...]
    exact: bool
    generator: Callable[[int], Level] | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.levels)

    def level(self, n: int) -> Level:
        if n < 0:
            raise IndexError("negative level")
        if n < len(self.levels):
            return self.levels[n]
        if self.generator is None:
            raise ModelError(f"level {n} not stored and no generator available")
        lev = _coerce_level(self.generator(n), self.N, self.exact, n)
        _validate_level(lev, n, self.N, self.kind, self.exact, ROW_SUM_TOL, final=False)
        return lev

    def A(self, n: int) -> Mat:
        a = self.level(n).A
        if a is None:
            if self.generator is not None:
                a = _coerce_level(self.generator(n), self.N, self.exact, n).A
            if a is None:
                raise ModelError("A block not available", level=n)
        return a

    def B(self, n: int) -> Mat:
        return self.level(n).B

    def C(self, n: int) -> Mat:
        if n == 0:
            raise ModelError("level 0 has no C block", level=0)
        c = self.level(n).C
        if c is None:
            raise ModelError("C block not available", level=n)
        return c

    def available(self, count: int) -> bool:
        """True when levels ``0..count-1`` can be produced."""
        return self.generator is not None or count <= len(self.levels)

    def extended(self, count: int) -> "BlockTridiagonal":
        """Materialize and validate levels ``0..count-1``."""
        if count <= len(self.levels):
            return self
        if self.generator is None:
            raise ModelError(f"model stores {len(self.levels)} levels, {count} requested")
        blocks = list(self.levels) + [self.generator(n) for n in range(len(self.levels), count)]
        return build_model(self.N, self.kind, blocks, generator=self.generator, exact=self.exact)

    def to_float(self) -> "BlockTridiagonal":
        if not self.exact:
            return self
        conv = lambda m: None if m is None else m.to_float()  # noqa: E731
        levels = tuple(Level(conv(l.B), conv(l.A), conv(l.C)) for l in self.levels)
        gen = None
        if self.generator is not None:
            g = self.generator

            def gen(n, _g=g):
                lev = _coerce_level(_g(n), self.N, True, n)
                return Level(conv(lev.B), conv(lev.A), conv(lev.C))

        return BlockTridiagonal(self.N, self.kind, levels, False, gen)


def _to_mat(value, exact: bool | None) -> Mat:
    if isinstance(value, Mat):
        return value
    rows = [[parse_scalar(v, exact) if isinstance(v, str) else v for v in row] for row in value]
    if exact is False:
        rows = [[float(v) for v in row] for row in rows]
    return Mat(rows, exact)


def _coerce_level(raw, N: int, exact: bool | None, n: int) -> Level:
    if isinstance(raw, Level):
        B, A, C = raw.B, raw.A, raw.C
    elif isinstance(raw, Mapping):
        B, A, C = raw.get("B"), raw.get("A"), raw.get("C")
    else:
        B, A, C = raw
    if B is None:
        raise ModelError("missing B block", level=n)
    mats = []
    for name, m in (("B", B), ("A", A), ("C", C)):
        if m is None:
            mats.append(None)
            continue
        m = _to_mat(m, exact)
        if m.shape != (N, N):
            raise ModelError(f"{name} block has shape {m.shape}, expected {(N, N)}", level=n)
        if exact is not None and m.exact != exact:
            if exact:
                raise MixedBackendError(f"float {name} block at level {n} in exact model")
            m = m.to_float()
        mats.append(m)
    return Level(mats[0], mats[1], mats[2])


def _nonsingular(m: Mat) -> bool:
    d = det(m)
    if m.exact:
        return d != 0
    scale = m.max_abs() ** m.rows
    return abs(d) > FLOAT_PIVOT_TOL * scale if scale else False


def _irreducibility_hint(m: Mat, name: str, n: int) -> None:
    zero_row = any(all(v == 0 for v in r) for r in m)
    zero_col = any(all(v == 0 for v in m.column(j)) for j in range(m.cols))
    if zero_row or zero_col:
        warnings.warn(
            f"{name}_{n} has a zero row or column; the chain may be reducible",
            stacklevel=4,
        )


def _validate_level(lev: Level, n: int, N: int, kind: Kind, exact: bool, tol: float, final: bool):
    if n > 0 and lev.C is None:
        raise ModelError("missing C block", level=n)
    if n == 0 and lev.C is not None:
        raise ModelError("level 0 must not have a C block", level=0)
    if lev.A is None and not final:
        raise ModelError("missing A block before the last level", level=n)

    for name, m in (("B", lev.B), ("A", lev.A), ("C", lev.C)):
        if m is None:
            continue
        for i in range(N):
            for j in range(N):
                if kind is Kind.CONTINUOUS and name == "B" and i == j:
                    continue
                if m[i, j] < 0:
                    raise ModelError(f"negative entry in {name}[{i},{j}]", level=n, row=i)

    for name, m in (("A", lev.A), ("C", lev.C)):
        if m is None:
            continue
        _irreducibility_hint(m, name, n)
        if not _nonsingular(m):
            raise ModelError(f"singular {name} block", level=n)

    if lev.A is None:
        return  # truncated final level: the row sum needs A_n
    total = lev.B + lev.A
    if lev.C is not None:
        total = total + lev.C
    target = 1 if kind is Kind.DISCRETE else 0
    for i, s in enumerate(total.row_sums()):
        bad = s != target if exact else abs(s - target) > tol
        if bad:
            raise ModelError(f"row sum {s} != {target}", level=n, row=i)


def build_model(
    N: int,
    kind: Kind | str,
    blocks: Sequence,
    generator: Callable[[int], Level] | None = None,
    exact: bool | None = None,
    tol: float = ROW_SUM_TOL,
) -> BlockTridiagonal:
    """Validate level data and return an immutable :class:`BlockTridiagonal`.

    ``blocks`` items may be :class:`Level` objects, mappings with ``"B"``,
    ``"A"``, ``"C"`` keys, or ``(B, A, C)`` triples; block values are
    :class:`Mat` or nested lists (entries may be ``"p/q"`` strings).  The last
    level may omit ``A``.  Raises :class:`ModelError` on the first violated
    invariant, naming the level and row.
    """
    kind = Kind(kind)
    if N < 1:
        raise ModelError("phase count must be positive")
    if not blocks:
        raise ModelError("at least one level is required")
    levels = []
    for n, raw in enumerate(blocks):
        lev = _coerce_level(raw, N, exact, n)
        if exact is None:
            exact = lev.B.exact
        levels.append(lev)
    for n, lev in enumerate(levels):
        _validate_level(lev, n, N, kind, exact, tol, final=(n == len(levels) - 1))
    return BlockTridiagonal(N, kind, tuple(levels), exact, generator)


def row_apply(v: LevelVector, m: BlockTridiagonal, levels: int) -> LevelVector:
    """Blocks ``0..levels-1`` of ``v M`` for the block-tridiagonal ``M``.

    Block k is ``v_{k-1} A_{k-1} + v_k B_k + v_{k+1} C_{k+1}``; the last block
    of ``v`` is only used through ``C``, so ``v`` must carry ``levels + 1``
    blocks.
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    if len(v) < levels + 1:
        raise ModelError(f"vector has {len(v)} blocks, {levels + 1} needed")
    if not m.available(levels + 1):
        raise ModelError(f"model has {len(m)} levels, {levels + 1} needed")
    out = []
    for k in range(levels):
        acc = m.B(k).vec_left(v[k])
        if k > 0:
            acc = tuple(a + b for a, b in zip(acc, m.A(k - 1).vec_left(v[k - 1])))
        acc = tuple(a + b for a, b in zip(acc, m.C(k + 1).vec_left(v[k + 1])))
        out.append(acc)
    return LevelVector(tuple(out))


def _lumped_blocks(m: BlockTridiagonal, L: int) -> Iterable[tuple[int, int, Mat]]:
    if m.kind is not Kind.DISCRETE:
        raise ModelError("lumped truncation needs a discrete-time model")
    if L < 1:
        raise ModelError("truncation level must be at least 1")
    if not m.available(L + 1):
        raise ModelError(f"model has {len(m)} levels, {L + 1} needed")
    for n in range(L + 1):
        B = m.B(n)
        if n == L:
            B = B + m.A(n)
        yield n, n, B
        if n < L:
            yield n, n + 1, m.A(n)
        if n > 0:
            yield n, n - 1, m.C(n)


def truncate_lumped(m: BlockTridiagonal, L: int) -> Mat:
    """Finite stochastic matrix on levels ``0..L`` with ``A_L`` folded into ``B_L``."""
    N = m.N
    size = (L + 1) * N
    zero = Fraction(0) if m.exact else 0.0
    rows = [[zero] * size for _ in range(size)]
    for bi, bj, blk in _lumped_blocks(m, L):
        for i in range(N):
            rows[bi * N + i][bj * N : bj * N + N] = blk.row(i)
    return Mat(rows, m.exact)


def truncate_lumped_array(m: BlockTridiagonal, L: int) -> np.ndarray:
    """Float ``numpy`` version of :func:`truncate_lumped`."""
    N = m.N
    out = np.zeros(((L + 1) * N, (L + 1) * N))
    for bi, bj, blk in _lumped_blocks(m, L):
        out[bi * N : bi * N + N, bj * N : bj * N + N] = blk.to_numpy()
    return out


# -- JSON model files -------------------------------------------------------


def _json_entry(v):
    if isinstance(v, str):
        return parse_scalar(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelError(f"bad matrix entry {v!r}")
    return v


def _json_matrix(raw) -> list[list]:
    return [[_json_entry(v) for v in row] for row in raw]


def _all_exact(data: Mapping) -> bool:
    for blk in data["blocks"]:
        for key in ("B", "A", "C"):
            for row in blk.get(key) or []:
                if any(isinstance(v, float) for v in row):
                    return False
    return not any(isinstance(v, float) for row in data.get("pi0") or [] for v in row)


def model_from_json(data: Mapping, exact: bool | None = None) -> tuple[BlockTridiagonal, Mat | None]:
    """Parse the JSON model schema; returns the model and the optional ``pi0``.

    ``exact=None`` keeps rational data exact and uses floats otherwise.
    ``exact=True`` with float literals in the file raises :class:`MixedBackendError`.
    """
    try:
        kind = Kind(data.get("kind", "discrete"))
        N = int(data["N"])
        raw_blocks = data["blocks"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelError(f"malformed model file: {exc}") from None
    file_exact = _all_exact(data)
    if exact is None:
        exact = file_exact
    elif exact and not file_exact:
        raise MixedBackendError("exact backend requested but the model file has float entries")

    def conv(raw):
        rows = _json_matrix(raw)
        if not exact:
            rows = [[float(v) for v in r] for r in rows]
        return Mat(rows, exact)

    blocks = []
    for blk in raw_blocks:
        blocks.append(
            Level(
                conv(blk["B"]),
                conv(blk["A"]) if blk.get("A") is not None else None,
                conv(blk["C"]) if blk.get("C") is not None else None,
            )
        )
    model = build_model(N, kind, blocks, exact=exact)
    pi0 = conv(data["pi0"]) if data.get("pi0") is not None else None
    return model, pi0


def load_model(path: str | Path, exact: bool | None = None) -> tuple[BlockTridiagonal, Mat | None]:
    with open(path) as fh:
        return model_from_json(json.load(fh), exact)


def model_to_json(m: BlockTridiagonal, pi0: Mat | None = None) -> dict:
    def enc(mat: Mat):
        if mat.exact:
            return [[str(v) for v in r] for r in mat]
        return [list(r) for r in mat]

    blocks = []
    for n, lev in enumerate(m.levels):
        blk = {"B": enc(lev.B)}
        if lev.A is not None:
            blk["A"] = enc(lev.A)
        if lev.C is not None:
            blk["C"] = enc(lev.C)
        blocks.append(blk)
    out = {"kind": m.kind.value, "N": m.N, "blocks": blocks}
    if pi0 is not None:
        out["pi0"] = enc(pi0)
    return out
