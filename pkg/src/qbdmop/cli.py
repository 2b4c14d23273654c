"""Command-line interface.

Commands:
    invariant  invariant vector blocks 0..levels as a (level, phase, value) table
    verify     run the identity checks and print one pass/fail line per check
    figure     the (n, pi1, pi2) plot data of the golden example (or any 2-phase run)
    oracle     compare with the stationary vector of a lumped truncation

The source is either a parameter triple (``--alpha --beta --k``; default
``0 0 1/2``) or a JSON model file (``--model``).  Exit codes: 0 success,
1 failed check or invalid model, 2 usage error or backend mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .example import (
    FamilyParams,
    classify,
    golden_blocks,
    golden_norms,
    golden_pi_block,
    is_golden,
    run_pipeline,
)
from .invariant import (
    InvariantError,
    brute_force_invariant,
    invariant_vector,
    rescaled_relative_error,
    stationarity_residual,
)
from .matrix import Mat, MixedBackendError, format_scalar
from .model import BlockTridiagonal, Kind, ModelError, load_model
from .mop import RecurrenceError, WeightError
from .potential import PotentialError, check_symmetry_conditions, potential_coefficients

DEFAULT_LEVELS = 40
DEFAULT_TRUNCATION = 200
DEFAULT_FLOAT_TOL = 1e-10
ORACLE_LEVELS = 6
ORACLE_TOL = 5e-2
UNKNOWN_LABEL = "invariant measure; uniqueness unknown"


class UsageError(Exception):
    """Bad arguments or a backend that cannot serve the request (exit 2)."""


class CheckFailure(Exception):
    """The model or pipeline failed validation (exit 1)."""


def float_tol() -> float:
    raw = os.environ.get("QBD_FLOAT_TOL")
    if raw is None:
        return DEFAULT_FLOAT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"QBD_FLOAT_TOL is not a number: {raw!r}") from None
    if not tol > 0:
        raise UsageError("QBD_FLOAT_TOL must be positive")
    return tol


@dataclass
class Source:
    """Everything the commands need: a model, its potentials and the invariant vector."""

    model: BlockTridiagonal
    potentials: object
    invariant: object
    label: str
    levels: int
    params: FamilyParams | None = None
    family: object = None

    @property
    def exact(self) -> bool:
        return self.model.exact


def _backend_flag(args) -> bool | None:
    return {"exact": True, "float": False, "auto": None}[args.backend]


def _params(args) -> FamilyParams:
    raw = [args.alpha, args.beta, args.k]
    raw = [d if v is None else v for v, d in zip(raw, ("0", "0", "1/2"))]
    try:
        return FamilyParams.make(*raw, exact=_backend_flag(args))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None


def _from_params(args) -> Source:
    p = _params(args)
    levels = DEFAULT_LEVELS if args.levels is None else args.levels
    try:
        run = run_pipeline(p, levels)
    except (RecurrenceError, WeightError, ModelError, PotentialError, InvariantError) as exc:
        raise CheckFailure(f"pipeline failed at {p}: {exc}") from None
    return Source(run.model, run.potentials, run.invariant, classify(p).label, levels, p, run.family)


def _from_model(args) -> Source:
    if any(v is not None for v in (args.alpha, args.beta, args.k)):
        raise UsageError("--model cannot be combined with --alpha/--beta/--k")
    try:
        model, pi0 = load_model(args.model, _backend_flag(args))
    except OSError as exc:
        raise UsageError(f"cannot read {args.model}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.model} is not valid JSON: {exc}") from None
    except MixedBackendError as exc:
        raise UsageError(str(exc)) from None
    except ModelError as exc:
        raise CheckFailure(f"invalid model: {exc}") from None
    if pi0 is None:
        if model.N != 1:
            raise UsageError('model files with N > 1 must supply "pi0"')
        pi0 = Mat.identity(1, model.exact)
    max_levels = len(model) - 1
    levels = max_levels if args.levels is None else args.levels
    if levels > max_levels:
        raise UsageError(f"model stores {len(model)} levels; --levels must be at most {max_levels}")
    try:
        ps = potential_coefficients(model, pi0, levels)
        inv = invariant_vector(ps)
    except (PotentialError, InvariantError) as exc:
        raise CheckFailure(str(exc)) from None
    return Source(model, ps, inv, UNKNOWN_LABEL, levels)


def load_source(args) -> Source:
    if args.levels is not None and args.levels < 0:
        raise UsageError("--levels must be nonnegative")
    return _from_model(args) if args.model else _from_params(args)


# -- output ------------------------------------------------------------------


def _cell(v) -> str:
    return format_scalar(v) if isinstance(v, Fraction) else repr(float(v))


def _json_value(v):
    return format_scalar(v) if isinstance(v, Fraction) else float(v)


def emit_table(header: list[str], rows: list[list], meta: dict, fmt: str) -> str:
    """Serialize rows as CSV (metadata as ``#`` comments) or JSON."""
    if fmt == "json":
        doc = dict(meta)
        doc["columns"] = header
        doc["rows"] = [dict(zip(header, (_json_value(v) if not isinstance(v, int) else v for v in r)))
                       for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, int) else _cell(v) for v in r])
    return buf.getvalue()


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(src: Source) -> dict:
    meta = {"classification": src.label, "backend": "exact" if src.exact else "float"}
    if src.params is not None:
        p = src.params
        meta["parameters"] = f"alpha={p.alpha} beta={p.beta} k={p.k}"
    return meta


# -- commands ----------------------------------------------------------------


def cmd_invariant(args) -> int:
    src = load_source(args)
    header = ["level", "phase", "value"]
    if src.exact:
        header += ["numerator", "denominator"]
    rows = []
    for n in range(src.levels + 1):
        for i, v in enumerate(src.invariant[n]):
            row = [n, i + 1, v]
            if src.exact:
                row += [v.numerator, v.denominator]
            rows.append(row)
    _write(emit_table(header, rows, _meta(src), args.format), args.out)
    return 0


def cmd_figure(args) -> int:
    levels = DEFAULT_LEVELS if args.levels is None else args.levels
    if levels < 0:
        raise UsageError("--levels must be nonnegative")
    if args.model is None:
        p = _params(args)
        if is_golden(p):
            # closed forms: cheap at any level, no pipeline needed
            blocks = [golden_pi_block(n) for n in range(levels + 1)]
            if not p.exact:
                blocks = [tuple(float(v) for v in b) for b in blocks]
            meta = {"classification": classify(p).label, "backend": "exact" if p.exact else "float"}
            rows = [[n, b[0], b[1]] for n, b in enumerate(blocks)]
            _write(emit_table(["n", "pi1", "pi2"], rows, meta, args.format), args.out)
            return 0
    src = load_source(args)
    if src.model.N != 2:
        raise UsageError("figure data needs a two-phase model")
    rows = [[n, *src.invariant[n]] for n in range(src.levels + 1)]
    _write(emit_table(["n", "pi1", "pi2"], rows, _meta(src), args.format), args.out)
    return 0


def _oracle_model(src: Source, L: int) -> BlockTridiagonal:
    """A model covering levels ``0..L``; parameter runs are extended by a float pipeline."""
    m = src.model
    if m.available(L + 1):
        return m.extended(L + 1)
    if src.params is not None:
        if is_golden(src.params):
            from .example import golden_model

            return golden_model(L + 1, exact=False)
        return run_pipeline(src.params.as_float(), L).model
    return m


def _oracle(src: Source, L: int):
    if src.model.kind is not Kind.DISCRETE:
        raise UsageError("the truncation oracle needs a discrete-time model")
    m = _oracle_model(src, L)
    L = min(L, len(m) - 1)
    if m.generator is None and m.levels[L].A is None:
        L -= 1  # the lumped last level needs its A block
    if L < 2:
        raise UsageError("the model is too short for the truncation oracle (needs 3 levels)")
    ref = src.invariant
    k = min(ORACLE_LEVELS, len(ref))
    oracle = brute_force_invariant(m.to_float(), L)
    return L, k, oracle, rescaled_relative_error(ref, oracle, k)


def cmd_oracle(args) -> int:
    src = load_source(args)
    L, k, oracle, err = _oracle(src, args.truncation)
    ref = src.invariant.to_numpy()
    orc = oracle.to_numpy()
    orc = orc * (ref[0, 0] / orc[0, 0])
    rows = []
    for n in range(k):
        for i in range(src.model.N):
            rel = abs(orc[n, i] - ref[n, i]) / abs(ref[n, i])
            rows.append([n, i + 1, float(ref[n, i]), float(orc[n, i]), rel])
    meta = _meta(src)
    meta["truncation"] = L
    meta["max_relative_error"] = f"{err:.3e}"
    header = ["level", "phase", "invariant", "oracle", "relative_error"]
    _write(emit_table(header, rows, meta, args.format), args.out)
    return 0 if err < ORACLE_TOL else 1


# -- verify --------------------------------------------------------------------


def _fmt_residual(r, exact: bool) -> str:
    if exact:
        return "0 (exact)" if r == 0 else f"{format_scalar(r)} (exact)"
    return f"{float(r):.3e}"


def _row_sum_residual(m: BlockTridiagonal, levels: int):
    target = 0 if m.kind is Kind.CONTINUOUS else 1
    worst = 0
    for n in range(min(levels, len(m))):
        lev = m.level(n)
        if lev.A is None:
            continue
        total = lev.B + lev.A
        if n > 0:
            total = total + lev.C
        worst = max([worst] + [abs(s - target) for s in total.row_sums()])
    return worst


def _norm_identity_residual(fam, levels: int):
    worst = 0
    for n in range(levels + 1):
        h, B = fam.norms[n], fam.B[n]
        scale = 1 if fam.exact else h.max_abs()
        worst = max(worst, (B @ h - h @ B.T).max_abs() / scale)
        if n < levels:
            r = h @ fam.C[n + 1].T - fam.A[n] @ fam.norms[n + 1]
            worst = max(worst, r.max_abs() / scale)
    return worst


def _golden_residual(src: Source, levels: int):
    worst = 0
    for n in range(levels + 1):
        g = golden_blocks(n)
        pairs = [(src.model.B(n), g.B), (src.model.A(n), g.A), (src.family.norms[n], golden_norms(n))]
        if n > 0:
            pairs.append((src.model.C(n), g.C))
        for got, want in pairs:
            if not got.exact:
                want = want.to_float()
            worst = max(worst, (got - want).max_abs() / (1 if got.exact else max(want.max_abs(), 1)))
        for got, want in zip(src.invariant[n], golden_pi_block(n)):
            d = abs(got - (want if src.exact else float(want)))
            worst = max(worst, d if src.exact else d / abs(float(want)))
    return worst


def cmd_verify(args) -> int:
    tol = float_tol()
    lines: list[str] = []
    failed = False

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failed
        failed |= not ok
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")

    try:
        src = load_source(args)
    except CheckFailure as exc:
        report("stochasticity", False, str(exc))
        _write("\n".join(lines) + "\n", args.out)
        return 1
    m, exact, levels = src.model, src.exact, src.levels
    lines.append(f"# classification: {src.label}")
    lines.append(f"# backend: {'exact' if exact else 'float'}; levels 0..{levels}")

    rs = _row_sum_residual(m, levels + 1)
    report("stochasticity", exact and rs == 0 or not exact and rs <= tol, _fmt_residual(rs, exact))

    sym = check_symmetry_conditions(m, src.potentials, levels + 1)
    detail = _fmt_residual(sym.max_residual, exact)
    if not sym.ok:
        detail += f"; first failure {sym.failures()[0]}"
    report("symmetry conditions", sym.ok, detail)

    if src.family is not None:
        r = _norm_identity_residual(src.family, levels)
        report("norm identities", exact and r == 0 or not exact and r <= tol, _fmt_residual(r, exact))

    if levels >= 1:
        res = stationarity_residual(m, src.invariant, levels)
        if not exact:
            # invariant measures grow with the level; compare relative to the block size
            res = [r / max(max(abs(v) for v in src.invariant[n]), 1e-300) for n, r in enumerate(res)]
        r = max(res)
        report("stationarity", exact and r == 0 or not exact and r <= tol, _fmt_residual(r, exact))
    else:
        lines.append("SKIP  stationarity: needs levels >= 1")

    if m.kind is Kind.DISCRETE and (src.params is not None or len(m) >= 3):
        try:
            L, k, _, err = _oracle(src, args.truncation)
            report("truncation oracle", err < ORACLE_TOL,
                   f"L={L}, max relative error {err:.3e} on levels 0..{k - 1}")
        except (UsageError, InvariantError) as exc:
            report("truncation oracle", False, str(exc))
    else:
        lines.append("SKIP  truncation oracle: needs a discrete model with at least 3 levels")

    if src.params is not None and is_golden(src.params):
        r = _golden_residual(src, levels)
        report("closed forms", exact and r == 0 or not exact and r <= tol, _fmt_residual(r, exact))

    _write("\n".join(lines) + "\n", args.out)
    return 1 if failed else 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("source")
    src.add_argument("--alpha", help="weight exponent of x (default 0)")
    src.add_argument("--beta", help="weight exponent of 1-x (default 0)")
    src.add_argument("--k", help="weight parameter, 0 < k < beta+1 (default 1/2)")
    src.add_argument("--model", help="JSON model file instead of a parameter triple")
    common.add_argument("--levels", type=int, default=None,
                        help=f"highest level reported (default {DEFAULT_LEVELS}; "
                             "for a model file, its last stored level)")
    common.add_argument("--backend", choices=("exact", "float", "auto"), default="auto",
                        help="arithmetic; auto is exact for rational data with integer alpha, beta")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write to this file instead of stdout")
    common.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION,
                        help=f"truncation level of the oracle (default {DEFAULT_TRUNCATION})")

    parser = argparse.ArgumentParser(prog="qbdmop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("invariant", cmd_invariant, "emit invariant vector blocks"),
        ("verify", cmd_verify, "check the identities behind the invariant vector"),
        ("figure", cmd_figure, "emit (n, pi1, pi2) plot data"),
        ("oracle", cmd_oracle, "compare with a truncated chain's stationary vector"),
    ):
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qbdmop: error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"qbdmop: check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
