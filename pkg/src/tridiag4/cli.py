"""Command-line front end: parse matrices, solve, classify, run experiments.

Exit codes: 0 success, 1 input error, 2 unsolved.  All randomness sits
behind --seed, so reports are reproducible.  The TRIDIAG_THREADS
environment variable caps worker threads in the degree experiments.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time

import numpy as np

from . import __version__
from .degrees import run_experiments
from .errors import ParseError, Unsolved
from .generate import KINDS, make_matrix
from .genericity import check_distinct_eigenvalues, check_nonsingular, classify
from .pencil import Pencil, SectionOptions, section_zeros
from .tridiagonalize import Options, tridiagonalize, verify


def _cvec(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _cmat(m) -> list:
    return [_cvec(row) for row in np.asarray(m, dtype=complex)]


def matrix_to_input(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"n": a.shape[0], "entries": _cmat(a)}


_TOKEN_RE = re.compile(r"^[0-9+\-.eEij]+$")


def _parse_complex_token(tok: str, line: int, col: int) -> complex:
    s = tok.strip()
    if not _TOKEN_RE.match(s):
        raise ParseError(f"line {line}, column {col}: cannot parse entry {tok!r}")
    s = s.replace("i", "j")
    # bare imaginary units need an explicit coefficient for complex()
    s = re.sub(r"(?<![\d.])j", "1j", s)
    try:
        return complex(s)
    except ValueError as exc:
        raise ParseError(f"line {line}, column {col}: cannot parse entry {tok!r}") from exc


def parse_text_matrix(text: str) -> np.ndarray:
    """One row per line, entries as a+bi tokens separated by whitespace."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        entries = []
        col = 1
        for tok in stripped.split():
            entries.append(_parse_complex_token(tok, lineno, col))
            col += 1
        rows.append(entries)
    if not rows:
        raise ParseError("empty input")
    n = len(rows)
    if any(len(r) != n for r in rows) or n > 4:
        raise ParseError(f"expected a square matrix with n <= 4, got rows of lengths {[len(r) for r in rows]}")
    return np.array(rows, dtype=complex)


def parse_json_matrix(text: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "n" not in data or "entries" not in data:
        raise ParseError('input must be an object {"n": ..., "entries": [[[re, im], ...], ...]}')
    n = data["n"]
    entries = data["entries"]
    if not isinstance(n, int) or not 1 <= n <= 4:
        raise ParseError(f"n must be an integer in 1..4, got {n!r}")
    if not isinstance(entries, list) or len(entries) != n:
        raise ParseError(f"entries must be a list of {n} rows")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(entries):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"row {i} must have {n} entries")
        for j, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) for x in pair)
            ):
                raise ParseError(f"entry ({i}, {j}) must be a [re, im] pair of numbers")
            out[i, j] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise ParseError("matrix entries must be finite")
    return out


def _read_input(path: str, text_format: bool) -> np.ndarray:
    raw = sys.stdin.read() if path == "-" else open(path, "r", encoding="utf-8").read()
    if text_format:
        return parse_text_matrix(raw)
    stripped = raw.lstrip()
    if stripped.startswith("{"):
        return parse_json_matrix(raw)
    return parse_text_matrix(raw)


def _genericity_block(a: np.ndarray, seed: int) -> dict:
    if a.shape[0] == 4:
        return classify(a, seed=seed).as_dict()
    return {
        "s1": check_nonsingular(a),
        "s2": check_distinct_eigenvalues(a),
        "s3": True,
        "common_eigenvectors": [],
        "witness": None,
        "details": "pencil rank test applies to n = 4 only",
    }


def _emit(payload: dict, pretty_lines, args) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in pretty_lines:
            print(line)


def cmd_tridiag(args) -> int:
    t_start = time.perf_counter()
    timings = {}
    try:
        t0 = time.perf_counter()
        a = _read_input(args.input, args.text)
        timings["parse"] = 1e3 * (time.perf_counter() - t0)
    except (ParseError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1

    t0 = time.perf_counter()
    genericity = _genericity_block(a, args.seed)
    timings["classify"] = 1e3 * (time.perf_counter() - t0)

    opts = Options(
        tol=args.tol,
        seed=args.seed,
        sweep_samples=args.sweep_samples,
        max_restarts=args.max_restarts,
    )
    t0 = time.perf_counter()
    try:
        result = tridiagonalize(a, opts)
    except Unsolved as exc:
        print(f"unsolved: {exc}", file=sys.stderr)
        return 2
    timings["solve"] = 1e3 * (time.perf_counter() - t0)

    payload = {
        "input": matrix_to_input(a),
        "result": {
            "U": _cmat(result.u),
            "T": _cmat(result.t),
            "off_residual": result.off_residual,
            "unitarity_residual": result.unitarity_residual,
            "provenance": result.provenance,
            "perturbation_used": result.perturbation_used,
        },
        "genericity": genericity,
        "seed": args.seed,
    }

    if args.all_flags and a.shape[0] == 4:
        t0 = time.perf_counter()
        try:
            zeros = section_zeros(
                Pencil(a),
                SectionOptions(samples=args.sweep_samples, restarts=args.max_restarts, seed=args.seed, stop_on_shortcut=False),
            )
        except Exception:
            zeros = []
        payload["flags"] = [
            {
                "t": _cvec(z.point.t),
                "v": _cvec(z.point.v),
                "sigma4": z.sigma4,
                "shortcut": z.shortcut,
            }
            for z in zeros
        ]
        timings["all_flags"] = 1e3 * (time.perf_counter() - t0)

    if args.verify:
        t0 = time.perf_counter()
        rep = verify(result, a)
        payload["verify"] = {
            "off_residual": rep.off_residual,
            "unitarity_residual": rep.unitarity_residual,
            "spectrum_gap": rep.spectrum_gap,
            "recompute_gap": rep.recompute_gap,
            "matching": [[[la.real, la.imag], [lt.real, lt.imag]] for la, lt in rep.matching],
        }
        timings["verify"] = 1e3 * (time.perf_counter() - t0)

    timings["total"] = 1e3 * (time.perf_counter() - t_start)
    payload["timings_ms"] = timings

    lines = [
        f"n = {a.shape[0]}  provenance = {result.provenance}",
        f"off_residual = {result.off_residual:.3e}  unitarity = {result.unitarity_residual:.3e}",
        f"perturbation_used = {result.perturbation_used:.1e}",
        "T =",
    ]
    with np.printoptions(precision=4, suppress=True, linewidth=120):
        lines.extend("  " + row for row in str(np.round(result.t, 10)).splitlines())
    if "flags" in payload:
        lines.append(f"flag points: {len(payload['flags'])}")
    if "verify" in payload:
        lines.append(f"verify: spectrum_gap = {payload['verify']['spectrum_gap']:.3e}")
    _emit(payload, lines, args)
    return 0


def cmd_classify(args) -> int:
    try:
        a = _read_input(args.input, args.text)
    except (ParseError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    block = _genericity_block(a, args.seed)
    lines = [
        f"s1 (nonsingular)          : {block['s1']}",
        f"s2 (distinct eigenvalues) : {block['s2']}",
        f"s3 (pencil rank >= 3)     : {block['s3']}",
        f"common eigenvectors       : {len(block['common_eigenvectors'])}",
        f"details: {block['details']}",
    ]
    _emit(block, lines, args)
    return 0


def cmd_degrees(args) -> int:
    try:
        a = _read_input(args.input, args.text)
    except (ParseError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    if a.shape[0] != 4:
        print("input error: degree experiments need a 4x4 matrix", file=sys.stderr)
        return 1
    report = run_experiments(a, trials=args.trials, seed=args.seed, screen=not args.force)
    payload = report.as_dict()
    lines = []
    if report.skipped:
        lines.append(f"skipped: {report.notice}")
    else:
        lines.append(f"deg D observed = {report.deg_det_curve}  (expected 4)")
        lines.append(f"deg C observed = {report.deg_kernel_curve}  (expected 6)")
        lines.append(f"flag points    = {report.section_zero_count}  (at most 12)")
        lines.append(f"trials = {report.trials}")
    _emit(payload, lines, args)
    return 0


def cmd_gen(args) -> int:
    a = make_matrix(args.kind, args.n, args.seed)
    payload = matrix_to_input(a)
    print(json.dumps(payload, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tridiag4",
        description="Unitary tridiagonalization of complex matrices up to 4x4.",
        epilog="TRIDIAG_THREADS caps worker threads in the degree experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
        p.add_argument("--text", action="store_true", help="force the plain-text input format")
        p.add_argument("--seed", type=int, default=42)
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="machine-readable output")
        fmt.add_argument("--pretty", action="store_true", help="human-readable output (default)")

    p = sub.add_parser("tridiag", help="compute U with U A U* tridiagonal")
    add_io(p)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--sweep-samples", type=int, default=720)
    p.add_argument("--max-restarts", type=int, default=16)
    p.add_argument("--all-flags", action="store_true", help="emit every certified flag point")
    p.add_argument("--verify", action="store_true", help="recompute residuals and spectrum match")
    p.set_defaults(func=cmd_tridiag)

    p = sub.add_parser("classify", help="run the genericity tests")
    add_io(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("degrees", help="run the curve-degree experiments")
    add_io(p)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--force", action="store_true", help="run even when the screen rejects the input")
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("gen", help="emit a deterministic test matrix as JSON")
    p.add_argument("--n", type=int, default=4, choices=[1, 2, 3, 4])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--kind", default="gaussian", choices=list(KINDS))
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
