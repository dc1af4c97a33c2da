"""Command-line front end: ``histent hardy | run | nonlocality``.

Exit codes: 0 success, 1 I/O or scenario error, 2 usage error,
3 degenerate computation (all propagators vanish).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import entanglement, hardy, histories, nonlocality, report
from .circuit import ScenarioError, load_circuit_file

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3


def _tolerance() -> float:
    raw = os.environ.get("HISTENT_TOLERANCE")
    if raw is None:
        return entanglement.DEFAULT_RANK_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{raw!r} is not positive")
    return value


def _emit(doc: dict, text: str, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_hardy(args) -> int:
    rep = hardy.full_report(hardy.HardyConfig(args.keep_a, args.keep_b), args.tolerance)
    _emit(report.hardy_doc(rep), report.hardy_text(rep), args.format)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        circuit = load_circuit_file(args.path)
    except OSError as exc:
        print(f"error: cannot read {args.path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ScenarioError as exc:
        print(f"error: {args.path}: {exc}", file=sys.stderr)
        return EXIT_IO
    names = list(circuit.postselections)
    if args.post is not None:
        if args.post not in circuit.postselections:
            known = ", ".join(names) or "none"
            print(f"error: unknown postselection {args.post!r} (declared: {known})", file=sys.stderr)
            return EXIT_USAGE
        names = [args.post]
    if not names:
        print("error: scenario declares no postselections", file=sys.stderr)
        return EXIT_USAGE
    tol = args.tolerance
    try:
        results = [hardy.analyse_postselection(circuit, name, tol) for name in names]
        combined = None
        if len(names) > 1:
            matrix = histories.combined_matrix(circuit, names)
            combined = (matrix, entanglement.report(matrix, tol))
    except entanglement.ZeroPropagatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    table = nonlocality.circuit_table(circuit)
    doc = {
        "kind": "run",
        "scenario": report.scenario_doc(circuit, path=str(args.path)),
        "postselections": [report.block_doc(r.name, r.propagator, r.entanglement, r.weak_values) for r in results],
        "combined": report.block_doc("combined", *combined) if combined else None,
        "detectionTable": report.table_doc(table),
        "lhv": None,
        "noSignalling": None,
    }
    lines = [f"scenario {circuit.name}", ""]
    for r in results:
        lines += report.block_text(r.name, r.propagator, r.entanglement, r.weak_values) + [""]
    if combined:
        lines += report.block_text("combined", *combined) + [""]
    lines += report.table_text(table)
    _emit(doc, "\n".join(lines), args.format)
    return EXIT_OK


def cmd_nonlocality(args) -> int:
    tables = nonlocality.detection_tables()
    system = nonlocality.build_lhv_system(tables, 6, 6)
    verdict = nonlocality.check_feasibility(system)
    signalling_free = nonlocality.no_signalling_check(tables)
    _emit(
        report.nonlocality_doc(tables, system, verdict, signalling_free),
        report.nonlocality_text(tables, system, verdict, signalling_free),
        args.format,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="histent", description="Entanglement of bipartite quantum histories")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("hardy", help="Reproduce the Hardy interferometer analysis")
    p.add_argument("--keep-a", action=argparse.BooleanOptionalAction, default=True,
                   help="keep the electron's final beamsplitter")
    p.add_argument("--keep-b", action=argparse.BooleanOptionalAction, default=True,
                   help="keep the positron's final beamsplitter")
    add_format(p)
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("run", help="Analyse a scenario file")
    p.add_argument("path")
    p.add_argument("--post", default=None, help="postselection name (default: all)")
    add_format(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("nonlocality", help="Local hidden variable test on the four Hardy settings")
    add_format(p)
    p.set_defaults(func=cmd_nonlocality)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.tolerance = _tolerance()
    except ValueError as exc:
        print(f"error: bad HISTENT_TOLERANCE: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
