"""Command-line interface.

Subcommands: construct, verify, bound, optimize-r0, eval, table1,
examples.  Output is a report envelope in JSON or indented text; exit
code 0 on success, 1 for infeasible parameters or failed certification,
2 for usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__, fixtures
from .bounds import InfeasibleError, class_trace_bound, optimize_r0
from .construct import ConstructionError, ExistenceError, SearchConfig, construct
from .design import Design, DesignParseError, parse_design, render_design
from .efficiency import efficiency_report, reproduce_table
from .model import (
    DisconnectedDesignError,
    ModelKind,
    a_criterion,
    mv_criterion,
)
from .verify import certify, verify_balance

OK = 0
FAILED = 1


def _envelope(command: str, parameters: dict, results: dict,
              warnings: list[str], seed: int | None) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "results": results,
        "warnings": warnings,
        "seed": seed,
        "version": __version__,
    }


def _emit_text(value, indent: int = 0) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                print(f"{pad}{key}:")
                _emit_text(item, indent + 1)
            else:
                print(f"{pad}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                print(f"{pad}-")
                _emit_text(item, indent + 1)
            else:
                print(f"{pad}- {_scalar(item)}")
    else:
        print(f"{pad}{_scalar(value)}")


def _scalar(item) -> str:
    if isinstance(item, float):
        return format(item, ".10g")
    if isinstance(item, (list, dict)) and not item:
        return "[]" if isinstance(item, list) else "{}"
    return str(item)


def _emit(envelope: dict, form: str) -> None:
    if form == "json":
        print(json.dumps(envelope, indent=2, sort_keys=False))
    else:
        _emit_text(envelope)


def _read_design(path: str) -> Design:
    return parse_design(Path(path).read_text())


def _cmd_construct(args) -> tuple[dict, int]:
    params = {"t": args.t, "p": args.p, "n": args.n}
    cfg = SearchConfig(
        seed=args.seed,
        max_restarts=args.max_restarts,
        max_iters_per_restart=args.max_iters,
    )
    warnings: list[str] = []
    try:
        design = construct(args.t, args.p, args.n, cfg)
        code = OK
    except ExistenceError as exc:
        return _envelope("construct", params, {"error": str(exc)}, [], args.seed), FAILED
    except ConstructionError as exc:
        design = exc.design
        warnings.append(f"search budget exhausted; best violation score {exc.score:g}")
        code = FAILED
    cert = certify(design)
    results = {
        "design": render_design(design),
        "certificate": cert.to_dict(),
    }
    if args.output:
        Path(args.output).write_text(render_design(design))
        results["written_to"] = args.output
    return _envelope("construct", params, results, warnings, args.seed), code


def _cmd_verify(args) -> tuple[dict, int]:
    design = _read_design(args.design)
    report = verify_balance(design)
    cert = certify(design)
    results = {"balance": report.to_dict(), "certificate": cert.to_dict()}
    code = OK if cert.verdict in ("optimal", "efficient") else FAILED
    return _envelope("verify", {"design": args.design}, results, [], None), code


def _cmd_bound(args) -> tuple[dict, int]:
    params = {"t": args.t, "p": args.p, "n": args.n, "r0": args.r0}
    try:
        value = class_trace_bound(args.t, args.p, args.n, args.r0)
    except InfeasibleError as exc:
        return _envelope("bound", params, {"error": str(exc)}, [], None), FAILED
    results = {"x_term": value.x_term, "y_term": value.y_term, "bound": value.bound}
    return _envelope("bound", params, results, [], None), OK


def _cmd_optimize_r0(args) -> tuple[dict, int]:
    params = {"t": args.t, "p": args.p, "n": args.n}
    try:
        profile = optimize_r0(args.t, args.p, args.n)
    except InfeasibleError as exc:
        return _envelope("optimize-r0", params, {"error": str(exc)}, [], None), FAILED
    results = {
        "best_r0": profile.best_r0,
        "best_bound": profile.best_bound,
        "entries": [dataclasses.asdict(entry) for entry in profile.entries],
    }
    return _envelope("optimize-r0", params, results, [], None), OK


def _cmd_eval(args) -> tuple[dict, int]:
    design = _read_design(args.design)
    kind = ModelKind.from_name(args.model)
    params = {"design": args.design, "model": kind.value}
    warnings: list[str] = []
    try:
        results = {
            "t": design.t,
            "p": design.p,
            "n": design.n,
            "a_criterion": a_criterion(design, kind),
            "mv_criterion": mv_criterion(design, kind),
        }
    except DisconnectedDesignError as exc:
        return _envelope("eval", params, {"error": str(exc)}, [], None), FAILED
    report = efficiency_report(design)
    if report.e_c is None:
        warnings.append(
            "design is outside the eligible class; carryover efficiency unavailable"
        )
    results["efficiencies"] = report.to_dict()
    return _envelope("eval", params, results, warnings, None), OK


def _cmd_table1(args) -> tuple[dict, int]:
    rows = tuple(int(r) for r in args.rows.split(",")) if args.rows else None
    entries = reproduce_table(rows)
    warnings = []
    for entry in entries:
        if entry["computed"] is None:
            continue
        for key, reference in entry["reference"].items():
            computed = entry["computed"][key]
            if computed is not None and abs(computed - reference) > 0.5:
                warnings.append(
                    f"row {entry['row']} {key}: computed {computed:.2f} "
                    f"vs reference {reference:.2f}"
                )
    return _envelope("table1", {"rows": args.rows}, {"rows": entries}, warnings, None), OK


def _cmd_examples(args) -> tuple[dict, int]:
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    written = []
    for name in fixtures.names():
        path = dest / f"{name}.design"
        path.write_text(render_design(fixtures.load(name)))
        written.append(str(path))
    return _envelope("examples", {"dest": args.dest}, {"written": written}, [], None), OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xover",
        description="Construct, bound, and certify test-versus-control crossover designs.",
    )
    parser.add_argument("--format", choices=("json", "text"), default="text",
                        help="report form (default: text)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_con = sub.add_parser("construct", help="build a fully balanced design")
    p_con.add_argument("--t", type=int, required=True, help="number of test treatments")
    p_con.add_argument("--p", type=int, required=True, help="number of periods")
    p_con.add_argument("--n", type=int, required=True, help="number of units")
    defaults = SearchConfig()
    p_con.add_argument("--seed", type=int, default=defaults.seed)
    p_con.add_argument("--max-restarts", type=int, default=defaults.max_restarts)
    p_con.add_argument("--max-iters", type=int, default=defaults.max_iters_per_restart,
                       help="iterations per restart")
    p_con.add_argument("--output", help="write the design to this file")

    p_ver = sub.add_parser("verify", help="check balance and certify a design file")
    p_ver.add_argument("design")

    p_bound = sub.add_parser("bound", help="class trace bound at one control replication")
    for flag in ("--t", "--p", "--n", "--r0"):
        p_bound.add_argument(flag, type=int, required=True)

    p_opt = sub.add_parser("optimize-r0", help="sweep the bound over control replications")
    for flag in ("--t", "--p", "--n"):
        p_opt.add_argument(flag, type=int, required=True)

    p_eval = sub.add_parser("eval", help="criteria and efficiencies of a design file")
    p_eval.add_argument("design")
    p_eval.add_argument("--model", default="carryover",
                        choices=[kind.value for kind in ModelKind])

    p_tab = sub.add_parser("table1", help="recompute the benchmark efficiency table")
    p_tab.add_argument("--rows", help="comma-separated 1-based row numbers")

    p_ex = sub.add_parser("examples", help="write the bundled reference designs to files")
    p_ex.add_argument("--dest", default=".", help="target directory (default: .)")

    # accepted after the subcommand too; SUPPRESS keeps a missing trailing
    # flag from overwriting one given before the subcommand
    for sub_parser in sub.choices.values():
        sub_parser.add_argument("--format", choices=("json", "text"),
                                default=argparse.SUPPRESS,
                                help="report form (default: text)")

    return parser


_HANDLERS = {
    "construct": _cmd_construct,
    "verify": _cmd_verify,
    "bound": _cmd_bound,
    "optimize-r0": _cmd_optimize_r0,
    "eval": _cmd_eval,
    "table1": _cmd_table1,
    "examples": _cmd_examples,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        envelope, code = _HANDLERS[args.command](args)
    except (DesignParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    _emit(envelope, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
