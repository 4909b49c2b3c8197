"""Command-line driver.

Subcommands:
  run          solve a refinement study and emit CSV / an aligned table
  check        run a study and compare against an expectations JSON
  dump-matrix  write one level's assembled system in coordinate text format

Exit codes: 0 ok, 1 expectation failure, 2 invalid configuration,
3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import assembly, harness, mesh as meshmod, solver
from .cases import CaseDefinitionError, get_case
from .harness import StudyConfig

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_SOLVER_FAILURE = 3


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with StudyConfig fields")
    p.add_argument("--case", help="case id (patch, 1..11)")
    p.add_argument("--family", help="|".join(harness.FAMILIES))
    p.add_argument("--base", type=int, help="base mesh size parameter")
    p.add_argument("--levels", type=int, help="number of refinement levels")
    p.add_argument("--rho", type=float, help="stabilization parameter")
    p.add_argument("--boundary", help="l2 | perturbed")
    p.add_argument("--seed", type=int, help="seed for perturbed families")
    p.add_argument("--quad-order", type=int, dest="quad_order")
    p.add_argument("--tol", type=float, dest="solver_tol", help="CG tolerance")
    p.add_argument("--h-label", dest="h_label",
                   help="|".join(harness.H_LABEL_POLICIES))
    p.add_argument("--out", help="output path (CSV for run, verdict JSON for check)")


def build_config(args: argparse.Namespace) -> StudyConfig:
    data: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data.update(json.load(fh))
    for f in dataclasses.fields(StudyConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            data[f.name] = v
    return StudyConfig.from_dict(data)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swgfem",
        description="Simplified weak Galerkin convergence studies on "
                    "rectangular meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a refinement study")
    _add_config_args(run_p)

    check_p = sub.add_parser("check", help="run a study and check expectations")
    _add_config_args(check_p)
    check_p.add_argument("--expect", required=True,
                         help="expectations JSON (values / rates)")

    dump_p = sub.add_parser("dump-matrix", help="dump one assembled system")
    _add_config_args(dump_p)
    dump_p.add_argument("--level", type=int, default=1,
                        help="refinement level to assemble (1-based)")
    return parser


def _cmd_run(args) -> int:
    config = build_config(args)
    result = harness.run_study(config)
    sys.stdout.write(harness.to_text_table(result))
    if config.out:
        print(f"wrote {config.out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    out = args.out
    args.out = None                        # study CSV not written in check mode
    config = build_config(args)
    with open(args.expect) as fh:
        expectations = json.load(fh)
    report, _ = harness.check(config, expectations)
    for line in report.lines:
        print(line)
    if out:
        with open(out, "w") as fh:
            fh.write(report.to_json() + "\n")
    print(f"{'OK' if report.ok else 'FAILED'}: "
          f"{len(report.lines) - report.failures}/{len(report.lines)} checks passed")
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def _cmd_dump_matrix(args) -> int:
    level = args.level
    if level < 1:
        raise ValueError("level must be >= 1")
    config = build_config(args)
    case = get_case(config.case)
    if config.family == "perturbed-resampled":
        raise ValueError("dump-matrix supports only single-ladder families")
    m = harness.base_mesh(config, case)
    for _ in range(level - 1):
        m = meshmod.refine_bisect(m)
    system, _ = assembly.assemble(m, case, config.rho, config.boundary,
                                  config.quad_order)
    path = config.out or "matrix.txt"
    assembly.dump_matrix(system, path)
    print(f"wrote {path} ({system.n} unknowns, {system.A.nnz} entries)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "check": _cmd_check,
        "dump-matrix": _cmd_dump_matrix,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError,
            CaseDefinitionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except solver.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
