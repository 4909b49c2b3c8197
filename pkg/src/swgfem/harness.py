"""Convergence-study driver: mesh families, refinement loops, CSV emission,
and expectation checking.

A study fixes a case, a mesh family, a stabilization parameter and a boundary
treatment, then solves a ladder of refinements and reports the error columns
plus observed orders.  Re-running a study with the same config (including the
seed) reproduces the CSV byte for byte.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import assembly, mesh as meshmod, metrics, solver
from .boundary import parse_mode
from .cases import ProblemCase, get_case
from .metrics import ERROR_COLUMNS, ErrorReport, RateSummary

FAMILIES = ("uniform", "rect2x3", "graded", "perturbed", "perturbed-resampled")
H_LABEL_POLICIES = ("max", "avg", "inv_n")

PERTURB_AMPLITUDE = 0.2
_PAIR_SEED_STRIDE = 1000003  # distinct deterministic stream per resampled pair


@dataclass(frozen=True)
class StudyConfig:
    """Everything a convergence study depends on."""

    case: str = "1"
    family: str = "uniform"
    base: int = 4
    levels: int = 5
    rho: float = 1.0
    boundary: str = "l2"
    seed: int | None = None
    quad_order: int = 5
    solver_tol: float = 1e-12
    h_label: str = "max"
    out: str | None = None

    def validate(self) -> "StudyConfig":
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; known: {FAMILIES}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.base < 1:
            raise ValueError("base must be >= 1")
        if self.family == "rect2x3" and self.base % 2:
            raise ValueError("rect2x3 needs an even base (grid base x 3*base/2)")
        if self.family in ("perturbed", "perturbed-resampled") and self.seed is None:
            raise ValueError(f"family {self.family!r} requires a seed")
        if self.h_label not in H_LABEL_POLICIES:
            raise ValueError(
                f"unknown h_label policy {self.h_label!r}; known: {H_LABEL_POLICIES}"
            )
        if self.quad_order < 2:
            raise ValueError("quad_order must be >= 2")
        if self.solver_tol <= 0 or self.rho <= 0:
            raise ValueError("rho and solver_tol must be positive")
        parse_mode(self.boundary)          # raises on bad mode names
        get_case(self.case)                # raises on bad ids
        return self

    @staticmethod
    def from_dict(data: dict) -> "StudyConfig":
        known = {f.name for f in dataclasses.fields(StudyConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return StudyConfig(**data).validate()


@dataclass
class StudyResult:
    config: StudyConfig
    reports: list[ErrorReport]
    rates: RateSummary
    pair_mode: bool = False
    csv_text: str = ""


def _label_for(m: meshmod.Mesh, policy: str) -> float:
    if policy == "max":
        return max(m.hx_max, m.hy_max)
    if policy == "avg":
        return 0.5 * (m.hx_max + m.hy_max)
    return 1.0 / m.n


def base_mesh(config: StudyConfig, case: ProblemCase) -> meshmod.Mesh:
    if config.family == "uniform":
        return meshmod.build_uniform(config.base, config.base, case.domain)
    if config.family == "rect2x3":
        return meshmod.build_uniform(config.base, 3 * config.base // 2, case.domain)
    if config.family == "graded":
        return meshmod.build_graded_half(config.base, config.base, case.domain)
    if config.family == "perturbed":
        return meshmod.build_perturbed(config.base, PERTURB_AMPLITUDE, config.seed)
    raise ValueError(f"family {config.family!r} has no single base mesh")


def solve_level(
    m: meshmod.Mesh,
    case: ProblemCase,
    config: StudyConfig,
    x0: np.ndarray | None = None,
) -> tuple[ErrorReport, np.ndarray]:
    """Assemble, solve and measure one mesh level.

    x0 seeds CG (nested iteration from the previous level); the stopping
    criterion is relative to ||b||, so the converged result does not depend
    on it.
    """
    system, g_edge = assembly.assemble(
        m, case, config.rho, config.boundary, config.quad_order
    )
    result = solver.cg_solve(system, tol=config.solver_tol, x0=x0)
    u_b = assembly.full_edge_vector(m, result.x, g_edge)
    report = metrics.error_report(
        m, case, u_b, _label_for(m, config.h_label), config.quad_order,
        cg_iters=result.iterations,
    )
    return report, u_b


def run_study(config: StudyConfig) -> StudyResult:
    config = config.validate()
    case = get_case(config.case)
    reports: list[ErrorReport] = []
    pair_mode = config.family == "perturbed-resampled"

    if pair_mode:
        for p in range(config.levels):
            n = config.base * 2**p
            m = meshmod.build_perturbed(
                n, PERTURB_AMPLITUDE, config.seed + _PAIR_SEED_STRIDE * p
            )
            report, u_b = solve_level(m, case, config)
            reports.append(report)
            fine = meshmod.refine_bisect(m)
            x0 = assembly.prolong_edge_values(m, u_b, fine)
            reports.append(solve_level(fine, case, config, x0)[0])
        summary = metrics.pairwise_rates(reports)
    else:
        m = base_mesh(config, case)
        u_b_prev = None
        m_prev = None
        for _ in range(config.levels):
            x0 = (assembly.prolong_edge_values(m_prev, u_b_prev, m)
                  if u_b_prev is not None else None)
            report, u_b_prev = solve_level(m, case, config, x0)
            m_prev = m
            reports.append(report)
            m = meshmod.refine_bisect(m)
        summary = (
            metrics.rates(reports) if len(reports) >= 2
            else RateSummary({c: [] for c in ERROR_COLUMNS},
                             {c: math.nan for c in ERROR_COLUMNS},
                             {c: math.nan for c in ERROR_COLUMNS})
        )

    result = StudyResult(config, reports, summary, pair_mode)
    result.csv_text = to_csv(result)
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(result.csv_text)
    return result


# -- output -------------------------------------------------------------------

_CSV_HEADER = (
    "level,h_label,n_dofs,e_inf_star,e_l2,e_h1_weak,e_h1_star,e_h1_proj,cg_iters,"
    "e_inf_star_raw,e_l2_raw,e_h1_weak_raw,e_h1_star_raw,e_h1_proj_raw"
)


def _fmt6(v: float) -> str:
    return "" if v is None or math.isnan(v) else f"{v:.6g}"


def _fmt17(v: float) -> str:
    return "" if v is None or math.isnan(v) else f"{v:.17g}"


def to_csv(result: StudyResult) -> str:
    buf = io.StringIO()
    buf.write(_CSV_HEADER + "\n")
    for lvl, r in enumerate(result.reports, start=1):
        errors = [r.column(c) for c in ERROR_COLUMNS]
        buf.write(
            f"{lvl},{_fmt6(r.h_label)},{r.n_dofs},"
            + ",".join(_fmt6(e) for e in errors)
            + f",{r.cg_iters},"
            + ",".join(_fmt17(e) for e in errors)
            + "\n"
        )
    summary = result.rates
    if result.pair_mode:
        n_pairs = len(result.reports) // 2
        for p in range(n_pairs):
            vals = [summary.pairwise[c][p] for c in ERROR_COLUMNS]
            buf.write(
                f"rate_pair_{p + 1},,,"
                + ",".join(_fmt6(v) for v in vals)
                + ",,"
                + ",".join(_fmt17(v) for v in vals)
                + "\n"
            )
    elif len(result.reports) >= 2:
        last = [summary.last_pair[c] for c in ERROR_COLUMNS]
        lsq = [summary.least_squares[c] for c in ERROR_COLUMNS]
        buf.write(
            "rate_last_pair,,,"
            + ",".join(_fmt6(v) for v in last)
            + ",,"
            + ",".join(_fmt17(v) for v in last)
            + "\n"
        )
        buf.write(
            "rate_lsq,,,"
            + ",".join(_fmt6(v) for v in lsq)
            + ",,"
            + ",".join(_fmt17(v) for v in lsq)
            + "\n"
        )
    return buf.getvalue()


def to_text_table(result: StudyResult) -> str:
    """Aligned table like the ones the CSV encodes, for terminal reading."""
    cols = ["level", "h_label", "n_dofs", *ERROR_COLUMNS, "cg_iters"]
    rows = []
    for lvl, r in enumerate(result.reports, start=1):
        rows.append([
            str(lvl), f"{r.h_label:.4g}", str(r.n_dofs),
            *(f"{r.column(c):.4e}" for c in ERROR_COLUMNS), str(r.cg_iters),
        ])
    if result.pair_mode:
        for p, _ in enumerate(result.reports[::2]):
            rates_row = [f"{result.rates.pairwise[c][p]:.2f}" for c in ERROR_COLUMNS]
            rows.append([f"pair {p + 1}", "", "", *rates_row, ""])
    elif len(result.reports) >= 2:
        rows.append(["rate", "", "",
                     *(f"{result.rates.last_pair[c]:.2f}" for c in ERROR_COLUMNS), ""])
    widths = [max(len(c), *(len(row[k]) for row in rows)) for k, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(widths[k]) for k, c in enumerate(cols))]
    lines += ["  ".join(v.rjust(widths[k]) for k, v in enumerate(row)) for row in rows]
    return "\n".join(lines) + "\n"


# -- expectation checking -------------------------------------------------------

@dataclass
class CheckReport:
    lines: list[str] = field(default_factory=list)
    failures: int = 0

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, message: str) -> None:
        self.lines.append(("PASS " if ok else "FAIL ") + message)
        if not ok:
            self.failures += 1

    def to_json(self) -> str:
        return json.dumps(
            {"ok": self.ok, "failures": self.failures, "lines": self.lines},
            indent=2,
        )


def check(config: StudyConfig, expectations: dict) -> tuple[CheckReport, StudyResult]:
    """Run a study and compare it against an expectations document.

    Expectation schema:
      {"values": [{"level": int, "column": str, "value": float,
                   "rtol": float, "atol": float?}, ...],
       "rates":  [{"column": str, "target": float, "tol": float} |
                  {"column": str, "lo": float, "hi": float,
                   "scope": "last" | "pairwise"}, ...]}
    """
    result = run_study(config)
    report = CheckReport()
    for exp in expectations.get("values", []):
        level = int(exp["level"])
        col = exp["column"]
        want = float(exp["value"])
        rtol = float(exp.get("rtol", 1e-3))
        atol = float(exp.get("atol", 0.0))
        if not 1 <= level <= len(result.reports):
            report.record(False, f"value {col}@level{level}: level out of range")
            continue
        got = result.reports[level - 1].column(col)
        ok = abs(got - want) <= rtol * abs(want) + atol
        report.record(
            ok, f"value {col}@level{level}: got {got:.6e}, want {want:.6e} "
                f"(rtol={rtol:g}, atol={atol:g})"
        )
    for exp in expectations.get("rates", []):
        col = exp["column"]
        if "target" in exp:
            lo = float(exp["target"]) - float(exp["tol"])
            hi = float(exp["target"]) + float(exp["tol"])
        else:
            lo, hi = float(exp["lo"]), float(exp["hi"])
        scope = exp.get("scope", "last")
        if scope == "pairwise":
            vals = result.rates.pairwise[col]
        else:
            vals = [result.rates.last_pair[col]]
        ok = all(not math.isnan(v) and lo <= v <= hi for v in vals)
        report.record(
            ok, f"rate {col} ({scope}): {['%.3f' % v for v in vals]} in [{lo}, {hi}]"
        )
    return report, result
