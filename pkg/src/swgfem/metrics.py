"""Per-mesh error columns and observed convergence orders.

The five columns mirror the usual reporting for this scheme: a center-value
max error, the L2 error of the lifted solution, and three discrete H1
quantities (weak gradient of the edge-average defect, weak gradient against
the exact gradient at centers, and the gradient gap to the cell-linear
projection).  Everything integrates analytic fields with Gauss quadrature;
the solution only enters through its per-cell lift coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import reconstruct_interior
from .cases import ProblemCase
from .mesh import Mesh
from .quadrature import cell_rule_batch, iter_cell_chunks, segment_rule_batch

ERROR_COLUMNS = ("e_inf_star", "e_l2", "e_h1_weak", "e_h1_star", "e_h1_proj")


@dataclass(frozen=True)
class ErrorReport:
    """One row of a convergence table."""

    h_label: float
    n_dofs: int
    e_inf_star: float
    e_l2: float
    e_h1_weak: float
    e_h1_star: float
    e_h1_proj: float
    cg_iters: int = 0

    def column(self, name: str) -> float:
        return getattr(self, name)


def edge_average_all(mesh: Mesh, f, quad_order: int = 5) -> np.ndarray:
    """Edge average of f on every edge of the mesh (vectorized)."""
    x0, y0, x1, y1 = mesh.edge_endpoints
    X, Y, W = segment_rule_batch(x0, y0, x1, y1, quad_order)
    lengths = np.hypot(x1 - x0, y1 - y0)
    return (W * np.asarray(f(X, Y), dtype=float)).sum(axis=1) / lengths


def error_report(
    mesh: Mesh,
    case: ProblemCase,
    u_b: np.ndarray,
    h_label: float,
    quad_order: int = 5,
    cg_iters: int = 0,
    chunk: int = 32768,
) -> ErrorReport:
    """Compute the five error columns for one solved mesh level.

    u_b holds one value per edge (interior solution plus boundary data).
    """
    coeffs = reconstruct_interior(mesh, u_b)
    c1v, c2v, c3v = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2]
    hx, hy, xc, yc = mesh.cell_arrays
    area = hx * hy
    nc = mesh.n_cells

    # center-value columns: the lift at the center is just c1
    u_center = np.asarray(case.u(xc, yc), dtype=float)
    e_inf_star = float(np.max(np.abs(u_center - c1v)))
    gx_c, gy_c = case.grad_u(xc, yc)
    e_h1_star_sq = float(
        np.sum(((c2v - np.asarray(gx_c)) ** 2 + (c3v - np.asarray(gy_c)) ** 2) * area)
    )

    # weak gradient of the edge-average defect
    qb = edge_average_all(mesh, case.u, quad_order)
    dv = qb[mesh.cell_edges] - u_b[mesh.cell_edges]
    gwx = (dv[:, 1] - dv[:, 0]) / hx
    gwy = (dv[:, 3] - dv[:, 2]) / hy
    e_h1_weak_sq = float(np.sum((gwx**2 + gwy**2) * area))

    # quadrature passes: L2 error and the cell-linear projection moments
    x0c, x1c = xc - 0.5 * hx, xc + 0.5 * hx
    y0c, y1c = yc - 0.5 * hy, yc + 0.5 * hy
    e_l2_sq = 0.0
    e_h1_proj_sq = 0.0
    for sl in iter_cell_chunks(nc, chunk):
        X, Y, W = cell_rule_batch(x0c[sl], x1c[sl], y0c[sl], y1c[sl], quad_order)
        uv = np.asarray(case.u(X, Y), dtype=float)
        dxc = X - xc[sl, None]
        dyc = Y - yc[sl, None]
        lift = c1v[sl, None] + c2v[sl, None] * dxc + c3v[sl, None] * dyc
        e_l2_sq += float(np.sum(W * (uv - lift) ** 2))
        a1 = (W * uv * dxc).sum(axis=1) / (area[sl] * hx[sl] ** 2 / 12.0)
        a2 = (W * uv * dyc).sum(axis=1) / (area[sl] * hy[sl] ** 2 / 12.0)
        e_h1_proj_sq += float(
            np.sum(((a1 - c2v[sl]) ** 2 + (a2 - c3v[sl]) ** 2) * area[sl])
        )

    return ErrorReport(
        h_label=float(h_label),
        n_dofs=mesh.n_dofs,
        e_inf_star=e_inf_star,
        e_l2=math.sqrt(e_l2_sq),
        e_h1_weak=math.sqrt(e_h1_weak_sq),
        e_h1_star=math.sqrt(e_h1_star_sq),
        e_h1_proj=math.sqrt(e_h1_proj_sq),
        cg_iters=cg_iters,
    )


def e_h1_weak_via_cell_mean(
    mesh: Mesh, case: ProblemCase, u_b: np.ndarray, quad_order: int = 5
) -> float:
    """Same quantity as the e_h1_weak column, through the commuting route:
    the cell mean of grad(u) minus the weak gradient of the solution."""
    coeffs = reconstruct_interior(mesh, u_b)
    hx, hy, xc, yc = mesh.cell_arrays
    area = hx * hy
    x0c, x1c = xc - 0.5 * hx, xc + 0.5 * hx
    y0c, y1c = yc - 0.5 * hy, yc + 0.5 * hy
    total = 0.0
    for sl in iter_cell_chunks(mesh.n_cells):
        X, Y, W = cell_rule_batch(x0c[sl], x1c[sl], y0c[sl], y1c[sl], quad_order)
        gx, gy = case.grad_u(X, Y)
        mx = (W * np.asarray(gx, dtype=float)).sum(axis=1) / area[sl]
        my = (W * np.asarray(gy, dtype=float)).sum(axis=1) / area[sl]
        total += float(np.sum(
            ((mx - coeffs[sl, 1]) ** 2 + (my - coeffs[sl, 2]) ** 2) * area[sl]
        ))
    return math.sqrt(total)


# -- observed orders ----------------------------------------------------------

@dataclass(frozen=True)
class RateSummary:
    """Observed orders per error column.

    pairwise[c][k] = log2(e_k / e_{k+1}); last_pair is the final entry
    (the single "Rate" row of a table); least_squares is the slope of
    log e against log h over all levels.  Zero errors yield NaN.
    """

    pairwise: dict[str, list[float]]
    last_pair: dict[str, float]
    least_squares: dict[str, float]


def _safe_rate(coarse: float, fine: float) -> float:
    if coarse <= 0.0 or fine <= 0.0:
        return math.nan
    return math.log2(coarse / fine)


def rates(reports: list[ErrorReport]) -> RateSummary:
    """Orders for a nested refinement family (each level bisects the last)."""
    if len(reports) < 2:
        raise ValueError("need at least two levels to observe a rate")
    pairwise: dict[str, list[float]] = {}
    last: dict[str, float] = {}
    lsq: dict[str, float] = {}
    hs = np.array([r.h_label for r in reports])
    for col in ERROR_COLUMNS:
        e = [r.column(col) for r in reports]
        pw = [_safe_rate(e[k], e[k + 1]) for k in range(len(e) - 1)]
        pairwise[col] = pw
        last[col] = round(pw[-1], 2) if not math.isnan(pw[-1]) else math.nan
        if min(e) > 0.0:
            slope = np.polyfit(np.log(hs), np.log(e), 1)[0]
            lsq[col] = float(slope)
        else:
            lsq[col] = math.nan
    return RateSummary(pairwise, last, lsq)


def pairwise_rates(reports: list[ErrorReport]) -> RateSummary:
    """Orders for resampled pairs: reports alternate (coarse, bisected)."""
    if len(reports) < 2 or len(reports) % 2:
        raise ValueError("resampled reports must come in (coarse, fine) pairs")
    pairwise: dict[str, list[float]] = {}
    last: dict[str, float] = {}
    for col in ERROR_COLUMNS:
        pw = [
            _safe_rate(reports[2 * p].column(col), reports[2 * p + 1].column(col))
            for p in range(len(reports) // 2)
        ]
        pairwise[col] = pw
        last[col] = round(pw[-1], 2) if not math.isnan(pw[-1]) else math.nan
    return RateSummary(pairwise, last, {c: math.nan for c in ERROR_COLUMNS})
