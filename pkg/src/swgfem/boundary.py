"""Dirichlet data for boundary-edge unknowns.

Two treatments: the plain L2 projection (edge average of g), and a perturbed
projection that adds an O(h^2) correction built from the second tangential
derivative of g.  The perturbed form only closes without knowledge of the
interior solution when the diffusion tensor is diagonal along the boundary,
so it is rejected otherwise.  On a vertical boundary edge of height h_y the
perturbed value is

    Q_b(g) + (1/12) * h_y * (h_y - 6 * a22 * h / rho) * Q_b(g_yy)

with h the global mesh size (the same scale the stabilizer uses) and a22
sampled at the edge midpoint; horizontal edges use h_x, a11 and g_xx.  With
rho = 6 on uniform squares and a = I the correction factor is exactly zero,
so both treatments produce identical systems there.
"""

from __future__ import annotations

import enum

import numpy as np

from .cases import ProblemCase
from .mesh import Mesh
from .quadrature import segment_rule_batch


class BoundaryMode(enum.Enum):
    L2_PROJECTION = "l2"
    PERTURBED_PROJECTION = "perturbed"


class UnsupportedModeError(ValueError):
    """Perturbed projection requested for a non-diagonal boundary tensor."""


def parse_mode(name) -> BoundaryMode:
    if isinstance(name, BoundaryMode):
        return name
    try:
        return BoundaryMode(str(name).lower())
    except ValueError:
        raise ValueError(
            f"unknown boundary mode {name!r}; expected 'l2' or 'perturbed'"
        ) from None


def _edge_averages(f, x0, y0, x1, y1, quad_order: int) -> np.ndarray:
    X, Y, W = segment_rule_batch(x0, y0, x1, y1, quad_order)
    lengths = np.hypot(x1 - x0, y1 - y0)
    return (W * np.asarray(f(X, Y), dtype=float)).sum(axis=1) / lengths


def boundary_values(
    mode: BoundaryMode,
    case: ProblemCase,
    mesh: Mesh,
    rho: float,
    quad_order: int = 5,
) -> np.ndarray:
    """Dirichlet values per edge gid (zeros on interior edges)."""
    mode = parse_mode(mode)
    if mode is BoundaryMode.PERTURBED_PROJECTION and not case.diag_on_boundary:
        raise UnsupportedModeError(
            f"case {case.id}: the perturbed projection needs a diagonal "
            "diffusion tensor on the boundary"
        )
    ex0, ey0, ex1, ey1 = mesh.edge_endpoints
    bdry = np.flatnonzero(mesh.edge_is_boundary)
    vertical = bdry[bdry < mesh.n_vertical_edges]
    horizontal = bdry[bdry >= mesh.n_vertical_edges]

    values = np.zeros(mesh.n_edges)
    for gids, g_tt, tensor_idx in (
        (vertical, case.u_yy, 2),
        (horizontal, case.u_xx, 0),
    ):
        x0, y0 = ex0[gids], ey0[gids]
        x1, y1 = ex1[gids], ey1[gids]
        vals = _edge_averages(case.u, x0, y0, x1, y1, quad_order)
        if mode is BoundaryMode.PERTURBED_PROJECTION:
            h_edge = np.hypot(x1 - x0, y1 - y0)
            xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            a_tt = np.asarray(case.a(xm, ym)[tensor_idx], dtype=float)
            factor = h_edge * (h_edge - (6.0 / rho) * a_tt * mesh.h) / 12.0
            vals = vals + factor * _edge_averages(g_tt, x0, y0, x1, y1, quad_order)
        values[gids] = vals
    return values
