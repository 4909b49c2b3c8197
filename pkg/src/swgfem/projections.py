"""L2 projections used by the scheme and the error metrics.

All three projections integrate the analytic field with Gauss quadrature;
none of them differences numerical data.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .mesh import CellGeom, EdgeIndex
from .quadrature import segment_rule_batch
from . import local_kernels


class P1Coeffs(NamedTuple):
    """p(x, y) = a0 + a1*(x - xc) + a2*(y - yc) on one cell."""

    a0: float
    a1: float
    a2: float


def q_b(f: Callable, edge: EdgeIndex, quad_order: int = 5) -> float:
    """Average of f along one edge."""
    X, Y, W = segment_rule_batch(
        np.array([edge.x0]), np.array([edge.y0]),
        np.array([edge.x1]), np.array([edge.y1]), quad_order,
    )
    return float((W[0] @ np.asarray(f(X[0], Y[0]), dtype=float)) / edge.length)


def q_0(f: Callable, cell: CellGeom, quad_order: int = 5) -> P1Coeffs:
    """Projection onto cell linears.

    {1, x-xc, y-yc} are L2-orthogonal on a rectangle, so the coefficients are
    plain moment ratios; the second moments have the closed forms
    |T|*hx^2/12 and |T|*hy^2/12.
    """
    X, Y, W = local_kernels._cell_quad(cell, quad_order)
    fv = W * np.asarray(f(X, Y), dtype=float)
    area = cell.area
    a0 = fv.sum() / area
    a1 = float(fv @ (X - cell.xc)) / (area * cell.hx**2 / 12.0)
    a2 = float(fv @ (Y - cell.yc)) / (area * cell.hy**2 / 12.0)
    return P1Coeffs(float(a0), a1, a2)


def q_h_grad(grad_f: Callable, cell: CellGeom, quad_order: int = 5) -> np.ndarray:
    """Componentwise cell average of a gradient field.

    grad_f(x, y) must return the pair (df/dx, df/dy), vectorized.
    """
    X, Y, W = local_kernels._cell_quad(cell, quad_order)
    gx, gy = grad_f(X, Y)
    area = cell.area
    return np.array([
        float(W @ np.asarray(gx, dtype=float)) / area,
        float(W @ np.asarray(gy, dtype=float)) / area,
    ])
