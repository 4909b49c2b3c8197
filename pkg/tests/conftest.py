"""Shared helpers: cell factories and independent quadrature oracles.

The oracle functions here deliberately avoid the closed forms under test:
they integrate definitions with high-order Gauss rules or solve the small
least-squares systems directly.
"""

from __future__ import annotations

import numpy as np
import pytest

from swgfem.mesh import CellGeom
from swgfem.quadrature import gauss_legendre


def make_cell(hx: float, hy: float, xc: float = 0.5, yc: float = 0.5) -> CellGeom:
    return CellGeom(1, 1, float(hx), float(hy), float(xc), float(yc), (0, 1, 2, 3))


UNIT_CELL = make_cell(1.0, 1.0, 0.5, 0.5)


def random_cells(count: int, seed: int = 1234) -> list[CellGeom]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        hx, hy = rng.uniform(0.05, 3.0, size=2)
        xc, yc = rng.uniform(-2.0, 2.0, size=2)
        out.append(make_cell(hx, hy, xc, yc))
    return out


def integrate_cell(f, cell: CellGeom, npts: int = 12) -> float:
    """High-order tensor Gauss integral of f over the cell."""
    x0, x1, y0, y1 = cell.bounds
    t, w = gauss_legendre(npts)
    qx = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t
    qy = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t
    X, Y = np.meshgrid(qx, qy, indexing="ij")
    W = 0.25 * (x1 - x0) * (y1 - y0) * np.outer(w, w)
    return float(np.sum(W * f(X, Y)))


def integrate_segment(f, p0, p1, npts: int = 12) -> float:
    t, w = gauss_legendre(npts)
    t01 = 0.5 * (t + 1.0)
    xs = p0[0] + (p1[0] - p0[0]) * t01
    ys = p0[1] + (p1[1] - p0[1]) * t01
    length = np.hypot(p1[0] - p0[0], p1[1] - p0[1])
    return float(0.5 * length * np.sum(w * f(xs, ys)))


def edge_segments(cell: CellGeom):
    """Endpoints of e1..e4 in the cell's fixed ordering."""
    x0, x1, y0, y1 = cell.bounds
    return [
        ((x0, y0), (x0, y1)),  # e1 left
        ((x1, y0), (x1, y1)),  # e2 right
        ((x0, y0), (x1, y0)),  # e3 bottom
        ((x0, y1), (x1, y1)),  # e4 top
    ]


def extension_oracle(cell: CellGeom, v) -> np.ndarray:
    """Lift coefficients from the normal equations of the defining relation,
    with edge averages of the trial linear taken by quadrature."""
    v = np.asarray(v, dtype=float)
    segs = edge_segments(cell)
    M = np.zeros((3, 3))
    rhs = np.zeros(3)
    monomials = [
        lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
        lambda x, y: np.asarray(x, dtype=float) - cell.xc,
        lambda x, y: np.asarray(y, dtype=float) - cell.yc,
    ]
    for s, (p0, p1) in enumerate(segs):
        for a in range(3):
            rhs[a] += v[s] * integrate_segment(monomials[a], p0, p1)
            for b in range(3):
                M[a, b] += integrate_segment(
                    lambda x, y, a=a, b=b: monomials[a](x, y) * monomials[b](x, y),
                    p0, p1,
                )
    # the defining relation tests the lift's edge averages against v_b, which
    # reduces to this weighted least-squares system for a linear lift
    return np.linalg.solve(M, rhs)


def stabilizer_oracle(cell: CellGeom, rho: float, h_global: float) -> np.ndarray:
    """Definitional stabilizer: rho/h * sum_e int_e (u - avg lift)(v - avg lift)."""
    segs = edge_segments(cell)
    lengths = [np.hypot(p1[0] - p0[0], p1[1] - p0[1]) for p0, p1 in segs]
    defect = np.zeros((4, 4))  # defect[s, e] = (unit_s - Qb lift(unit_s)) on edge e
    for s in range(4):
        unit = np.zeros(4)
        unit[s] = 1.0
        c = extension_oracle(cell, unit)
        for e, (p0, p1) in enumerate(segs):
            lift_avg = integrate_segment(
                lambda x, y: c[0] + c[1] * (np.asarray(x) - cell.xc)
                + c[2] * (np.asarray(y) - cell.yc),
                p0, p1,
            ) / lengths[e]
            defect[s, e] = unit[e] - lift_avg
    S = np.zeros((4, 4))
    for s in range(4):
        for t in range(4):
            S[s, t] = sum(lengths[e] * defect[s, e] * defect[t, e] for e in range(4))
    return (rho / h_global) * S


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
