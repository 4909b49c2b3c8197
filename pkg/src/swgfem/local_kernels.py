"""Closed-form local kernels on a single rectangular element.

Edge values live in the fixed order (e1 left, e2 right, e3 bottom, e4 top).
The discrete weak gradient of four edge constants is the two-point difference
quotient vector; its linear least-squares lift to the cell shares that
gradient, which is what makes every kernel here a small closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .mesh import CellGeom
from .quadrature import cell_rule_batch

#: D(v) = v3 + v4 - v1 - v2, the one nonzero mode of the stabilizer.
STAB_MODE = np.array([-1.0, -1.0, 1.0, 1.0])


class InvalidCoefficientError(ValueError):
    """Diffusion tensor is not symmetric positive definite."""


class ExtensionCoeffs(NamedTuple):
    """p(x, y) = c1 + c2*(x - xc) + c3*(y - yc) on one cell."""

    c1: float
    c2: float
    c3: float

    def __call__(self, x, y, xc: float, yc: float):
        return self.c1 + self.c2 * (np.asarray(x) - xc) + self.c3 * (np.asarray(y) - yc)


@dataclass
class LocalSystem:
    """Local 4x4 blocks and load of one element."""

    K: np.ndarray                      # diffusion stiffness
    Sst: np.ndarray                    # stabilizer
    F: np.ndarray                      # load
    R: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    @property
    def matrix(self) -> np.ndarray:
        return self.K + self.Sst + self.R


def gradient_map(cell: CellGeom) -> np.ndarray:
    """2x4 map G with weak_gradient(v) = G @ v."""
    return np.array([
        [-1.0 / cell.hx, 1.0 / cell.hx, 0.0, 0.0],
        [0.0, 0.0, -1.0 / cell.hy, 1.0 / cell.hy],
    ])


def weak_gradient(cell: CellGeom, v) -> np.ndarray:
    """Constant weak gradient ((v2-v1)/hx, (v4-v3)/hy) of the edge values."""
    v = np.asarray(v, dtype=float)
    return np.array([(v[1] - v[0]) / cell.hx, (v[3] - v[2]) / cell.hy])


def extension(cell: CellGeom, v) -> ExtensionCoeffs:
    """Least-squares linear lift of four edge constants to the cell.

    The constant term averages the edge values with the opposite edge lengths
    as weights; the gradient equals the weak gradient of the same values.
    """
    v = np.asarray(v, dtype=float)
    hx, hy = cell.hx, cell.hy
    c1 = (hy * (v[0] + v[1]) + hx * (v[2] + v[3])) / (2.0 * (hy + hx))
    return ExtensionCoeffs(float(c1), (v[1] - v[0]) / hx, (v[3] - v[2]) / hy)


def extension_basis(cell: CellGeom) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients (c1[s], c2[s], c3[s]) of the lifts of the four unit
    edge-value vectors; phi_s = c1[s] + c2[s]*(x-xc) + c3[s]*(y-yc)."""
    hx, hy = cell.hx, cell.hy
    c1 = np.array([hy, hy, hx, hx]) / (2.0 * (hy + hx))
    c2 = np.array([-1.0 / hx, 1.0 / hx, 0.0, 0.0])
    c3 = np.array([0.0, 0.0, -1.0 / hy, 1.0 / hy])
    return c1, c2, c3


def _check_spd_tensor(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise InvalidCoefficientError(f"expected a 2x2 tensor, got shape {a.shape}")
    if abs(a[0, 1] - a[1, 0]) > 1e-12 * (1.0 + abs(a[0, 1])):
        raise InvalidCoefficientError("diffusion tensor must be symmetric")
    if a[0, 0] <= 0 or np.linalg.det(a) <= 0:
        raise InvalidCoefficientError("diffusion tensor must be positive definite")
    return a


def local_stiffness(cell: CellGeom, a) -> np.ndarray:
    """Diffusion block |T| * G' a G for a constant SPD tensor a.

    For variable coefficients pass the cell average of the tensor; since the
    weak gradient is constant on the cell this evaluates the form exactly.
    """
    a = _check_spd_tensor(a)
    G = gradient_map(cell)
    return cell.area * (G.T @ a @ G)


def local_stabilizer(cell: CellGeom, rho: float, h_global: float) -> np.ndarray:
    """Rank-1 stabilizer sigma * d d' with d = (-1, -1, 1, 1).

    sigma = (rho/h_global) * hx*hy / (2*(hx+hy)) is the exact edge-sum of the
    penalty form: on each edge both factors are the constant midpoint defects
    of the lift, proportional to D(v) = d.v.
    """
    if rho <= 0 or h_global <= 0:
        raise ValueError("rho and h_global must be positive")
    sigma = (rho / h_global) * cell.area / (2.0 * (cell.hx + cell.hy))
    return sigma * np.outer(STAB_MODE, STAB_MODE)


def _cell_quad(cell: CellGeom, quad_order: int):
    x0, x1, y0, y1 = cell.bounds
    X, Y, W = cell_rule_batch(
        np.array([x0]), np.array([x1]), np.array([y0]), np.array([y1]), quad_order
    )
    return X[0], Y[0], W[0]


def local_load(cell: CellGeom, f: Callable, quad_order: int = 5) -> np.ndarray:
    """Load vector F_s = integral of f * phi_s over the cell."""
    X, Y, W = _cell_quad(cell, quad_order)
    c1, c2, c3 = extension_basis(cell)
    fv = W * np.asarray(f(X, Y), dtype=float)
    phi = c1[:, None] + c2[:, None] * (X - cell.xc) + c3[:, None] * (Y - cell.yc)
    return phi @ fv


def local_reaction(cell: CellGeom, c: Callable, quad_order: int = 5) -> np.ndarray:
    """Reaction block R[s,t] = integral of c * phi_s * phi_t over the cell."""
    X, Y, W = _cell_quad(cell, quad_order)
    c1, c2, c3 = extension_basis(cell)
    cv = W * np.asarray(c(X, Y), dtype=float)
    phi = c1[:, None] + c2[:, None] * (X - cell.xc) + c3[:, None] * (Y - cell.yc)
    return (phi * cv) @ phi.T
