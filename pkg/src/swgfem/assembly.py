"""Global SPD assembly over interior-edge unknowns.

The scheme couples only the four edge values of each cell: local blocks are
the diffusion stiffness |T| G'aG, the rank-1 stabilizer, and (for reaction
problems) the lifted mass block.  Dirichlet edges are eliminated, moving
their columns to the right-hand side.  Assembly is vectorized over cells in
fixed chunks and scattered through one COO->CSR conversion, which makes it
deterministic run-to-run.

For variable tensors the per-cell coefficient is the quadrature average of
each entry; the weak gradient is constant per cell, so this evaluates the
bilinear form exactly rather than approximating it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .boundary import BoundaryMode, boundary_values, parse_mode
from .cases import ProblemCase
from .local_kernels import STAB_MODE
from .mesh import Mesh
from .quadrature import cell_rule_batch, iter_cell_chunks


class InterfaceAlignmentError(ValueError):
    """Mesh grid lines miss an interface the case requires."""


@dataclass
class SparseSpd:
    """Assembled symmetric positive definite system."""

    A: sp.csr_matrix
    b: np.ndarray

    @property
    def n(self) -> int:
        return len(self.b)

    def symmetry_defect(self) -> float:
        """Max |A - A'| entry relative to the largest |A| entry."""
        if self.n == 0:
            return 0.0
        diff = (self.A - self.A.T).tocoo()
        scale = np.abs(self.A.data).max() if self.A.nnz else 1.0
        if diff.nnz == 0:
            return 0.0
        return float(np.abs(diff.data).max() / scale)


def check_interface_alignment(mesh: Mesh, case: ProblemCase, tol: float = 1e-12):
    for x in case.interfaces_x:
        if not mesh.contains_grid_line_x(x, tol):
            raise InterfaceAlignmentError(
                f"case {case.id} needs a grid line at x = {x}"
            )
    for y in case.interfaces_y:
        if not mesh.contains_grid_line_y(y, tol):
            raise InterfaceAlignmentError(
                f"case {case.id} needs a grid line at y = {y}"
            )


def assemble(
    mesh: Mesh,
    case: ProblemCase,
    rho: float,
    mode: BoundaryMode = BoundaryMode.L2_PROJECTION,
    quad_order: int = 5,
    chunk: int = 32768,
) -> tuple[SparseSpd, np.ndarray]:
    """Assemble the interior-edge system; returns (system, boundary values).

    The boundary-value array is indexed by edge gid and already folded into
    the right-hand side.
    """
    mode = parse_mode(mode)
    check_interface_alignment(mesh, case)
    if rho <= 0:
        raise ValueError(f"stabilization parameter must be positive, got {rho}")

    g_edge = boundary_values(mode, case, mesh, rho, quad_order)

    hx, hy, xc, yc = mesh.cell_arrays
    nc = mesh.n_cells
    area = hx * hy
    ce = mesh.cell_edges
    dof = mesh.edge_dof
    h_glob = mesh.h

    x0, x1 = xc - 0.5 * hx, xc + 0.5 * hx
    y0, y1 = yc - 0.5 * hy, yc + 0.5 * hy

    # lifted basis coefficients per cell, shape (nc, 4)
    denom = 2.0 * (hx + hy)
    c1 = np.stack([hy, hy, hx, hx], axis=1) / denom[:, None]
    zeros = np.zeros(nc)
    c2 = np.stack([-1.0 / hx, 1.0 / hx, zeros, zeros], axis=1)
    c3 = np.stack([zeros, zeros, -1.0 / hy, 1.0 / hy], axis=1)

    local = np.empty((nc, 4, 4))
    loads = np.empty((nc, 4))
    sigma = (rho / h_glob) * area / denom
    dd = np.outer(STAB_MODE, STAB_MODE)
    lift_coeffs = (c1, c2, c3)

    for sl in iter_cell_chunks(nc, chunk):
        X, Y, W = cell_rule_batch(x0[sl], x1[sl], y0[sl], y1[sl], quad_order)
        dx = X - xc[sl, None]
        dy = Y - yc[sl, None]
        inv_area = 1.0 / area[sl]
        if case.a_constant is not None:
            a11m, a12m, a22m = case.a_constant
        else:
            a11, a12, a22 = (np.asarray(comp, dtype=float)
                             for comp in case.a(X, Y))
            a11m = (W * a11).sum(axis=1) * inv_area
            a12m = (W * a12).sum(axis=1) * inv_area
            a22m = (W * a22).sum(axis=1) * inv_area

        gx = c2[sl]   # rows of the gradient map coincide with lift gradients
        gy = c3[sl]
        K = (a11m * area[sl])[:, None, None] * (gx[:, :, None] * gx[:, None, :])
        K += (a22m * area[sl])[:, None, None] * (gy[:, :, None] * gy[:, None, :])
        cross = gx[:, :, None] * gy[:, None, :]
        K += (a12m * area[sl])[:, None, None] * (cross + cross.transpose(0, 2, 1))
        K += sigma[sl][:, None, None] * dd

        # lifted basis functions are linear, so only low moments of the
        # weighted fields are needed: F_s = sum_a coeff_a[s] * M_a and
        # R[s,t] = sum_ab coeff_a[s] coeff_b[t] * N_ab with monomials
        # (1, x-xc, y-yc)
        fw = W * np.asarray(case.f(X, Y), dtype=float)
        mono = (None, dx, dy)
        loads[sl] = sum(
            (fw if m is None else fw * m).sum(axis=1)[:, None] * ca[sl]
            for m, ca in zip(mono, lift_coeffs)
        )
        if case.c is not None:
            cw = W * np.asarray(case.c(X, Y), dtype=float)
            for ia, ma in enumerate(mono):
                cwa = cw if ma is None else cw * ma
                for ib, mb in enumerate(mono):
                    n_ab = (cwa if mb is None else cwa * mb).sum(axis=1)
                    K += n_ab[:, None, None] * (
                        lift_coeffs[ia][sl][:, :, None]
                        * lift_coeffs[ib][sl][:, None, :]
                    )
        local[sl] = K

    n_dofs = mesh.n_dofs
    rows_e = np.repeat(ce, 4, axis=1).ravel()          # cell-major (s, t) pairs
    cols_e = np.tile(ce, (1, 4)).ravel()
    vals = local.ravel()
    r_dof = dof[rows_e]
    c_dof = dof[cols_e]

    both = (r_dof >= 0) & (c_dof >= 0)
    A = sp.coo_matrix(
        (vals[both], (r_dof[both], c_dof[both])), shape=(n_dofs, n_dofs)
    ).tocsr()
    A.sum_duplicates()

    b = np.zeros(n_dofs)
    lift = (r_dof >= 0) & (c_dof < 0)
    np.add.at(b, r_dof[lift], -vals[lift] * g_edge[cols_e[lift]])

    load_dofs = dof[ce.ravel()]
    keep = load_dofs >= 0
    np.add.at(b, load_dofs[keep], loads.ravel()[keep])

    return SparseSpd(A, b), g_edge


def full_edge_vector(mesh: Mesh, x: np.ndarray, g_edge: np.ndarray) -> np.ndarray:
    """Combine solved interior DOFs and boundary data into one per-edge array."""
    u_b = np.array(g_edge, dtype=float)
    u_b[mesh.dof_edge] = x
    return u_b


def reconstruct_interior(mesh: Mesh, u_b: np.ndarray) -> np.ndarray:
    """Per-cell lift coefficients of the edge solution, shape (n_cells, 3).

    Column order (c1, c2, c3) with the gradient (c2, c3) equal to the weak
    gradient of the cell's edge values.
    """
    hx, hy, _, _ = mesh.cell_arrays
    v = u_b[mesh.cell_edges]               # (nc, 4)
    c1 = (hy * (v[:, 0] + v[:, 1]) + hx * (v[:, 2] + v[:, 3])) / (2.0 * (hx + hy))
    c2 = (v[:, 1] - v[:, 0]) / hx
    c3 = (v[:, 3] - v[:, 2]) / hy
    return np.stack([c1, c2, c3], axis=1)


def prolong_edge_values(
    coarse: Mesh, u_b_coarse: np.ndarray, fine: Mesh
) -> np.ndarray:
    """Initial guess on a finer mesh: the coarse per-cell lift evaluated at
    the fine edge midpoints.  Returns values for the fine interior DOFs."""
    coeffs = reconstruct_interior(coarse, u_b_coarse)
    _, _, xc, yc = coarse.cell_arrays
    ex0, ey0, ex1, ey1 = fine.edge_endpoints
    xm = 0.5 * (ex0 + ex1)
    ym = 0.5 * (ey0 + ey1)
    kx = np.clip(np.searchsorted(coarse.xs, xm, side="right") - 1, 0, coarse.n - 1)
    ky = np.clip(np.searchsorted(coarse.ys, ym, side="right") - 1, 0, coarse.m - 1)
    k = ky * coarse.n + kx
    vals = coeffs[k, 0] + coeffs[k, 1] * (xm - xc[k]) + coeffs[k, 2] * (ym - yc[k])
    return vals[fine.dof_edge]


def dump_matrix(system: SparseSpd, path) -> None:
    """Coordinate text dump: 'row col value' per line, 17 significant digits."""
    coo = system.A.tocoo()
    with open(path, "w") as fh:
        fh.write(f"{system.n} {system.n} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
