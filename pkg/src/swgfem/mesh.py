"""Tensor-product rectangular meshes with edge/DOF enumeration.

A mesh is the Cartesian product of two strictly increasing 1-d partitions.
Cell (i, j), 1-based, is [xs[i-1], xs[i]] x [ys[j-1], ys[j]].  Each cell sees
its four edges in the fixed order (e1 left, e2 right, e3 bottom, e4 top), so
|e1| = |e2| = hy and |e3| = |e4| = hx.

Edge numbering: vertical edges first, gid = i*m + (j-1) for the edge at
x = xs[i] spanning [ys[j-1], ys[j]]; then horizontal edges,
gid = (n+1)*m + j*n + (i-1) for the edge at y = ys[j] spanning
[xs[i-1], xs[i]].  Interior edges get contiguous DOF ids in ascending gid
order.  Everything is deterministic and immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

Domain = tuple[float, float, float, float]  # (x_min, x_max, y_min, y_max)

UNIT_SQUARE: Domain = (0.0, 1.0, 0.0, 1.0)


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 recurrence: returns (new_state, output)."""
    mask = (1 << 64) - 1
    state = (state + 0x9E3779B97F4A7C15) & mask
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    z = z ^ (z >> 31)
    return state, z


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """`count` deterministic uniforms in [0, 1) from a splitmix64 stream."""
    state = seed & ((1 << 64) - 1)
    out = np.empty(count)
    for k in range(count):
        state, z = _splitmix64(state)
        out[k] = (z >> 11) * 2.0 ** -53
    return out


@dataclass(frozen=True)
class CellGeom:
    """Geometry and edge connectivity of one rectangular element."""

    i: int
    j: int
    hx: float
    hy: float
    xc: float
    yc: float
    edge_dofs: tuple[int, int, int, int]  # global edge ids (e1, e2, e3, e4)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.xc - 0.5 * self.hx, self.xc + 0.5 * self.hx,
                self.yc - 0.5 * self.hy, self.yc + 0.5 * self.hy)

    @property
    def area(self) -> float:
        return self.hx * self.hy

    def midpoints(self) -> np.ndarray:
        """Edge midpoints M1..M4, shape (4, 2)."""
        x0, x1, y0, y1 = self.bounds
        return np.array([[x0, self.yc], [x1, self.yc],
                         [self.xc, y0], [self.xc, y1]])


@dataclass(frozen=True)
class EdgeIndex:
    """One edge of the mesh: orientation, grid position, endpoints, DOF id."""

    orientation: str           # "vertical" | "horizontal"
    i: int
    j: int
    gid: int
    is_boundary: bool
    dof: int | None            # present iff interior
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    @property
    def midpoint(self) -> tuple[float, float]:
        return 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)


@dataclass(frozen=True)
class Mesh:
    """Immutable tensor-product partition of an axis-aligned rectangle."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if len(xs) < 2 or len(ys) < 2:
            raise ValueError("mesh needs at least one cell per direction")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("grid coordinates must be strictly increasing")
        xs.setflags(write=False)
        ys.setflags(write=False)

    # -- basic counts ------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.xs) - 1

    @property
    def m(self) -> int:
        return len(self.ys) - 1

    @property
    def n_cells(self) -> int:
        return self.n * self.m

    @property
    def domain(self) -> Domain:
        return (float(self.xs[0]), float(self.xs[-1]),
                float(self.ys[0]), float(self.ys[-1]))

    @property
    def n_edges(self) -> int:
        return (self.n + 1) * self.m + self.n * (self.m + 1)

    @property
    def n_dofs(self) -> int:
        return (self.n - 1) * self.m + self.n * (self.m - 1)

    # -- mesh size ---------------------------------------------------------
    @cached_property
    def h(self) -> float:
        """Mesh size used in the stabilizer scale rho/h and the boundary
        perturbation: the largest edge length max(hx, hy) over the mesh."""
        return float(max(np.max(np.diff(self.xs)), np.max(np.diff(self.ys))))

    @property
    def hx_max(self) -> float:
        return float(np.max(np.diff(self.xs)))

    @property
    def hy_max(self) -> float:
        return float(np.max(np.diff(self.ys)))

    # -- edge numbering ----------------------------------------------------
    def vid(self, i, j):
        """Gid of the vertical edge at x=xs[i], y in [ys[j-1], ys[j]]."""
        return i * self.m + (j - 1)

    def hid(self, i, j):
        """Gid of the horizontal edge at y=ys[j], x in [xs[i-1], xs[i]]."""
        return (self.n + 1) * self.m + j * self.n + (i - 1)

    @cached_property
    def cell_edges(self) -> np.ndarray:
        """(n_cells, 4) int array of edge gids per cell, order e1..e4.

        Cells are row-major: index k = (j-1)*n + (i-1).
        """
        n, m = self.n, self.m
        I, J = np.meshgrid(np.arange(1, n + 1), np.arange(1, m + 1))
        I = I.ravel()
        J = J.ravel()
        return np.stack(
            [self.vid(I - 1, J), self.vid(I, J), self.hid(I, J - 1), self.hid(I, J)],
            axis=1,
        ).astype(np.int64)

    @cached_property
    def cell_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-cell (hx, hy, xc, yc), each shape (n_cells,), row-major."""
        hx = np.diff(self.xs)
        hy = np.diff(self.ys)
        xc = 0.5 * (self.xs[:-1] + self.xs[1:])
        yc = 0.5 * (self.ys[:-1] + self.ys[1:])
        HX, HY = np.meshgrid(hx, hy)
        XC, YC = np.meshgrid(xc, yc)
        return HX.ravel(), HY.ravel(), XC.ravel(), YC.ravel()

    @cached_property
    def edge_is_boundary(self) -> np.ndarray:
        n, m = self.n, self.m
        flag = np.zeros(self.n_edges, dtype=bool)
        J = np.arange(1, m + 1)
        flag[self.vid(0, J)] = True
        flag[self.vid(n, J)] = True
        I = np.arange(1, n + 1)
        flag[self.hid(I, 0)] = True
        flag[self.hid(I, m)] = True
        return flag

    @cached_property
    def edge_dof(self) -> np.ndarray:
        """(n_edges,) DOF id per edge; -1 on boundary edges."""
        dof = np.full(self.n_edges, -1, dtype=np.int64)
        interior = np.flatnonzero(~self.edge_is_boundary)
        dof[interior] = np.arange(len(interior))
        return dof

    @cached_property
    def dof_edge(self) -> np.ndarray:
        """(n_dofs,) edge gid per DOF (inverse of edge_dof on interiors)."""
        return np.flatnonzero(~self.edge_is_boundary)

    @cached_property
    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Edge endpoint arrays (x0, y0, x1, y1), each shape (n_edges,)."""
        n, m = self.n, self.m
        nv = (n + 1) * m
        x0 = np.empty(self.n_edges)
        y0 = np.empty(self.n_edges)
        x1 = np.empty(self.n_edges)
        y1 = np.empty(self.n_edges)
        # vertical: gid = i*m + (j-1)
        I, J = np.meshgrid(np.arange(n + 1), np.arange(1, m + 1), indexing="ij")
        gv = (I * m + (J - 1)).ravel()
        x0[gv] = x1[gv] = self.xs[I.ravel()]
        y0[gv] = self.ys[J.ravel() - 1]
        y1[gv] = self.ys[J.ravel()]
        # horizontal: gid = nv + j*n + (i-1)
        I, J = np.meshgrid(np.arange(1, n + 1), np.arange(m + 1), indexing="ij")
        gh = (nv + J * n + (I - 1)).ravel()
        y0[gh] = y1[gh] = self.ys[J.ravel()]
        x0[gh] = self.xs[I.ravel() - 1]
        x1[gh] = self.xs[I.ravel()]
        return x0, y0, x1, y1

    @property
    def n_vertical_edges(self) -> int:
        return (self.n + 1) * self.m

    def contains_grid_line_x(self, x: float, tol: float = 1e-12) -> bool:
        return bool(np.any(np.abs(self.xs - x) <= tol))

    def contains_grid_line_y(self, y: float, tol: float = 1e-12) -> bool:
        return bool(np.any(np.abs(self.ys - y) <= tol))


# -- builders ---------------------------------------------------------------

def build_uniform(n: int, m: int, domain: Domain = UNIT_SQUARE) -> Mesh:
    """Uniform n x m partition of the given rectangle."""
    if n < 1 or m < 1:
        raise ValueError(f"cell counts must be positive, got {n} x {m}")
    x_min, x_max, y_min, y_max = domain
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"degenerate domain {domain}")
    return Mesh(np.linspace(x_min, x_max, n + 1), np.linspace(y_min, y_max, m + 1))


def _graded_axis(n1: int) -> np.ndarray:
    # [0 : h1 : 0.5, 0.5 : h1/2 : 1] -> n1 coarse cells then 2*n1 fine cells
    return np.concatenate(
        [np.linspace(0.0, 0.5, n1 + 1), np.linspace(0.5, 1.0, 2 * n1 + 1)[1:]]
    )


def build_graded_half(n1x: int, n1y: int, domain: Domain = UNIT_SQUARE) -> Mesh:
    """Graded mesh on (0,1)^2: step h1 on [0, 0.5], step h1/2 on [0.5, 1]."""
    if n1x < 1 or n1y < 1:
        raise ValueError(f"cell counts must be positive, got {n1x}, {n1y}")
    if tuple(domain) != UNIT_SQUARE:
        raise ValueError("graded meshes are only supported on the unit square")
    return Mesh(_graded_axis(n1x), _graded_axis(n1y))


def build_perturbed(n: int, amplitude: float = 0.2, seed: int = 0) -> Mesh:
    """Uniform n x n grid on (0,1)^2 with randomly shifted interior lines.

    Each interior grid line moves by amplitude*(U - 0.5)*h with h = 1/n and
    U drawn from a splitmix64 stream seeded by `seed` (all n-1 x-shifts drawn
    first, then the n-1 y-shifts).  Boundary lines stay fixed; shifts are
    bounded by amplitude*h/2 < h/2, so monotonicity is preserved.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 to have interior lines, got {n}")
    if not 0.0 <= amplitude < 1.0:
        raise ValueError(f"amplitude must be in [0, 1), got {amplitude}")
    h = 1.0 / n
    u = uniform_stream(seed, 2 * (n - 1))
    xs = np.linspace(0.0, 1.0, n + 1)
    ys = np.linspace(0.0, 1.0, n + 1)
    xs[1:-1] += amplitude * (u[: n - 1] - 0.5) * h
    ys[1:-1] += amplitude * (u[n - 1 :] - 0.5) * h
    return Mesh(xs, ys)


def refine_bisect(mesh: Mesh) -> Mesh:
    """Split every cell into four equal sub-rectangles."""

    def split(v: np.ndarray) -> np.ndarray:
        out = np.empty(2 * len(v) - 1)
        out[::2] = v
        out[1::2] = 0.5 * (v[:-1] + v[1:])
        return out

    return Mesh(split(mesh.xs), split(mesh.ys))


# -- iteration --------------------------------------------------------------

def cells(mesh: Mesh) -> Iterator[CellGeom]:
    """Cells in deterministic row-major order (j outer, i inner)."""
    ce = mesh.cell_edges
    hx, hy, xc, yc = mesh.cell_arrays
    n = mesh.n
    for k in range(mesh.n_cells):
        j, i = divmod(k, n)
        yield CellGeom(i + 1, j + 1, float(hx[k]), float(hy[k]),
                       float(xc[k]), float(yc[k]), tuple(int(g) for g in ce[k]))


def edges(mesh: Mesh) -> Iterator[EdgeIndex]:
    """Edges in ascending gid order (all vertical, then all horizontal)."""
    x0, y0, x1, y1 = mesh.edge_endpoints
    bdry = mesh.edge_is_boundary
    dof = mesh.edge_dof
    n, m = mesh.n, mesh.m
    nv = (n + 1) * m
    for gid in range(mesh.n_edges):
        if gid < nv:
            i, jm1 = divmod(gid, m)
            orient, ii, jj = "vertical", i, jm1 + 1
        else:
            j, im1 = divmod(gid - nv, n)
            orient, ii, jj = "horizontal", im1 + 1, j
        yield EdgeIndex(orient, ii, jj, gid, bool(bdry[gid]),
                        int(dof[gid]) if dof[gid] >= 0 else None,
                        float(x0[gid]), float(y0[gid]),
                        float(x1[gid]), float(y1[gid]))
