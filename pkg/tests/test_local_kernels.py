import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    UNIT_CELL,
    edge_segments,
    extension_oracle,
    integrate_cell,
    integrate_segment,
    make_cell,
    random_cells,
    stabilizer_oracle,
)
from swgfem.local_kernels import (
    STAB_MODE,
    InvalidCoefficientError,
    extension,
    extension_basis,
    gradient_map,
    local_load,
    local_reaction,
    local_stabilizer,
    local_stiffness,
    weak_gradient,
)

ONES = np.ones(4)

finite_vals = st.floats(-10.0, 10.0)
edge_values = st.tuples(finite_vals, finite_vals, finite_vals, finite_vals)
cell_dims = st.floats(0.05, 3.0)


def weak_gradient_oracle(cell, v):
    """Boundary integral of v_b psi.n over the cell edges, per unit area."""
    segs = edge_segments(cell)
    normals = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    out = np.zeros(2)
    for comp, psi in enumerate([(1, 0), (0, 1)]):
        total = 0.0
        for s, (p0, p1) in enumerate(segs):
            dot = psi[0] * normals[s][0] + psi[1] * normals[s][1]
            length = np.hypot(p1[0] - p0[0], p1[1] - p0[1])
            total += v[s] * dot * length
        out[comp] = total / cell.area
    return out


# -- weak gradient ------------------------------------------------------------

def test_weak_gradient_unit_square():
    assert np.allclose(weak_gradient(UNIT_CELL, [0, 1, 0, 0]), [1, 0])


def test_weak_gradient_constant_vanishes():
    assert np.allclose(weak_gradient(UNIT_CELL, [3.7] * 4), [0, 0])


def test_weak_gradient_rect_cell_against_oracle():
    cell = make_cell(0.5, 0.25)
    v = [0.0, 1.0, 0.0, 2.0]
    got = weak_gradient(cell, v)
    assert np.allclose(got, [2.0, 8.0])
    assert np.allclose(got, weak_gradient_oracle(cell, v), atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(v=edge_values, hx=cell_dims, hy=cell_dims)
def test_weak_gradient_matches_boundary_integral(v, hx, hy):
    cell = make_cell(hx, hy, 0.3, -0.7)
    assert np.allclose(weak_gradient(cell, v), weak_gradient_oracle(cell, v),
                       atol=1e-11)


# -- extension ----------------------------------------------------------------

def test_extension_reproduces_constants():
    for cell in random_cells(5):
        c = extension(cell, ONES)
        assert np.allclose([c.c1, c.c2, c.c3], [1, 0, 0], atol=1e-14)


def test_extension_unit_square_example():
    c = extension(UNIT_CELL, [0, 0, 1, 1])
    assert np.allclose([c.c1, c.c2, c.c3], [0.5, 0, 0])
    oracle = extension_oracle(UNIT_CELL, [0, 0, 1, 1])
    assert np.allclose([c.c1, c.c2, c.c3], oracle, atol=1e-12)


def test_extension_midpoint_defect_example():
    # v = (0,0,1,1) on the unit square: defect +1/2 on e1, -1/2 on e3
    c = extension(UNIT_CELL, [0, 0, 1, 1])
    M = UNIT_CELL.midpoints()
    vals = c(M[:, 0], M[:, 1], UNIT_CELL.xc, UNIT_CELL.yc)
    assert np.isclose(vals[0] - 0.0, 0.5)
    assert np.isclose(vals[2] - 1.0, -0.5)


@settings(max_examples=60, deadline=None)
@given(v=edge_values, hx=cell_dims, hy=cell_dims)
def test_extension_gradient_equals_weak_gradient(v, hx, hy):
    cell = make_cell(hx, hy, -1.1, 0.4)
    c = extension(cell, v)
    assert np.array_equal([c.c2, c.c3], weak_gradient(cell, v))


@settings(max_examples=60, deadline=None)
@given(v=edge_values, hx=cell_dims, hy=cell_dims)
def test_midpoint_identities(v, hx, hy):
    cell = make_cell(hx, hy, 0.2, 0.9)
    v = np.asarray(v)
    c = extension(cell, v)
    M = cell.midpoints()
    defect = c(M[:, 0], M[:, 1], cell.xc, cell.yc) - v
    D = float(STAB_MODE @ v)
    scale = 2.0 * (hx + hy)
    assert np.isclose(defect[0], defect[1], atol=1e-12)
    assert np.isclose(defect[2], defect[3], atol=1e-12)
    assert np.isclose(defect[0], hx * D / scale, atol=1e-12)
    assert np.isclose(defect[2], -hy * D / scale, atol=1e-12)
    # balance between the two edge directions
    assert np.isclose(hy * defect[0], -hx * defect[2], atol=1e-12)


def test_extension_against_oracle_on_random_cells(rng):
    for cell in random_cells(30):
        v = rng.uniform(-5, 5, size=4)
        got = np.array(extension(cell, v))
        assert np.allclose(got, extension_oracle(cell, v), atol=1e-11)


# -- stiffness ----------------------------------------------------------------

def test_stiffness_unit_square_identity_tensor():
    K = local_stiffness(UNIT_CELL, np.eye(2))
    expect = np.array([
        [1, -1, 0, 0],
        [-1, 1, 0, 0],
        [0, 0, 1, -1],
        [0, 0, -1, 1],
    ], dtype=float)
    assert np.allclose(K, expect)


def test_stiffness_kills_constants():
    for cell in random_cells(5):
        K = local_stiffness(cell, np.array([[2.0, 0.5], [0.5, 1.0]]))
        assert np.allclose(K @ ONES, 0.0, atol=1e-13)


def test_stiffness_rect_cell_blocks():
    K = local_stiffness(make_cell(2.0, 1.0), np.eye(2))
    assert np.isclose(K[0, 0], 0.5)
    assert np.isclose(K[2, 2], 2.0)
    assert np.isclose(K[0, 2], 0.0)


def test_stiffness_quadrature_oracle():
    # (a grad lift_s, grad lift_t) integrated numerically
    cell = make_cell(0.7, 1.3, 0.1, -0.2)
    a = np.array([[3.0, 1.0], [1.0, 2.0]])
    K = local_stiffness(cell, a)
    c1, c2, c3 = extension_basis(cell)
    for s in range(4):
        for t in range(4):
            gs = np.array([c2[s], c3[s]])
            gt = np.array([c2[t], c3[t]])
            val = integrate_cell(
                lambda x, y: np.full(np.shape(x), float(gs @ a @ gt)), cell
            )
            assert np.isclose(K[s, t], val, atol=1e-12)


def test_stiffness_rejects_bad_tensor():
    with pytest.raises(InvalidCoefficientError):
        local_stiffness(UNIT_CELL, np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
    with pytest.raises(InvalidCoefficientError):
        local_stiffness(UNIT_CELL, np.array([[1.0, 0.5], [0.0, 1.0]]))  # asymmetric


# -- stabilizer -----------------------------------------------------------------

def test_stabilizer_unit_square():
    S = local_stabilizer(UNIT_CELL, rho=1.0, h_global=1.0)
    assert np.allclose(S, 0.25 * np.outer(STAB_MODE, STAB_MODE))


def test_stabilizer_scale_example():
    S = local_stabilizer(make_cell(0.5, 0.25), rho=6.0, h_global=0.5)
    assert np.isclose(S[2, 2], 1.0)


def test_stabilizer_kills_affine_midpoint_traces():
    for cell in random_cells(5):
        M = cell.midpoints()
        v = 2.0 + 0.3 * M[:, 0] - 1.7 * M[:, 1]
        S = local_stabilizer(cell, 2.0, 1.0)
        assert np.allclose(S @ v, 0.0, atol=1e-12)


def test_stabilizer_closed_form_vs_definitional_oracle():
    cells = random_cells(100, seed=77)
    for cell in cells:
        S = local_stabilizer(cell, rho=1.7, h_global=2.3)
        O = stabilizer_oracle(cell, rho=1.7, h_global=2.3)
        assert np.max(np.abs(S - O)) < 1e-13 * max(1.0, np.max(np.abs(O)))


def test_stiffness_plus_stabilizer_kernel_is_constants(rng):
    a = np.array([[2.0, 0.3], [0.3, 1.5]])
    for cell in random_cells(10):
        L = local_stiffness(cell, a) + local_stabilizer(cell, 1.3, 0.9)
        w = np.linalg.eigvalsh(L)
        assert w[0] > -1e-12
        assert w[1] > 1e-10          # exactly one zero eigenvalue
        assert np.allclose(L @ ONES, 0.0, atol=1e-12)


# -- load and reaction ----------------------------------------------------------

def test_load_constant_one_splits_evenly():
    F = local_load(UNIT_CELL, lambda x, y: np.ones_like(x))
    assert np.allclose(F, 0.25)


def test_load_zero():
    assert np.allclose(local_load(UNIT_CELL, lambda x, y: np.zeros_like(x)), 0.0)


def test_load_linear_f_against_oracle():
    F = local_load(UNIT_CELL, lambda x, y: x)
    c = extension_oracle(UNIT_CELL, np.eye(4)[0])  # independent basis coeffs
    oracle = []
    for s in range(4):
        cs = extension_oracle(UNIT_CELL, np.eye(4)[s])
        oracle.append(integrate_cell(
            lambda x, y: x * (cs[0] + cs[1] * (x - 0.5) + cs[2] * (y - 0.5)),
            UNIT_CELL,
        ))
    assert np.allclose(F, oracle, atol=1e-13)
    assert np.isclose(F.sum(), 0.5)  # row sum = integral of f
    assert np.allclose(F, [1 / 24, 5 / 24, 1 / 8, 1 / 8])


def test_reaction_zero_coefficient():
    R = local_reaction(UNIT_CELL, lambda x, y: np.zeros_like(x))
    assert np.allclose(R, 0.0)


def test_reaction_unit_coefficient():
    R = local_reaction(UNIT_CELL, lambda x, y: np.ones_like(x))
    assert np.allclose(R, R.T)
    assert np.all(R > 0)
    assert np.isclose(R.sum(), 1.0)  # lifts sum to one, so total mass = area
    # R[0,0] = int (1/4 - (x - 1/2))^2 = 1/16 + 1/12
    assert np.isclose(R[0, 0], 1 / 16 + 1 / 12)


def test_reaction_variable_coefficient_oracle():
    cell = make_cell(0.6, 1.1, 0.4, 0.8)
    c_field = lambda x, y: 2.0 + x + y
    R = local_reaction(cell, c_field)
    basis = [extension_oracle(cell, np.eye(4)[s]) for s in range(4)]

    def phi(cs):
        return lambda x, y: cs[0] + cs[1] * (x - cell.xc) + cs[2] * (y - cell.yc)

    for s in range(4):
        for t in range(4):
            val = integrate_cell(
                lambda x, y: c_field(x, y) * phi(basis[s])(x, y) * phi(basis[t])(x, y),
                cell,
            )
            assert np.isclose(R[s, t], val, atol=1e-13)


def test_gradient_map_matches_weak_gradient(rng):
    cell = make_cell(0.3, 2.0)
    v = rng.uniform(-1, 1, 4)
    assert np.allclose(gradient_map(cell) @ v, weak_gradient(cell, v))
