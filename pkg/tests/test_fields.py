"""Field representation, differential operators, and linear solver tests."""

import numpy as np
import pytest
import scipy.sparse as sp

from cohesivepf.fields import (
    ElementField,
    FieldError,
    LinearSolveError,
    NodalField,
    SparseSystem,
    assemble_and_solve,
    conjugate_gradient,
    element_mean,
    gradient,
    mass_matrix,
    stiffness_matrix,
    write_csv,
)
from cohesivepf.meshkit import MeshSpec, build_interval, build_structured_triangulation


@pytest.fixture
def square():
    return build_structured_triangulation(MeshSpec("square", 1.0, 0.25))


@pytest.fixture
def bar():
    return build_interval(MeshSpec("interval", 1.0, 0.1))


def test_field_shape_validation(square):
    with pytest.raises(FieldError):
        NodalField(square, np.zeros(square.n_nodes + 1))
    with pytest.raises(FieldError):
        ElementField(square, np.zeros(square.n_elements - 1))


def test_gradient_1d_affine(bar):
    u = NodalField(bar, bar.nodes.copy())
    g = gradient(u)
    assert np.allclose(g.values, 1.0)


def test_gradient_2d_uniaxial(square):
    u = NodalField(square, np.column_stack(
        [square.nodes[:, 0], np.zeros(square.n_nodes)]))
    g = gradient(u)
    assert np.allclose(g.values, [1.0, 0.0, 0.0])


def test_gradient_2d_pure_shear(square):
    u = NodalField(square, np.column_stack(
        [square.nodes[:, 1], square.nodes[:, 0]]))
    g = gradient(u)
    assert np.allclose(g.values, [0.0, 0.0, 1.0])


def test_gradient_2d_scalar(square):
    u = NodalField(square, 2 * square.nodes[:, 0] - 3 * square.nodes[:, 1])
    g = gradient(u)
    assert np.allclose(g.values, [2.0, -3.0])


def test_gradient_linearity(square):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(square.n_nodes, 2))
    b = rng.normal(size=(square.n_nodes, 2))
    ga = gradient(NodalField(square, a)).values
    gb = gradient(NodalField(square, b)).values
    gc = gradient(NodalField(square, 2.0 * a - 0.5 * b)).values
    assert np.allclose(gc, 2.0 * ga - 0.5 * gb, atol=1e-13)


def test_discrete_divergence_theorem(square):
    # integral of grad(u) over the domain equals the boundary integral of
    # u n, evaluated here for u affine where both are exact
    u_vals = 3.0 * square.nodes[:, 0] + 2.0 * square.nodes[:, 1] - 1.0
    g = gradient(NodalField(square, u_vals)).values
    integral = (square.element_measures[:, None] * g).sum(axis=0)
    # boundary flux of the unit square for affine u: [int u nx, int u ny]
    # = [mean on right - mean on left, mean on top - mean on bottom]
    flux = np.array([(3.0 * 1.0 + 2.0 * 0.5 - 1.0) - (2.0 * 0.5 - 1.0),
                     (3.0 * 0.5 + 2.0 * 1.0 - 1.0) - (3.0 * 0.5 - 1.0)])
    assert np.allclose(integral, flux, atol=1e-10)


def test_element_mean_values(square, bar):
    d = NodalField(square, np.full(square.n_nodes, 0.3))
    assert np.allclose(element_mean(d).values, 0.3)
    two = NodalField(bar, bar.nodes.copy())
    means = element_mean(two).values
    centers = bar.centroids()
    assert np.allclose(means, centers)


def test_element_mean_triangle_vertices(square):
    vals = np.zeros(square.n_nodes)
    tri = square.elements[0]
    vals[tri] = [0.0, 0.3, 0.6]
    d = NodalField(square, vals)
    assert element_mean(d).values[0] == pytest.approx(0.3)


def test_mass_and_stiffness_quadratures(bar):
    # mass against the exact integral of x^2 on [0,1], stiffness against
    # the Dirichlet energy of x
    x = bar.nodes
    m = mass_matrix(bar)
    k = stiffness_matrix(bar)
    assert x @ (m @ x) == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert x @ (k @ x) == pytest.approx(1.0, rel=1e-12)


def test_cg_identity_and_laplacian():
    ident = sp.eye(3, format="csr")
    sol = assemble_and_solve(SparseSystem(ident, np.array([1.0, 2.0, 3.0])))
    assert np.allclose(sol, [1.0, 2.0, 3.0])

    # 3-node Laplacian with u(0) = 0, u(1) = 1: interior value 0.5
    k = sp.csr_matrix(np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0],
                                [0.0, -1.0, 1.0]]))
    sys = SparseSystem(k, np.zeros(3), np.array([0, 2]), np.array([0.0, 1.0]))
    sol = assemble_and_solve(sys)
    assert sol[1] == pytest.approx(0.5, abs=1e-10)
    assert sol[0] == 0.0 and sol[2] == 1.0


def test_cg_matches_dense_solve():
    rng = np.random.default_rng(42)
    for n in (50, 200):
        q = rng.normal(size=(n, n))
        a = q @ q.T + n * np.eye(n)
        b = rng.normal(size=n)
        x = assemble_and_solve(SparseSystem(sp.csr_matrix(a), b))
        dense = np.linalg.solve(a, b)
        assert np.linalg.norm(x - dense) / np.linalg.norm(dense) < 1e-8
        res = np.linalg.norm(a @ x - b) / np.linalg.norm(b)
        assert res <= 1e-10


def test_cg_iteration_cap_raises():
    rng = np.random.default_rng(1)
    q = rng.normal(size=(40, 40))
    a = q @ q.T + 40 * np.eye(40)
    b = rng.normal(size=40)
    with pytest.raises(LinearSolveError) as err:
        conjugate_gradient(lambda v: a @ v, b, np.diag(a), max_iter=2)
    assert err.value.residual is not None


def test_sparse_system_rejects_asymmetric():
    a = sp.csr_matrix(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(FieldError):
        SparseSystem(a, np.zeros(2))


def test_csv_export(tmp_path, bar):
    f = NodalField(bar, np.linspace(0, 1, bar.n_nodes))
    path = tmp_path / "field.csv"
    write_csv(path, f)
    lines = path.read_text().splitlines()
    assert lines[0] == "index,comp0"
    assert len(lines) == bar.n_nodes + 1
    parsed = float(lines[2].split(",")[1])
    assert parsed == pytest.approx(f.values[1], rel=1e-12)
