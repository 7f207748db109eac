"""Mesh construction, tagging, and band measurement tests."""

import numpy as np
import pytest

from cohesivepf.meshkit import (
    Mesh,
    MeshError,
    MeshSpec,
    band_width,
    build_interval,
    build_structured_triangulation,
)


def test_interval_uniform_counts():
    mesh = build_interval(MeshSpec("interval", 1.0, 0.5))
    assert mesh.n_nodes == 3
    assert mesh.n_elements == 2
    assert np.allclose(mesh.nodes, [0.0, 0.5, 1.0])


def test_interval_tiny_central_element():
    mesh = build_interval(MeshSpec("interval", 1.0, 0.08, refinement=1 / 25))
    lengths = mesh.element_measures
    tiny = np.isclose(lengths, 0.0032, rtol=1e-12)
    assert tiny.sum() == 1
    k = int(np.nonzero(tiny)[0][0])
    a, b = mesh.nodes[mesh.elements[k]]
    assert a < 0.5 < b  # spans the midpoint
    assert np.all(np.diff(mesh.nodes) > 0)
    # side elements stay near the target size
    others = lengths[~tiny]
    assert np.all(np.abs(others - 0.08) < 0.01)


def test_interval_rejects_oversized_h():
    with pytest.raises(MeshError):
        build_interval(MeshSpec("interval", 1.0, 2.0))


def test_interval_boundary_tags():
    mesh = build_interval(MeshSpec("interval", 1.0, 0.25))
    assert mesh.boundary_tags[0] == frozenset({"left"})
    assert mesh.boundary_tags[mesh.n_nodes - 1] == frozenset({"right"})


def test_square_2x2_counts_and_areas():
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.5))
    assert mesh.n_nodes == 9
    assert mesh.n_elements == 8
    assert np.allclose(mesh.element_measures, 0.125)


def test_square_fine_element_count():
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.02))
    # oracle: 50 x 50 cells, two triangles each
    assert mesh.n_elements == 2 * 50 * 50


def test_lshape_element_count():
    mesh = build_structured_triangulation(MeshSpec("lshape", 1.0, 0.25, diag="B"))
    assert mesh.n_elements == 24  # three quarters of the 32 full-square triangles
    assert mesh.element_measures.sum() == pytest.approx(0.75, rel=1e-12)


def test_total_measure_matches_domain():
    sq = build_structured_triangulation(MeshSpec("square", 1.0, 0.1))
    assert sq.element_measures.sum() == pytest.approx(1.0, rel=1e-10)
    bar = build_interval(MeshSpec("interval", 2.0, 0.08, refinement=1 / 25))
    assert bar.element_measures.sum() == pytest.approx(2.0, rel=1e-10)


def test_variants_share_nodes_differ_in_connectivity():
    a = build_structured_triangulation(MeshSpec("square", 1.0, 0.25, diag="A"))
    b = build_structured_triangulation(MeshSpec("square", 1.0, 0.25, diag="B"))
    assert np.array_equal(a.nodes, b.nodes)
    assert a.n_elements == b.n_elements
    assert not np.array_equal(a.elements, b.elements)


def test_triangles_counterclockwise():
    for diag in ("A", "B"):
        mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.2, diag=diag))
        p = mesh.nodes[mesh.elements]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        assert np.all(cross > 0)


def test_interior_edges_shared_by_two_triangles():
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.25, diag="A"))
    counts = {}
    for tri in mesh.elements:
        for k in range(3):
            edge = tuple(sorted((int(tri[k]), int(tri[(k + 1) % 3]))))
            counts[edge] = counts.get(edge, 0) + 1
    boundary = {i for i in mesh.boundary_tags}
    for (i, j), c in counts.items():
        if c == 1:
            assert i in boundary and j in boundary
        else:
            assert c == 2


def test_boundary_tags_on_geometric_locus():
    mesh = build_structured_triangulation(MeshSpec("lshape", 1.0, 0.25))
    for i, tags in mesh.boundary_tags.items():
        x, y = mesh.nodes[i]
        if "left" in tags:
            assert abs(x) < 1e-12 and y >= 0.5 - 1e-12
        if "bottom" in tags:
            assert abs(y) < 1e-12 and x >= 0.5 - 1e-12
        if "right" in tags:
            assert abs(x - 1.0) < 1e-12
        if "top" in tags:
            assert abs(y - 1.0) < 1e-12
        if "reentrant" in tags:
            on_v = abs(x - 0.5) < 1e-12 and y <= 0.5 + 1e-12
            on_h = abs(y - 0.5) < 1e-12 and x <= 0.5 + 1e-12
            assert on_v or on_h
    # every edge tag covers the full segment: count nodes on x = 0
    left = mesh.nodes_with_tag("left")
    assert len(left) == 3  # y in {0.5, 0.75, 1.0}


def test_rejects_non_dividing_h_and_bad_variant():
    with pytest.raises(MeshError):
        build_structured_triangulation(MeshSpec("square", 1.0, 0.3))
    with pytest.raises(MeshError):
        build_structured_triangulation(MeshSpec("square", 1.0, 0.25, diag="C"))
    with pytest.raises(MeshError):
        build_structured_triangulation(MeshSpec("lshape", 1.0, 1.0 / 3.0))


def test_mesh_rejects_degenerate_elements():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(MeshError):
        Mesh(2, nodes, np.array([[0, 1, 2]]))


def test_band_width_single_element():
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.1))
    ind = np.zeros(mesh.n_elements, dtype=bool)
    ind[0] = True
    w = band_width(mesh, ind, (1.0, 0.0))
    assert 0.1 <= w <= 0.2  # about one element diameter


def test_band_width_column_and_full_mesh():
    h = 0.05
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, h))
    cent = mesh.centroids()
    column = np.abs(cent[:, 0] - 0.475) < h / 2  # one cell-wide vertical strip
    w = band_width(mesh, column, (1.0, 0.0))
    assert h * 0.9 <= w <= 2.5 * h
    full = np.ones(mesh.n_elements, dtype=bool)
    w_full = band_width(mesh, full, (1.0, 0.0))
    assert w_full == pytest.approx(1.0, abs=0.12)


def test_band_width_empty_set_errors():
    mesh = build_structured_triangulation(MeshSpec("square", 1.0, 0.5))
    with pytest.raises(MeshError):
        band_width(mesh, np.zeros(mesh.n_elements, dtype=bool), (1.0, 0.0))


def test_meshspec_validation():
    with pytest.raises(MeshError):
        MeshSpec("disk", 1.0, 0.1)
    with pytest.raises(MeshError):
        MeshSpec("interval", 1.0, -0.1)
    with pytest.raises(MeshError):
        MeshSpec("interval", 1.0, 0.1, refinement=1.5)
