import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sobolev_lab.errors import MeshFailure
from sobolev_lab.geometry import (
    BallDomain,
    BoundarySpeed,
    StarDomain2D,
    ball_volume,
    boundary_measure,
    read_mesh,
    triangulate,
)

from .oracles import polygon_is_simple


def mesh_edge_lengths(mesh):
    p = mesh.nodes[mesh.triangles]
    e = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return np.linalg.norm(e, axis=1)


def test_disk_mesh_invariants(disk_mesh):
    disk_mesh.validate()
    assert np.all(disk_mesh.triangle_areas > 0)
    assert mesh_edge_lengths(disk_mesh).max() <= 2 * disk_mesh.h
    # triangle count scales like (1/h)^2 give or take structure
    assert disk_mesh.n_triangles > 300


def test_square_mesh_invariants(square_domain):
    mesh = triangulate(square_domain, 0.05)
    mesh.validate()
    # exact polygonal boundary: corners are sample points kept by subsampling
    assert boundary_measure(mesh) == pytest.approx(4.0, abs=1e-12)
    assert mesh.area == pytest.approx(1.0, abs=1e-12)


def test_cosine_domain_boundary_is_simple():
    dom = StarDomain2D.from_function(lambda t: 1.0 + 0.5 * np.cos(t))
    mesh = triangulate(dom, 0.05)
    mesh.validate()
    loop = mesh.nodes[mesh.boundary_edges[:, 0]]
    assert polygon_is_simple(loop)


def test_disk_perimeter_converges():
    mesh = triangulate(StarDomain2D.disk(1.0), 0.02)
    assert boundary_measure(mesh) == pytest.approx(2 * math.pi, rel=5e-3)
    mesh2 = triangulate(StarDomain2D.disk(2.0), 0.04)
    assert boundary_measure(mesh2) == pytest.approx(4 * math.pi, rel=5e-3)


def test_isoperimetric_consistency(disk_mesh, square_mesh, twolobe_mesh):
    for mesh in (disk_mesh, square_mesh, twolobe_mesh):
        P = boundary_measure(mesh)
        assert P**2 >= 4 * math.pi * mesh.area * (1 - 5 * mesh.h)


def test_ball_volume_known_values():
    assert ball_volume(2, 1.0) == pytest.approx(math.pi, rel=1e-14)
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    # omega_4 = pi^2/2, hand value
    assert ball_volume(4, 2.0) == pytest.approx(math.pi**2 / 2 * 16, rel=1e-14)


@given(
    n=st.integers(min_value=1, max_value=8),
    R=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
)
@settings(max_examples=30, deadline=None)
def test_ball_volume_scaling(n, R):
    assert ball_volume(n, R) / ball_volume(n, 1.0) == pytest.approx(R**n, rel=1e-12)


def test_h_too_coarse_rejected():
    with pytest.raises(MeshFailure):
        triangulate(StarDomain2D.disk(1.0), 0.3)


def test_nonpositive_rho_rejected():
    with pytest.raises(MeshFailure):
        StarDomain2D(np.concatenate([np.ones(100), [-0.1], np.ones(27)]))


def test_ball_domain_validation():
    with pytest.raises(ValueError):
        BallDomain(2, -1.0)
    with pytest.raises(ValueError):
        BallDomain(1, 1.0)
    assert BallDomain(3, 2.0).volume == pytest.approx(ball_volume(3, 2.0))


def test_mesh_roundtrip(tmp_path, twolobe_domain):
    mesh = triangulate(twolobe_domain, 0.1)
    path = tmp_path / "mesh.txt"
    from sobolev_lab.geometry import write_mesh

    write_mesh(mesh, path)
    back = read_mesh(path)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.allclose(back.nodes, mesh.nodes, rtol=0, atol=0)
    assert np.array_equal(back.boundary_edges, mesh.boundary_edges)
    assert np.array_equal(back.boundary_tri, mesh.boundary_tri)
    assert np.allclose(back.boundary_lengths, mesh.boundary_lengths, rtol=0, atol=0)
    back.validate()


def test_boundary_speed_validation(disk_mesh):
    sp = BoundarySpeed.from_w(disk_mesh, 0.0)
    assert np.all(sp.speed == 1.0)
    with pytest.raises(ValueError):
        BoundarySpeed(w=np.zeros(3), speed=np.array([1.0, -1.0, 2.0]))
    fn = BoundarySpeed.from_w_function(disk_mesh, lambda th: 0.2 * np.cos(2 * th))
    assert fn.speed.shape == (len(disk_mesh.boundary_edges),)
    assert np.all(fn.speed > 0)
