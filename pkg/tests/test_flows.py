import math

import numpy as np
import pytest

from sobolev_lab.errors import PoleTooClose
from sobolev_lab.flows import (
    HeleShawLaw,
    UniformLaw,
    WeightedLaw,
    evolve,
    greens_function,
    monitor_bounds,
)
from sobolev_lab.geometry import StarDomain2D, triangulate

from .conftest import E22
from .oracles import DISK_C22


def test_greens_center_pole(disk_mesh):
    g = greens_function(disk_mesh, (0.0, 0.0))
    assert np.max(np.abs(g.boundary_grad * 2 * math.pi - 1.0)) <= 0.01
    assert g.injection_rate(disk_mesh) == pytest.approx(1.0, abs=0.01)


def test_greens_scaled_disk():
    mesh = triangulate(StarDomain2D.disk(2.0), 0.04)
    g = greens_function(mesh, (0.0, 0.0))
    assert np.max(np.abs(g.boundary_grad * 4 * math.pi - 1.0)) <= 0.01


def test_greens_offcenter_poisson_kernel(disk_mesh):
    g = greens_function(disk_mesh, (0.5, 0.0))
    th = disk_mesh.boundary_midpoint_theta
    exact = (1 - 0.25) / (2 * math.pi * np.abs(np.exp(1j * th) - 0.5) ** 2)
    assert np.max(np.abs(g.boundary_grad / exact - 1.0)) <= 0.02


def test_greens_pole_too_close(disk_mesh):
    with pytest.raises(PoleTooClose):
        greens_function(disk_mesh, (0.99, 0.0))


def test_uniform_disk_flow_tracks_scaling_law():
    traj = evolve(StarDomain2D.disk(1.0), UniformLaw(), 0.01, 8, E22, h=0.03)
    pred = DISK_C22 / (1.0 + np.array(traj.times)) ** 2
    assert np.max(np.abs(traj.eigenvalues / pred - 1.0)) <= 0.02
    assert np.all(np.diff(traj.eigenvalues) < 0)


def test_hele_shaw_center_matches_uniform_over_2pi():
    disk = StarDomain2D.disk(1.0)
    hs = evolve(disk, HeleShawLaw((0.0, 0.0)), 0.05, 5, E22, h=0.03)
    uni = evolve(disk, UniformLaw(1.0 / (2 * math.pi)), 0.05, 5, E22, h=0.03)
    assert np.max(np.abs(hs.eigenvalues / uni.eigenvalues - 1.0)) <= 0.02


def test_hele_shaw_area_law():
    traj = evolve(StarDomain2D.disk(1.0), HeleShawLaw((0.0, 0.0)), 0.05, 5, E22, h=0.03)
    rates = np.diff(traj.areas) / 0.05
    assert np.max(np.abs(rates - 1.0)) <= 0.03


def test_weighted_flow_monitor_and_monotonicity():
    dom = StarDomain2D.from_function(lambda t: 1.0 + 0.3 * np.cos(2 * t))
    traj = evolve(dom, WeightedLaw(lambda th: np.zeros_like(th)), 0.01, 4, E22, h=0.035)
    assert np.all(np.diff(traj.eigenvalues) < 0)
    reports = monitor_bounds(traj, "thm2")
    assert all(r.holds for r in reports)
    assert len(reports) == 5


def test_offcenter_hele_shaw_strict_slack():
    traj = evolve(StarDomain2D.disk(1.0), HeleShawLaw((0.4, 0.0)), 0.03, 3, E22, h=0.03)
    reports = monitor_bounds(traj, "thm2")
    assert all(r.holds for r in reports)
    assert all(not r.equality for r in reports)  # non-constant speed


def test_cfl_guard():
    with pytest.raises(ValueError):
        evolve(StarDomain2D.disk(1.0), UniformLaw(), 0.05, 2, E22, h=0.04)


def test_trajectory_reports_and_csv(tmp_path):
    traj = evolve(StarDomain2D.disk(1.0), UniformLaw(), 0.01, 3, E22, h=0.04, monitor="thm2")
    assert len(traj.reports) == 4
    rows = traj.csv_rows()
    assert rows[0] == "k,t,area,perimeter,C,lhs,rhs,slack"
    assert len(rows) == 5
    path = tmp_path / "traj.csv"
    traj.export_csv(path)
    assert path.read_text().splitlines() == rows
    traj.export_snapshots(tmp_path)
    assert (tmp_path / "boundary_0003.txt").exists()


def test_thm1_monitor_along_flow():
    from .conftest import E15

    traj = evolve(StarDomain2D.disk(1.0), UniformLaw(), 0.01, 2, E15, h=0.04, monitor="thm1")
    reports = monitor_bounds(traj, "thm1", tolerance=0.05)
    assert all(r.holds for r in reports)
