"""Boundary flows: uniform, prescribed-weight, and Hele-Shaw evolution.

The boundary of a star-shaped domain moves with a strictly positive normal
speed; the radial graph is updated by forward Euler with the normal-to-
radial conversion factor sqrt(rho^2 + rho'^2)/rho, the domain is re-meshed
and re-solved every step, and the monotonicity bounds are monitored along
the trajectory.  Hele-Shaw speed is |grad G| for the Dirichlet Green's
function with an interior pole: the log singularity is differentiated
analytically and only its harmonic correction is taken from the mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PoleTooClose
from .exponents import SobolevExponents
from .geometry import BoundarySpeed, Mesh2D, StarDomain2D, boundary_measure, triangulate
from .hadamard import VariationReport, theorem1_sides, theorem2_sides
from .inequalities import InequalityReport
from .variational import ExtremalField, minimize_rayleigh, _space

__all__ = [
    "GreensData",
    "greens_function",
    "UniformLaw",
    "WeightedLaw",
    "HeleShawLaw",
    "FlowTrajectory",
    "evolve",
    "monitor_bounds",
]


@dataclass
class GreensData:
    """Green's function G = -(1/2pi) log|x - pole| + h with G = 0 on the boundary."""

    pole: np.ndarray
    h_values: np.ndarray        # nodal harmonic correction
    boundary_grad: np.ndarray   # |grad G| per boundary edge

    def injection_rate(self, mesh: Mesh2D) -> float:
        """int |grad G| dsigma, which is 1 for a unit point source."""
        return float(np.sum(self.boundary_grad * mesh.boundary_lengths))


def greens_function(mesh: Mesh2D, pole) -> GreensData:
    pole = np.asarray(pole, dtype=float)
    # pole must sit well inside: distance to every boundary segment > 2h
    a = mesh.nodes[mesh.boundary_edges[:, 0]]
    b = mesh.nodes[mesh.boundary_edges[:, 1]]
    ab = b - a
    tt = np.clip(np.sum((pole - a) * ab, axis=1) / np.sum(ab * ab, axis=1), 0.0, 1.0)
    dist = np.min(np.linalg.norm(pole - (a + tt[:, None] * ab), axis=1))
    if dist <= 2.0 * mesh.h:
        raise PoleTooClose(f"pole at distance {dist:.3g} from the boundary (need > {2*mesh.h:.3g})")

    space = _space(mesh)
    K = space.stiffness
    ii = space.interior
    g_b = np.zeros(mesh.n_nodes)
    bmask = mesh.is_boundary_node
    g_b[bmask] = np.log(np.linalg.norm(mesh.nodes[bmask] - pole, axis=1)) / (2.0 * math.pi)
    rhs = -(K @ g_b)[ii]
    h_vals = g_b.copy()
    h_vals[ii] = space.interior_solver(rhs)

    grad_h = space.tri_gradients(h_vals)[mesh.boundary_tri]
    mids = mesh.boundary_midpoints
    d = mids - pole
    grad_sing = -d / (2.0 * math.pi * np.sum(d * d, axis=1))[:, None]
    grad_g = np.linalg.norm(grad_sing + grad_h, axis=1)
    if np.any(grad_g <= 0):
        raise PoleTooClose("Green's gradient vanished on the boundary")
    return GreensData(pole=pole, h_values=h_vals, boundary_grad=grad_g)


@dataclass(frozen=True)
class UniformLaw:
    speed: float = 1.0

    label = "uniform"

    def speeds(self, domain: StarDomain2D, mesh: Mesh2D, field=None):
        theta_speed = np.full(domain.n_samples, self.speed)
        bs = BoundarySpeed.from_speed(mesh, self.speed)
        return theta_speed, bs, None


@dataclass(frozen=True)
class WeightedLaw:
    """Normal speed e^(w(theta)) for a prescribed boundary weight w."""

    w: Callable[[np.ndarray], np.ndarray]

    label = "weighted"

    def speeds(self, domain: StarDomain2D, mesh: Mesh2D, field=None):
        theta_speed = np.exp(np.asarray(self.w(domain.theta), dtype=float))
        bs = BoundarySpeed.from_w_function(mesh, self.w)
        return theta_speed, bs, None


@dataclass(frozen=True)
class HeleShawLaw:
    """Normal speed |grad G| for a unit source at the pole."""

    pole: tuple[float, float] = (0.0, 0.0)

    label = "hele_shaw"

    def speeds(self, domain: StarDomain2D, mesh: Mesh2D, field=None):
        data = greens_function(mesh, self.pole)
        bs = BoundarySpeed.from_speed(mesh, data.boundary_grad)
        # map edge-midpoint samples back to the domain's theta grid
        th = mesh.boundary_midpoint_theta
        order = np.argsort(th)
        th_s, sp_s = th[order], data.boundary_grad[order]
        th_ext = np.concatenate([th_s - 2 * math.pi, th_s, th_s + 2 * math.pi])
        sp_ext = np.concatenate([sp_s, sp_s, sp_s])
        theta_speed = np.interp(domain.theta, th_ext, sp_ext)
        return theta_speed, bs, data


SpeedLaw = UniformLaw | WeightedLaw | HeleShawLaw


@dataclass
class FlowTrajectory:
    """Snapshots of an expanding domain with per-step monitor reports."""

    law: SpeedLaw
    exps: SobolevExponents
    h: float
    dt: float
    times: list[float] = field(default_factory=list)
    domains: list[StarDomain2D] = field(default_factory=list)
    meshes: list[Mesh2D] = field(default_factory=list)
    fields: list[ExtremalField] = field(default_factory=list)
    speeds: list[BoundarySpeed] = field(default_factory=list)
    greens: list[GreensData | None] = field(default_factory=list)
    reports: list[VariationReport] = field(default_factory=list)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([f.C for f in self.fields])

    @property
    def areas(self) -> np.ndarray:
        return np.array([m.area for m in self.meshes])

    @property
    def perimeters(self) -> np.ndarray:
        return np.array([boundary_measure(m) for m in self.meshes])

    def csv_rows(self) -> list[str]:
        rows = ["k,t,area,perimeter,C,lhs,rhs,slack"]
        for k, t in enumerate(self.times):
            rep = self.reports[k] if k < len(self.reports) else None
            lhs = rep.lhs if rep else ""
            rhs = rep.rhs if rep else ""
            slack = rep.slack if rep else ""
            rows.append(
                f"{k},{t},{self.meshes[k].area},{boundary_measure(self.meshes[k])},"
                f"{self.fields[k].C},{lhs},{rhs},{slack}"
            )
        return rows

    def export_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("\n".join(self.csv_rows()) + "\n")

    def export_snapshots(self, directory) -> None:
        import os

        for k, dom in enumerate(self.domains):
            with open(os.path.join(directory, f"boundary_{k:04d}.txt"), "w") as f:
                f.write("# theta rho\n")
                for th, rh in zip(dom.theta, dom.rho):
                    f.write(f"{float(th)!r} {float(rh)!r}\n")


def _monitor_report(
    field_: ExtremalField, speed: BoundarySpeed, which: str, tolerance: float
) -> VariationReport:
    if which == "thm1":
        return theorem1_sides(field_, speed, tolerance=tolerance)
    if which == "thm2":
        return theorem2_sides(field_, speed, tolerance=tolerance)
    raise ValueError(f"unknown monitor {which!r}")


def evolve(
    domain: StarDomain2D,
    law: SpeedLaw,
    dt: float,
    steps: int,
    exps: SobolevExponents,
    h: float = 0.03,
    monitor: str | None = "thm2",
    tolerance: float = 0.02,
) -> FlowTrajectory:
    """Forward-Euler expansion of the domain with re-mesh and re-solve per step."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    traj = FlowTrajectory(law=law, exps=exps, h=h, dt=dt)
    current = domain
    for k in range(steps + 1):
        mesh = triangulate(current, h)
        fld = minimize_rayleigh(mesh, exps)
        theta_speed, bspeed, greens = law.speeds(current, mesh, fld)
        if dt * float(np.max(theta_speed)) >= h / 2.0:
            raise ValueError(
                f"dt * max speed = {dt * float(np.max(theta_speed)):.3g} "
                f"violates the mesh safety bound h/2 = {h/2:.3g}"
            )
        traj.times.append(k * dt)
        traj.domains.append(current)
        traj.meshes.append(mesh)
        traj.fields.append(fld)
        traj.speeds.append(bspeed)
        traj.greens.append(greens)
        if monitor is not None:
            traj.reports.append(_monitor_report(fld, bspeed, monitor, tolerance))
        if k < steps:
            rho, rp = current.rho, current.rho_prime()
            conv = np.sqrt(rho**2 + rp**2) / rho
            current = current.with_rho(rho + dt * theta_speed * conv)
    return traj


def monitor_bounds(
    traj: FlowTrajectory, which: str = "thm2", tolerance: float = 0.02
) -> list[InequalityReport]:
    """Re-evaluate a theorem bound at every stored step of a trajectory."""
    out = []
    for k, (fld, speed) in enumerate(zip(traj.fields, traj.speeds)):
        rep = _monitor_report(fld, speed, which, tolerance)
        out.append(
            InequalityReport(
                name=which,
                lhs=rep.lhs,
                rhs=rep.rhs,
                tolerance=tolerance,
                inputs={
                    "domain": f"step_{k}",
                    "t": traj.times[k],
                    "n": traj.exps.n,
                    "p": traj.exps.p,
                    "r": traj.exps.r,
                    "law": traj.law.label,
                    "C": fld.C,
                },
            )
        )
    return out
