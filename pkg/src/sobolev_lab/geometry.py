"""Planar domains, structured triangulation, and boundary geometry.

Planar domains are star-shaped radial graphs rho(theta) about a chosen
center, sampled on a uniform angle grid.  Meshing maps a structured
radial-angular grid through rho, which is deterministic and keeps the
boundary polygon simple whenever rho > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import MeshFailure

__all__ = [
    "BallDomain",
    "StarDomain2D",
    "Mesh2D",
    "BoundarySpeed",
    "triangulate",
    "boundary_measure",
    "ball_volume",
    "unit_sphere_area",
    "write_mesh",
    "read_mesh",
]


def ball_volume(n: int, R: float = 1.0) -> float:
    """Volume of the n-ball of radius R: pi^(n/2)/Gamma(n/2+1) * R^n."""
    if n < 1 or R <= 0:
        raise ValueError(f"need n >= 1 and R > 0, got n={n}, R={R}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * R**n


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere bounding the n-ball: n * omega_n."""
    return n * ball_volume(n, 1.0)


@dataclass(frozen=True)
class BallDomain:
    """Round ball in R^n."""

    n: int
    radius: float
    center: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"ball dimension must be >= 2, got {self.n}")
        if not (self.radius > 0):
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        c = tuple(self.center) if len(self.center) else (0.0,) * self.n
        if len(c) != self.n:
            raise ValueError("center dimension mismatch")
        object.__setattr__(self, "center", c)

    @property
    def volume(self) -> float:
        return ball_volume(self.n, self.radius)


class StarDomain2D:
    """Star-shaped planar domain given by rho(theta) samples on a uniform grid.

    The boundary polygon through the samples is automatically simple because
    the angles are strictly increasing, so validity reduces to rho > 0.
    """

    def __init__(self, rho: np.ndarray, center=(0.0, 0.0)):
        rho = np.asarray(rho, dtype=float)
        if rho.ndim != 1 or rho.size < 8:
            raise MeshFailure("need at least 8 radial samples")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise MeshFailure("radial boundary function must be positive and finite")
        self.rho = rho
        self.center = np.asarray(center, dtype=float)
        self.n_samples = rho.size
        self.theta = np.arange(self.n_samples) * (2.0 * math.pi / self.n_samples)

    # -- constructors -------------------------------------------------

    @staticmethod
    def disk(radius: float = 1.0, center=(0.0, 0.0), n_samples: int = 2048) -> "StarDomain2D":
        return StarDomain2D(np.full(n_samples, float(radius)), center)

    @staticmethod
    def square(side: float = 1.0, center=(0.0, 0.0), n_samples: int = 2048) -> "StarDomain2D":
        """Axis-aligned square of the given side, corners on the sample grid.

        n_samples must be divisible by 8 so that the corner angles pi/4,
        3pi/4, ... fall exactly on samples.
        """
        if n_samples % 8:
            raise ValueError("n_samples must be divisible by 8 for exact corners")
        theta = np.arange(n_samples) * (2.0 * math.pi / n_samples)
        rho = 0.5 * side / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))
        return StarDomain2D(rho, center)

    @staticmethod
    def from_function(
        fn: Callable[[np.ndarray], np.ndarray], center=(0.0, 0.0), n_samples: int = 2048
    ) -> "StarDomain2D":
        theta = np.arange(n_samples) * (2.0 * math.pi / n_samples)
        return StarDomain2D(np.asarray(fn(theta), dtype=float), center)

    # -- evaluation ---------------------------------------------------

    def rho_at(self, theta: np.ndarray) -> np.ndarray:
        """Periodic linear interpolation of the radial samples."""
        t = np.mod(np.asarray(theta, dtype=float), 2.0 * math.pi)
        xp = np.append(self.theta, 2.0 * math.pi)
        fp = np.append(self.rho, self.rho[0])
        return np.interp(t, xp, fp)

    def rho_prime(self) -> np.ndarray:
        """Central-difference d(rho)/d(theta) on the sample grid (periodic)."""
        dt = 2.0 * math.pi / self.n_samples
        return (np.roll(self.rho, -1) - np.roll(self.rho, 1)) / (2.0 * dt)

    def boundary_points(self) -> np.ndarray:
        return self.center + self.rho[:, None] * np.column_stack(
            [np.cos(self.theta), np.sin(self.theta)]
        )

    def perimeter_estimate(self) -> float:
        pts = self.boundary_points()
        return float(np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)))

    def with_rho(self, new_rho: np.ndarray) -> "StarDomain2D":
        return StarDomain2D(new_rho, self.center)


@dataclass
class Mesh2D:
    """Triangulated star-shaped planar domain.

    Boundary edges are listed counterclockwise as consecutive node pairs of
    the outer ring; normals are per-edge outward unit vectors and lengths are
    the boundary measure weights.
    """

    nodes: np.ndarray           # (N, 2)
    triangles: np.ndarray       # (T, 3) CCW
    boundary_edges: np.ndarray  # (B, 2) node pairs, CCW loop
    boundary_normals: np.ndarray  # (B, 2) outward unit
    boundary_lengths: np.ndarray  # (B,)
    boundary_tri: np.ndarray    # (B,) adjacent triangle index
    is_boundary_node: np.ndarray  # (N,) bool
    h: float                    # target edge length used to build the mesh
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def area(self) -> float:
        return float(np.sum(self.triangle_areas))

    @cached_property
    def boundary_midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[self.boundary_edges[:, 0]] + self.nodes[self.boundary_edges[:, 1]])

    @cached_property
    def boundary_midpoint_theta(self) -> np.ndarray:
        d = self.boundary_midpoints - self.center
        return np.mod(np.arctan2(d[:, 1], d[:, 0]), 2.0 * math.pi)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def validate(self) -> None:
        """Raise MeshFailure if any structural invariant is broken."""
        if np.any(self.triangle_areas <= 0):
            raise MeshFailure("non-positive triangle area")
        # boundary edges must form one closed loop
        be = self.boundary_edges
        if not np.array_equal(be[1:, 0], be[:-1, 1]) or be[0, 0] != be[-1, 1]:
            raise MeshFailure("boundary edges do not form a single closed loop")
        # outward normals: positive dot product with centroid-to-edge vector
        centroid = self.nodes.mean(axis=0)
        outward = self.boundary_midpoints - centroid
        if np.any(np.sum(outward * self.boundary_normals, axis=1) <= 0):
            raise MeshFailure("boundary normal points inward")


@dataclass
class BoundarySpeed:
    """Strictly positive normal speed e^w sampled per boundary edge."""

    w: np.ndarray      # log-speed, dimensionless
    speed: np.ndarray  # e^w, per boundary edge

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.speed = np.asarray(self.speed, dtype=float)
        if self.w.shape != self.speed.shape:
            raise ValueError("w and speed must have matching shapes")
        if not np.all(np.isfinite(self.speed)) or np.any(self.speed <= 0):
            raise ValueError("boundary speed must be finite and strictly positive")

    @staticmethod
    def from_w(mesh: Mesh2D, w: np.ndarray) -> "BoundarySpeed":
        w = np.broadcast_to(np.asarray(w, dtype=float), (len(mesh.boundary_edges),)).copy()
        return BoundarySpeed(w=w, speed=np.exp(w))

    @staticmethod
    def from_speed(mesh: Mesh2D, speed: np.ndarray) -> "BoundarySpeed":
        speed = np.broadcast_to(
            np.asarray(speed, dtype=float), (len(mesh.boundary_edges),)
        ).copy()
        return BoundarySpeed(w=np.log(speed), speed=speed)

    @staticmethod
    def from_w_function(mesh: Mesh2D, fn) -> "BoundarySpeed":
        """w evaluated at boundary-edge midpoint angles about the mesh center."""
        w = np.asarray(fn(mesh.boundary_midpoint_theta), dtype=float)
        return BoundarySpeed.from_w(mesh, w)


def _pick_boundary_count(n_samples: int, n_desired: int) -> tuple[int, bool]:
    """Boundary vertex count: an exact subsampling of the sample grid if
    possible (keeps sample points, e.g. polygon corners, on the mesh)."""
    if n_desired <= n_samples:
        for k in range(n_samples // n_desired, 0, -1):
            if n_samples % k == 0:
                return n_samples // k, True
    return n_desired, False


def triangulate(domain: StarDomain2D, h: float) -> Mesh2D:
    """Structured radial-angular triangulation with target edge length h."""
    rho_min = float(domain.rho.min())
    rho_max = float(domain.rho.max())
    if not (0 < h < rho_min / 4.0):
        raise MeshFailure(f"h = {h} too coarse for min radius {rho_min}")

    perim = domain.perimeter_estimate()
    n_desired = max(16, math.ceil(perim / h))
    n_b, aligned = _pick_boundary_count(domain.n_samples, n_desired)
    if aligned:
        step = domain.n_samples // n_b
        theta_b = domain.theta[::step]
        rho_b = domain.rho[::step]
    else:
        theta_b = np.arange(n_b) * (2.0 * math.pi / n_b)
        rho_b = domain.rho_at(theta_b)

    n_r = max(2, math.ceil(rho_max / h))

    # nodes: center, then rings j = 1..n_r of n_b points each
    s = np.arange(1, n_r + 1) / n_r
    unit = np.column_stack([np.cos(theta_b), np.sin(theta_b)])
    ring_nodes = (s[:, None, None] * rho_b[None, :, None]) * unit[None, :, :]
    nodes = np.vstack([np.zeros((1, 2)), ring_nodes.reshape(-1, 2)]) + domain.center

    def idx(j, i):
        # ring j >= 1, angular index i (mod n_b)
        return 1 + (j - 1) * n_b + (i % n_b)

    i_arr = np.arange(n_b)
    tris = [np.column_stack([np.zeros(n_b, dtype=int), idx(1, i_arr), idx(1, i_arr + 1)])]
    for j in range(1, n_r):
        a, b_, c, d = idx(j, i_arr), idx(j, i_arr + 1), idx(j + 1, i_arr), idx(j + 1, i_arr + 1)
        tris.append(np.column_stack([a, c, d]))
        tris.append(np.column_stack([a, d, b_]))
    triangles = np.vstack(tris)

    boundary_edges = np.column_stack([idx(n_r, i_arr), idx(n_r, i_arr + 1)])
    p1 = nodes[boundary_edges[:, 0]]
    p2 = nodes[boundary_edges[:, 1]]
    edge_vec = p2 - p1
    lengths = np.linalg.norm(edge_vec, axis=1)
    normals = np.column_stack([edge_vec[:, 1], -edge_vec[:, 0]]) / lengths[:, None]

    # adjacent triangle of each boundary edge: the (a, c, d) triangle of the
    # outermost ring band, whose edge (c, d) lies on ring n_r at angles i, i+1
    if n_r > 1:
        band_start = n_b + 2 * (n_r - 2) * n_b  # fan + inner bands
        boundary_tri = band_start + i_arr
    else:
        boundary_tri = i_arr.copy()

    is_boundary = np.zeros(nodes.shape[0], dtype=bool)
    is_boundary[idx(n_r, i_arr)] = True

    mesh = Mesh2D(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=boundary_edges,
        boundary_normals=normals,
        boundary_lengths=lengths,
        boundary_tri=boundary_tri,
        is_boundary_node=is_boundary,
        h=h,
        center=domain.center.copy(),
    )
    mesh.validate()
    # the adjacency shortcut above must agree with the actual triangle list
    tri_of_edge = mesh.triangles[mesh.boundary_tri]
    for col in (0, 1):
        member = (tri_of_edge == mesh.boundary_edges[:, col][:, None]).any(axis=1)
        if not member.all():
            raise MeshFailure("boundary-edge adjacency bookkeeping broken")
    return mesh


def boundary_measure(mesh: Mesh2D) -> float:
    """Total boundary length (discrete perimeter)."""
    return float(np.sum(mesh.boundary_lengths))


# -- plain-text mesh exchange format ---------------------------------------
# header "N T B", then N node lines "x y", T triangle lines "i j k",
# B boundary edge lines "i j nx ny len"


def mesh_to_text(mesh: Mesh2D) -> str:
    lines = [f"{mesh.n_nodes} {mesh.n_triangles} {len(mesh.boundary_edges)}"]
    lines.extend(f"{float(x)!r} {float(y)!r}" for x, y in mesh.nodes)
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles)
    lines.extend(
        f"{i} {j} {float(nx)!r} {float(ny)!r} {float(ln)!r}"
        for (i, j), (nx, ny), ln in zip(
            mesh.boundary_edges, mesh.boundary_normals, mesh.boundary_lengths
        )
    )
    return "\n".join(lines) + "\n"


def write_mesh(mesh: Mesh2D, path) -> None:
    with open(path, "w") as f:
        f.write(mesh_to_text(mesh))


def read_mesh(path) -> Mesh2D:
    with open(path) as f:
        n, t, b = map(int, f.readline().split())
        nodes = np.array([[float(v) for v in f.readline().split()] for _ in range(n)])
        triangles = np.array(
            [[int(v) for v in f.readline().split()] for _ in range(t)], dtype=int
        )
        rows = [f.readline().split() for _ in range(b)]
    edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=int)
    normals = np.array([[float(r[2]), float(r[3])] for r in rows])
    lengths = np.array([float(r[4]) for r in rows])

    # rebuild adjacency and flags from the triangle list
    is_boundary = np.zeros(n, dtype=bool)
    is_boundary[edges.ravel()] = True
    tri_sets = [set() for _ in range(n)]
    for ti, tri in enumerate(triangles):
        for v in tri:
            tri_sets[v].add(ti)
    boundary_tri = np.array(
        [min(tri_sets[i] & tri_sets[j]) for i, j in edges], dtype=int
    )
    hs = float(np.median(lengths))
    mesh = Mesh2D(
        nodes=nodes,
        triangles=triangles,
        boundary_edges=edges,
        boundary_normals=normals,
        boundary_lengths=lengths,
        boundary_tri=boundary_tri,
        is_boundary_node=is_boundary,
        h=hs,
        center=nodes.mean(axis=0),
    )
    return mesh
