"""Direct minimization of the Rayleigh quotient on triangulated planar domains.

Continuous piecewise-linear elements: gradients are per-triangle constants,
p-th power integrals use the 3-point edge-midpoint rule (exact for
quadratics).  For p = r = 2 the minimizer comes from inverse power iteration
on the stiffness/mass pair; p = 1, r = 2 is a single linear solve (torsion);
all other admissible (p, r) run projected gradient descent on the constraint
sphere int phi^p = 1, preconditioned by the Laplace stiffness (Sobolev
gradient), with Armijo backtracking and positivity projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidExponents, NoConvergence, ZeroFunction
from .exponents import SobolevExponents
from .geometry import Mesh2D

__all__ = ["ExtremalField", "minimize_rayleigh", "boundary_gradient", "rayleigh_quotient"]

_EDGE_PAIRS = ((0, 1), (1, 2), (2, 0))


class _P1Space:
    """Per-mesh FEM arrays shared by all evaluations on that mesh."""

    def __init__(self, mesh: Mesh2D):
        self.mesh = mesh
        tri = mesh.triangles
        p = mesh.nodes[tri]
        area = mesh.triangle_areas
        # grad of barycentric basis k: perpendicular of the opposite edge / 2A
        g = np.empty((tri.shape[0], 3, 2))
        for k in range(3):
            e = p[:, (k + 2) % 3] - p[:, (k + 1) % 3]
            g[:, k, 0] = -e[:, 1]
            g[:, k, 1] = e[:, 0]
        self.grads = g / (2.0 * area)[:, None, None]
        self.areas = area
        self.tri = tri
        self.interior = ~mesh.is_boundary_node

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        t = self.tri
        n = self.mesh.n_nodes
        rows, cols, vals = [], [], []
        for i in range(3):
            for j in range(3):
                rows.append(t[:, i])
                cols.append(t[:, j])
                vals.append(self.areas * np.sum(self.grads[:, i] * self.grads[:, j], axis=1))
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    @cached_property
    def mass(self) -> sp.csr_matrix:
        # edge-midpoint rule on lambda_i lambda_j == consistent P1 mass matrix
        t = self.tri
        n = self.mesh.n_nodes
        rows, cols, vals = [], [], []
        for i in range(3):
            for j in range(3):
                w = self.areas / (6.0 if i == j else 12.0)
                rows.append(t[:, i])
                cols.append(t[:, j])
                vals.append(w)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )

    @cached_property
    def load(self) -> np.ndarray:
        b = np.zeros(self.mesh.n_nodes)
        np.add.at(b, self.tri.ravel(), np.repeat(self.areas / 3.0, 3))
        return b

    @cached_property
    def interior_solver(self):
        ii = self.interior
        return spla.factorized(self.stiffness[ii][:, ii].tocsc())

    def tri_gradients(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("tk,tkd->td", u[self.tri], self.grads)

    def dirichlet_energy(self, u: np.ndarray, r: float) -> float:
        gn = np.linalg.norm(self.tri_gradients(u), axis=1)
        return float(np.sum(self.areas * gn**r))

    def energy_gradient(self, u: np.ndarray, r: float) -> np.ndarray:
        """Nodal gradient of int |grad u|^r (zeroed on the boundary)."""
        gu = self.tri_gradients(u)
        gn = np.linalg.norm(gu, axis=1)
        with np.errstate(divide="ignore"):
            w = np.where(gn > 0, gn ** (r - 2.0), 0.0)
        flux = (r * self.areas * w)[:, None] * gu
        out = np.zeros(self.mesh.n_nodes)
        for k in range(3):
            np.add.at(out, self.tri[:, k], np.sum(flux * self.grads[:, k], axis=1))
        out[~self.interior] = 0.0
        return out

    def integrate_power(self, u: np.ndarray, q: float) -> float:
        um = self._edge_midpoint_values(u)
        return float(np.sum(self.areas[:, None] / 3.0 * np.power(um, q)))

    def power_gradient(self, u: np.ndarray, q: float) -> np.ndarray:
        """Nodal gradient of int u^q (zeroed on the boundary)."""
        um = self._edge_midpoint_values(u)
        with np.errstate(divide="ignore"):
            dmid = np.where(um > 0, q * np.power(um, q - 1.0), 0.0)
        dmid *= self.areas[:, None] / 6.0  # d(u_mid)/d(u_node) = 1/2
        out = np.zeros(self.mesh.n_nodes)
        for e, (a, b) in enumerate(_EDGE_PAIRS):
            np.add.at(out, self.tri[:, a], dmid[:, e])
            np.add.at(out, self.tri[:, b], dmid[:, e])
        out[~self.interior] = 0.0
        return out

    def _edge_midpoint_values(self, u: np.ndarray) -> np.ndarray:
        ut = u[self.tri]
        return np.column_stack([0.5 * (ut[:, a] + ut[:, b]) for a, b in _EDGE_PAIRS])


_SPACES: dict[int, _P1Space] = {}


def _space(mesh: Mesh2D) -> _P1Space:
    key = id(mesh)
    if key not in _SPACES or _SPACES[key].mesh is not mesh:
        _SPACES[key] = _P1Space(mesh)
    return _SPACES[key]


@dataclass
class ExtremalField:
    """Nodal extremal function with its eigenvalue C = int |grad phi|^r."""

    mesh: Mesh2D
    exps: SobolevExponents
    values: np.ndarray
    C: float
    iterations: int
    el_residual: float
    domain_id: str = ""

    @property
    def space(self) -> _P1Space:
        return _space(self.mesh)

    def integrate_power(self, q: float) -> float:
        return self.space.integrate_power(self.values, q)

    def gradient_norms(self) -> np.ndarray:
        return np.linalg.norm(self.space.tri_gradients(self.values), axis=1)

    def summary(self) -> dict:
        e = self.exps
        return {
            "n": e.n,
            "p": e.p,
            "r": e.r,
            "C": self.C,
            "h": self.mesh.h,
            "iterations": self.iterations,
            "residual": self.el_residual,
        }


def _el_residual(space: _P1Space, u: np.ndarray, exps: SobolevExponents, C: float):
    """Weak Euler-Lagrange residual a(u) - C m(u) and its size relative to C."""
    a = space.energy_gradient(u, exps.r) / exps.r
    m_ = space.power_gradient(u, exps.p) / exps.p
    res = a - C * m_
    denom = C * np.linalg.norm(m_[space.interior])
    rel = float(np.linalg.norm(res[space.interior]) / denom) if denom > 0 else np.inf
    return res, rel


def _initial_guess(space: _P1Space) -> np.ndarray:
    """Interior indicator smoothed once over node neighborhoods (deterministic)."""
    mesh = space.mesh
    u = space.interior.astype(float)
    acc = u.copy()
    cnt = np.ones(mesh.n_nodes)
    tri = mesh.triangles
    for a, b in _EDGE_PAIRS:
        np.add.at(acc, tri[:, a], u[tri[:, b]])
        np.add.at(acc, tri[:, b], u[tri[:, a]])
        np.add.at(cnt, tri[:, a], 1.0)
        np.add.at(cnt, tri[:, b], 1.0)
    u = acc / cnt
    u[~space.interior] = 0.0
    return u


def _solve_p2r2(space: _P1Space, tol: float, max_iterations: int):
    ii = space.interior
    K = space.stiffness[ii][:, ii].tocsc()
    M = space.mass[ii][:, ii].tocsr()
    solve = space.interior_solver
    x = _initial_guess(space)[ii]
    x /= np.sqrt(x @ (M @ x))
    C = x @ (K @ x)
    for it in range(1, max_iterations + 1):
        y = solve(M @ x)
        y /= np.sqrt(y @ (M @ y))
        C_new = y @ (K @ y)
        done = abs(C_new - C) <= 1e-13 * C_new
        x, C = y, C_new
        if done:
            break
    else:
        raise NoConvergence("inverse power iteration stalled", iterations=max_iterations)
    return x, C, it


def _solve_torsion(space: _P1Space):
    ii = space.interior
    b = space.load[ii]
    u = space.interior_solver(b)
    c = b @ u  # = int u before scaling
    return u / c, 1.0 / c


def _solve_descent(space: _P1Space, exps: SobolevExponents, tol: float, max_iterations: int):
    ii = space.interior
    p, r = exps.p, exps.r
    solve = space.interior_solver

    def normalize(u):
        return u / space.integrate_power(u, p) ** (1.0 / p)

    u = normalize(_initial_guess(space))
    C = space.dirichlet_energy(u, r)
    alpha = 1.0
    rel = np.inf
    for it in range(1, max_iterations + 1):
        res, rel = _el_residual(space, u, exps, C)
        if rel < tol:
            return u, C, it, rel
        score = np.linalg.norm(res[ii])
        d = np.zeros_like(u)
        d[ii] = solve(res[ii])
        slope = float(res[ii] @ d[ii])  # descent rate of C along -d (up to factor r)
        accepted = False
        for trial in range(60):
            cand = normalize(np.maximum(u - alpha * d, 0.0))
            C_cand = space.dirichlet_energy(cand, r)
            # Armijo on the quotient; near the minimum the decrease drops
            # below float resolution of C, so a measurable contraction of the
            # EL residual also certifies the step (it stays first order in
            # alpha where the energy test is quadratically small).
            ok = C_cand <= C - 1e-4 * alpha * r * slope
            if not ok:
                res_cand, _ = _el_residual(space, cand, exps, C_cand)
                ok = np.linalg.norm(res_cand[ii]) <= 0.9999 * score
            if ok:
                u, C = cand, C_cand
                if trial == 0:
                    alpha = min(alpha * 1.3, 1e3)
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
    res, rel = _el_residual(space, u, exps, C)
    if rel < tol:
        return u, C, it, rel
    raise NoConvergence(
        f"projected descent stalled at EL residual {rel:.3e} (tol {tol})",
        iterations=it,
    )


def minimize_rayleigh(
    mesh: Mesh2D,
    exps: SobolevExponents,
    tol: float = 1e-7,
    max_iterations: int = 20_000,
    domain_id: str = "",
) -> ExtremalField:
    """Nonnegative minimizer of int |grad u|^r / (int u^p)^(r/p), int u^p = 1."""
    if exps.n != 2:
        raise InvalidExponents("the planar solver requires n = 2")
    if exps.r > 2.0:
        raise InvalidExponents("degenerate case r > 2 is not supported in 2-D")
    if exps.r < 2.0 and exps.p >= exps.r_star - 1e-12:
        raise InvalidExponents("p must be subcritical (p < r*) for r < 2")
    space = _space(mesh)
    if not np.any(space.interior):
        raise InvalidExponents("mesh has no interior node")

    if exps.p == 2.0 and exps.r == 2.0:
        x, C, it = _solve_p2r2(space, tol, max_iterations)
        u = np.zeros(mesh.n_nodes)
        u[space.interior] = np.abs(x)
    elif exps.p == 1.0 and exps.r == 2.0:
        x, C = _solve_torsion(space)
        u = np.zeros(mesh.n_nodes)
        u[space.interior] = x
        it = 1
    else:
        u, C, it, _ = _solve_descent(space, exps, tol, max_iterations)

    u /= space.integrate_power(u, exps.p) ** (1.0 / exps.p)
    C = space.dirichlet_energy(u, exps.r)
    _, rel = _el_residual(space, u, exps, C)
    return ExtremalField(
        mesh=mesh, exps=exps, values=u, C=C, iterations=it, el_residual=rel,
        domain_id=domain_id,
    )


def boundary_gradient(field: ExtremalField) -> np.ndarray:
    """|grad phi| on each boundary edge, from the adjacent triangle."""
    return field.gradient_norms()[field.mesh.boundary_tri]


def rayleigh_quotient(mesh: Mesh2D, values: np.ndarray, exps: SobolevExponents) -> float:
    """int |grad u|^r / (int |u|^p)^(r/p) for nodal values vanishing on the boundary."""
    values = np.asarray(values, dtype=float)
    if np.any(values[mesh.is_boundary_node] != 0.0):
        raise ValueError("values must vanish at boundary nodes")
    if not np.any(values):
        raise ZeroFunction("Rayleigh quotient of the zero function")
    space = _space(mesh)
    num = space.dirichlet_energy(values, exps.r)
    den = space.integrate_power(np.abs(values), exps.p) ** (exps.r / exps.p)
    return num / den
