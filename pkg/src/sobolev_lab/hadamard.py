"""First variation of the eigenvalue under boundary motion.

The rate formula Cdot = (1 - r) int_{boundary} |grad phi|^r <X, eta> dsigma
is evaluated as a boundary-edge sum and cross-validated against finite
differences of re-solved eigenvalues on normally displaced domains, with
Richardson extrapolation over two step sizes as the reference.  The
theorem-side evaluators turn the rate into the monotonicity bounds for
p = r (power / log form) and for n = r = 2 (the 8 pi bound).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidExponents
from .exponents import SobolevExponents
from .geometry import BoundarySpeed, Mesh2D, StarDomain2D, triangulate
from .radial import reverse_holder_K
from .variational import ExtremalField, boundary_gradient, minimize_rayleigh

__all__ = [
    "VariationReport",
    "hadamard_rate",
    "displaced_domain",
    "finite_difference_rate",
    "cross_validate",
    "theorem1_sides",
    "theorem2_sides",
]


@dataclass
class VariationReport:
    """Rate of change of C plus the theorem bound evaluated on one field."""

    c_dot_formula: float
    fd_steps: tuple = ()          # ((delta, rate), (delta/2, rate)), largest first
    richardson: float | None = None
    lhs: float | None = None      # -d/dt of the monotone quantity
    rhs: float | None = None      # the theorem's lower bound for lhs
    tolerance: float = 0.02
    inputs: dict = field(default_factory=dict)

    @property
    def mismatch(self) -> float | None:
        if self.richardson is None:
            return None
        return abs(self.c_dot_formula - self.richardson) / abs(self.richardson)

    @property
    def slack(self) -> float | None:
        if self.lhs is None or self.rhs is None:
            return None
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        if self.slack is None:
            return True
        return self.slack >= -self.tolerance * max(abs(self.lhs), abs(self.rhs))

    @property
    def equality(self) -> bool:
        if self.slack is None:
            return False
        return abs(self.slack) <= self.tolerance * max(abs(self.lhs), abs(self.rhs))

    def to_dict(self) -> dict:
        return {
            "c_dot_formula": self.c_dot_formula,
            "fd_steps": [list(s) for s in self.fd_steps],
            "richardson": self.richardson,
            "mismatch": self.mismatch,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "holds": self.holds,
            "equality": self.equality,
            "tolerance": self.tolerance,
            "inputs": self.inputs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def hadamard_rate(field: ExtremalField, x_normal: np.ndarray) -> float:
    """Cdot = (1 - r) sum |grad phi|^r <X, eta> len over boundary edges."""
    x_normal = np.broadcast_to(
        np.asarray(x_normal, dtype=float), (len(field.mesh.boundary_edges),)
    )
    bg = boundary_gradient(field)
    r = field.exps.r
    return float(
        (1.0 - r) * np.sum(bg**r * x_normal * field.mesh.boundary_lengths)
    )


def displaced_domain(
    domain: StarDomain2D, speed_of_theta: Callable[[np.ndarray], np.ndarray], delta: float
) -> StarDomain2D:
    """Move every boundary point by delta * speed along the outward normal.

    On the radial graph a normal displacement delta*s translates to a radial
    one of delta * s * sqrt(rho^2 + rho'^2) / rho.
    """
    rho, rp = domain.rho, domain.rho_prime()
    conv = np.sqrt(rho**2 + rp**2) / rho
    s = np.broadcast_to(np.asarray(speed_of_theta(domain.theta), dtype=float), rho.shape)
    return domain.with_rho(rho + delta * s * conv)


def finite_difference_rate(
    domain: StarDomain2D,
    exps: SobolevExponents,
    speed_of_theta: Callable[[np.ndarray], np.ndarray],
    delta: float,
    h: float,
    C_base: float | None = None,
) -> float:
    """(C(Omega_delta) - C(Omega)) / delta with both domains re-meshed at h."""
    if C_base is None:
        C_base = minimize_rayleigh(triangulate(domain, h), exps).C
    moved = displaced_domain(domain, speed_of_theta, delta)
    C_moved = minimize_rayleigh(triangulate(moved, h), exps).C
    return (C_moved - C_base) / delta


def cross_validate(
    domain: StarDomain2D,
    exps: SobolevExponents,
    speed_of_theta: Callable[[np.ndarray], np.ndarray],
    delta: float = 1e-3,
    h: float = 0.02,
    field: ExtremalField | None = None,
) -> VariationReport:
    """Hadamard formula vs Richardson-extrapolated finite differences."""
    if field is None:
        field = minimize_rayleigh(triangulate(domain, h), exps)
    speed_edges = np.asarray(
        speed_of_theta(field.mesh.boundary_midpoint_theta), dtype=float
    )
    formula = hadamard_rate(field, speed_edges)
    fd1 = finite_difference_rate(domain, exps, speed_of_theta, delta, h, field.C)
    fd2 = finite_difference_rate(domain, exps, speed_of_theta, delta / 2, h, field.C)
    rich = 2.0 * fd2 - fd1
    return VariationReport(
        c_dot_formula=formula,
        fd_steps=((delta, fd1), (delta / 2, fd2)),
        richardson=rich,
        inputs={"n": exps.n, "p": exps.p, "r": exps.r, "h": h, "delta": delta},
    )


def _check_theorem1_exponents(exps: SobolevExponents):
    if not exps.is_homogeneous:
        raise InvalidExponents("Theorem 1 sides need p = r")
    if not (1.0 < exps.p <= exps.n):
        raise InvalidExponents(f"Theorem 1 needs 1 < p <= n, got p = {exps.p}")


def theorem1_sides(
    field: ExtremalField,
    speed: BoundarySpeed,
    K: float | None = None,
    tolerance: float = 0.02,
    fd_reference: VariationReport | None = None,
) -> VariationReport:
    """Both sides of the p = r monotonicity bound.

    For p < n:  -d/dt C^((n-p)/(p(p-1))) >= ((n-p)/p) K^(1/(p-1))
                                            / (int e^((1-p)w) dsigma)^(1/(p-1)),
    for p = n the left side is -d/dt log C and the bound has n in place of p.
    The denominator exponent 1/(p-1) is the one the Hoelder step actually
    produces (and the only one that scales correctly under dilation); it
    equals the sometimes-quoted p-1 exactly when p = 2.  Equality holds on
    round balls with constant speed.
    """
    exps = field.exps
    _check_theorem1_exponents(exps)
    n, p = exps.n, exps.p
    if K is None:
        K = reverse_holder_K(exps, p - 1.0, p)
    c_dot = hadamard_rate(field, speed.speed)
    C = field.C
    lens = field.mesh.boundary_lengths
    if p < n:
        a = (n - p) / (p * (p - 1.0))
        lhs = -a * C ** (a - 1.0) * c_dot
        denom = float(np.sum(speed.speed ** (1.0 - p) * lens))
        rhs = ((n - p) / p) * K ** (1.0 / (p - 1.0)) / denom ** (1.0 / (p - 1.0))
    else:  # p = n: log form
        lhs = -c_dot / C
        denom = float(np.sum(speed.speed ** (1.0 - n) * lens))
        rhs = (n - 1.0) * K ** (1.0 / (n - 1.0)) / denom ** (1.0 / (n - 1.0))
    rep = VariationReport(
        c_dot_formula=c_dot,
        lhs=lhs,
        rhs=rhs,
        tolerance=tolerance,
        inputs={"theorem": "thm1", "n": n, "p": p, "r": exps.r, "K": K, "C": C},
    )
    if fd_reference is not None:
        rep.fd_steps = fd_reference.fd_steps
        rep.richardson = fd_reference.richardson
    return rep


def theorem2_sides(
    field: ExtremalField,
    speed: BoundarySpeed,
    tolerance: float = 0.02,
    fd_reference: VariationReport | None = None,
) -> VariationReport:
    """Both sides of the planar bound
    -d/dt log C_{p,2} >= (8 pi / p) / int e^{-w} dsigma."""
    exps = field.exps
    if exps.n != 2 or exps.r != 2.0:
        raise InvalidExponents("Theorem 2 sides need n = r = 2")
    if exps.p < 1.0:
        raise InvalidExponents("Theorem 2 needs p >= 1")
    c_dot = hadamard_rate(field, speed.speed)
    lhs = -c_dot / field.C
    denom = float(np.sum(field.mesh.boundary_lengths / speed.speed))
    rhs = (8.0 * math.pi / exps.p) / denom
    rep = VariationReport(
        c_dot_formula=c_dot,
        lhs=lhs,
        rhs=rhs,
        tolerance=tolerance,
        inputs={
            "theorem": "thm2",
            "n": exps.n,
            "p": exps.p,
            "r": exps.r,
            "C": field.C,
        },
    )
    if fd_reference is not None:
        rep.fd_steps = fd_reference.fd_steps
        rep.richardson = fd_reference.richardson
    return rep
