"""Extremal functions and eigenvalues on balls of any dimension.

On a ball the extremal function is radial and decreasing, and in the volume
variable v = omega_n * rho^n the Euler-Lagrange ODE integrates once to

    (-psi'(v))^(r-1) = n^(-r) omega_n^(-r/n) v^(r(1-n)/n) C int_0^v psi^(p-1),

with psi(V) = 0 and the normalization int_0^V psi^p dv = 1.  We solve this
as a fixed-point iteration: plug psi into the right side with C = 1,
integrate -psi' backward from the boundary, renormalize, and read C off the
renormalization factor.  The integral form is self-normalizing and the
v -> 0 singularity of the prefactor is integrated in closed form on the
first cell using the local power-law behavior of the slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateScaling, InvalidExponents, NoConvergence
from .exponents import SobolevExponents
from .geometry import BallDomain, ball_volume

__all__ = [
    "RadialProfile",
    "solve_ball",
    "scale_eigenvalue",
    "matched_ball",
    "reverse_holder_K",
    "unit_ball_profile",
]

MAX_ITERATIONS = 10_000


@dataclass
class RadialProfile:
    """Decreasing rearranged extremal psi*(v) on a ball, with its eigenvalue."""

    exps: SobolevExponents
    R: float
    v: np.ndarray      # uniform volume grid, v[0] = 0, v[-1] = |B_R|
    psi: np.ndarray    # psi*(v) >= 0, nonincreasing, psi[-1] = 0
    C: float
    iterations: int

    @property
    def volume(self) -> float:
        return float(self.v[-1])

    @property
    def sup(self) -> float:
        return float(self.psi[0])

    def integrate_power(self, q: float) -> float:
        """int_ball psi^q dmu = int_0^V (psi*)^q dv (trapezoid)."""
        return float(np.trapezoid(np.power(self.psi, q), self.v))

    def psi_at(self, v: np.ndarray) -> np.ndarray:
        return np.interp(v, self.v, self.psi)

    def boundary_slope(self) -> float:
        """One-sided d(psi*)/dv at v = V (no accuracy claim at the boundary)."""
        dv = self.v[1] - self.v[0]
        return float((self.psi[-1] - self.psi[-2]) / dv)

    def residual(self) -> float:
        """Max residual of the integrated ODE under the solver's own
        trapezoidal discretization, at interior cell midpoints."""
        g = _slope_magnitude(self.exps, self.v, self.psi) * self.C ** (
            1.0 / (self.exps.r - 1.0)
        )
        dv = self.v[1] - self.v[0]
        slope = (self.psi[:-1] - self.psi[1:]) / dv
        mid = 0.5 * (g[:-1] + g[1:])
        return float(np.max(np.abs(slope[1:] - mid[1:])))

    def export_text(self, path) -> None:
        with open(path, "w") as f:
            e = self.exps
            f.write(f"# {e.n} {e.p} {e.r} {self.R} {self.C!r}\n")
            for vi, pi in zip(self.v, self.psi):
                f.write(f"{float(vi)!r} {float(pi)!r}\n")


def _slope_magnitude(exps: SobolevExponents, v: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """g(v) = [n^-r omega^{-r/n} v^{r(1-n)/n} int_0^v psi^{p-1}]^{1/(r-1)},
    the slope -psi' for C = 1.  g[0] is extrapolated from the local power law
    and is only used for reporting (the first cell is integrated exactly)."""
    n, p, r = exps.n, exps.p, exps.r
    omega = ball_volume(n, 1.0)
    pref = float(n) ** (-r) * omega ** (-r / n)
    integrand = np.power(psi, p - 1.0)
    cum = np.concatenate(
        [[0.0], np.cumsum((integrand[:-1] + integrand[1:]) * 0.5 * np.diff(v))]
    )
    g = np.empty_like(v)
    with np.errstate(divide="ignore"):
        g[1:] = (pref * v[1:] ** (r * (1.0 - n) / n) * cum[1:]) ** (1.0 / (r - 1.0))
    kappa = (n - r * (n - 1.0)) / (n * (r - 1.0))
    g[0] = 0.0 if kappa > 0 else (g[1] if kappa == 0 else np.inf)
    return g


def solve_ball(
    exps: SobolevExponents,
    R: float = 1.0,
    m: int = 4000,
    tol: float = 1e-10,
    max_iterations: int = MAX_ITERATIONS,
) -> RadialProfile:
    """Solve the rearranged ball equation for psi*(v) and C on B_R in R^n.

    Fixed point of: slope from the integral identity with C = 1, backward
    integration from psi(V) = 0, renormalization to int psi^p dv = 1.  The
    renormalization factor lambda gives C = lambda^(r-1); for p = r this is
    exactly the homogeneous (power-iteration) reading, for p != r the map's
    homogeneity degree (p-1)/(r-1) != 1 makes the scale self-consistent.
    """
    if exps.r < exps.n and exps.p >= exps.r_star - 1e-12:
        raise InvalidExponents("conformal exponent p = r* is out of scope on balls")
    if R <= 0:
        raise InvalidExponents(f"R must be positive, got {R}")
    if m < 100:
        raise InvalidExponents(f"grid size m must be >= 100, got {m}")

    n, p, r = exps.n, exps.p, exps.r
    V = ball_volume(n, R)
    v = np.linspace(0.0, V, m + 1)
    dv = V / m
    kappa = (n - r * (n - 1.0)) / (n * (r - 1.0))  # g ~ v^kappa near 0, kappa > -1

    psi = 1.0 - v / V
    psi /= np.trapezoid(psi**p, v) ** (1.0 / p)

    lam = 1.0
    prev_delta = math.inf
    for iteration in range(1, max_iterations + 1):
        g = _slope_magnitude(exps, v, psi)
        tail = np.concatenate(
            [[0.0], np.cumsum((g[-2::-1] + g[:0:-1]) * 0.5 * dv)]
        )[::-1]
        # first cell: g ~ c v^kappa exactly integrable
        tail[0] = tail[1] + g[1] * v[1] / (1.0 + kappa)
        lam = np.trapezoid(tail**p, v) ** (-1.0 / p)
        psi_new = lam * tail
        delta = float(np.max(np.abs(psi_new - psi)))
        if delta > prev_delta:  # oscillation: damp the update
            psi_new = 0.5 * (psi_new + psi)
            delta = float(np.max(np.abs(psi_new - psi)))
        psi = psi_new
        prev_delta = delta
        if delta < tol:
            break
    else:
        raise NoConvergence(
            f"ball solve did not reach {tol} after {max_iterations} iterations",
            iterations=max_iterations,
        )

    C = lam ** (r - 1.0)
    return RadialProfile(exps=exps, R=R, v=v, psi=psi, C=C, iterations=iteration)


def scale_eigenvalue(C: float, exps: SobolevExponents, R: float) -> float:
    """Scaling law: C(R * Omega) = R^(n - r - rn/p) * C(Omega)."""
    if C <= 0 or R <= 0:
        raise ValueError("C and R must be positive")
    return R**exps.scaling_exponent * C


@lru_cache(maxsize=64)
def _unit_ball_cached(n: int, p: float, r: float, m: int) -> RadialProfile:
    return solve_ball(SobolevExponents(n, p, r), R=1.0, m=m)


def unit_ball_profile(exps: SobolevExponents, m: int = 4000) -> RadialProfile:
    """Cached unit-ball extremal profile (treat the result as immutable)."""
    return _unit_ball_cached(exps.n, exps.p, exps.r, m)


def matched_ball(C_target: float, exps: SobolevExponents, m: int = 4000) -> BallDomain:
    """Ball B* with C(B*) = C_target, via the scaling law from the unit ball."""
    if C_target <= 0:
        raise ValueError(f"C_target must be positive, got {C_target}")
    s = exps.scaling_exponent
    if abs(s) < 1e-12:
        raise DegenerateScaling("scaling exponent n - r - rn/p vanishes")
    C1 = unit_ball_profile(exps, m).C
    R = (C_target / C1) ** (1.0 / s)
    return BallDomain(exps.n, R)


def reverse_holder_K(
    exps: SobolevExponents, q1: float, q2: float, m: int = 4000
) -> float:
    """Sharp constant K(n, p, q1, q2) of the p = r reverse-Hoelder inequality

        (int phi^q1)^q2 >= K C^{-(n/p)(q2-q1)} (int phi^q2)^q1,

    computed from the unit-ball profile:
    K = C(B_1)^{(n/p)(q2-q1)} (int psi^q1)^q2 / (int psi^q2)^q1.
    The ratio is invariant under rescaling psi, as it must be for p = r.
    """
    if not exps.is_homogeneous:
        raise InvalidExponents("reverse_holder_K requires p = r")
    if not (1.0 < exps.p <= exps.n):
        raise InvalidExponents(f"need 1 < p <= n, got p = {exps.p}")
    if not (0.0 < q1 < q2):
        raise InvalidExponents(f"need 0 < q1 < q2, got q1 = {q1}, q2 = {q2}")
    prof = unit_ball_profile(exps, m)
    n, p = exps.n, exps.p
    I1 = prof.integrate_power(q1)
    I2 = prof.integrate_power(q2)
    return prof.C ** ((n / p) * (q2 - q1)) * I1**q2 / I2**q1
