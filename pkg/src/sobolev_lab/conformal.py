"""Moebius chains in R^n (n >= 3) and the conformal monotonicity check.

Conformal diffeomorphisms in dimension n >= 3 are compositions of
translations, rotations, dilations, and sphere inversions, and they send
spheres to spheres.  Images of balls are therefore tracked in closed form,
which makes the monotonicity comparison exactly computable from radial
eigenvalues: no volume PDE solve is involved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import InvalidExponents, Singularity
from .exponents import SobolevExponents
from .geometry import BallDomain, ball_volume, unit_sphere_area
from .radial import unit_ball_profile

__all__ = [
    "Translation",
    "Rotation",
    "Scaling",
    "Inversion",
    "MobiusMap",
    "sphere_quadrature",
    "hypothesis_integral",
    "theorem3_check",
    "Theorem3Report",
]

_EPS = 1e-14


@dataclass(frozen=True)
class Translation:
    b: tuple

    def apply(self, x):
        return x + np.asarray(self.b)

    def factor(self, x):
        return np.ones(x.shape[:-1])

    def map_ball(self, c, rho):
        return c + np.asarray(self.b), rho


@dataclass(frozen=True)
class Rotation:
    Q: tuple  # row tuples of an orthogonal matrix with det +1

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if not np.allclose(Q @ Q.T, np.eye(Q.shape[0]), atol=1e-12):
            raise ValueError("rotation matrix must be orthogonal")
        if np.linalg.det(Q) < 0:
            raise ValueError("rotation matrix must have det +1")

    def apply(self, x):
        return x @ np.asarray(self.Q).T

    def factor(self, x):
        return np.ones(x.shape[:-1])

    def map_ball(self, c, rho):
        return c @ np.asarray(self.Q).T, rho


@dataclass(frozen=True)
class Scaling:
    lam: float

    def __post_init__(self):
        if not (self.lam > 0):
            raise ValueError("scaling factor must be positive")

    def apply(self, x):
        return self.lam * x

    def factor(self, x):
        return np.full(x.shape[:-1], self.lam)

    def map_ball(self, c, rho):
        return self.lam * c, self.lam * rho


@dataclass(frozen=True)
class Inversion:
    """x -> x / |x|^2, the inversion in the unit sphere about the origin."""

    def apply(self, x):
        n2 = np.sum(x * x, axis=-1, keepdims=True)
        if np.any(n2 < _EPS):
            raise Singularity("point at the inversion center")
        return x / n2

    def factor(self, x):
        n2 = np.sum(x * x, axis=-1)
        if np.any(n2 < _EPS):
            raise Singularity("point at the inversion center")
        return 1.0 / n2

    def map_ball(self, c, rho):
        d2 = float(np.sum(c * c)) - rho * rho
        if d2 <= _EPS:
            raise Singularity(
                "inversion center inside or on the ball image; the image is unbounded"
            )
        return c / d2, rho / d2


Primitive = Translation | Rotation | Scaling | Inversion


@dataclass(frozen=True)
class MobiusMap:
    """Ordered composition chain, applied left to right."""

    chain: tuple
    dim: int

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError("Moebius module covers n >= 3 only")
        object.__setattr__(self, "chain", tuple(self.chain))

    def validate_on_unit_ball(self) -> None:
        """Raise Singularity unless the chain maps the closed unit ball to a
        bounded ball (no inversion center inside an intermediate image)."""
        self.image_ball(1.0, verify=False)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        for prim in self.chain:
            x = prim.apply(x)
        return x

    def conformal_factor(self, x) -> np.ndarray:
        """|DF|(x): the scalar stretch, multiplicative along the chain."""
        x = np.asarray(x, dtype=float)
        f = np.ones(x.shape[:-1])
        for prim in self.chain:
            f = f * prim.factor(x)
            x = prim.apply(x)
        return f

    def image_ball(self, t: float, verify: bool = True) -> BallDomain:
        """Image of the ball of radius t about the origin (a round ball)."""
        if not (t > 0):
            raise ValueError("radius t must be positive")
        c = np.zeros(self.dim)
        rho = float(t)
        for prim in self.chain:
            c, rho = prim.map_ball(c, rho)
        ball = BallDomain(self.dim, rho, tuple(c))
        if verify and self.chain:
            res = self.sphere_residual(t, ball)
            if res > 1e-10:
                raise Singularity(f"sphere image residual {res:.3e} exceeds 1e-10")
        return ball

    def sphere_residual(self, t: float, ball: BallDomain | None = None, k: int = 20) -> float:
        """Max distance of k mapped sphere points from the computed image sphere."""
        if ball is None:
            ball = self.image_ball(t, verify=False)
        rng = np.random.default_rng(20)
        pts = rng.normal(size=(k, self.dim))
        pts *= t / np.linalg.norm(pts, axis=1)[:, None]
        img = self.apply(pts)
        rad = np.linalg.norm(img - np.asarray(ball.center), axis=1)
        return float(np.max(np.abs(rad - ball.radius)))


@lru_cache(maxsize=16)
def sphere_quadrature(n: int, n_polar: int = 48, n_azimuth: int = 96):
    """Quadrature for the unit sphere S^(n-1) in R^n.

    Product rule: uniform in azimuth, Gauss-Jacobi in the cosine of each
    polar angle (the Jacobi weight absorbs the sin^k factors exactly).
    Returns (points, weights) with sum(weights) = |S^(n-1)|.
    """
    phi = (np.arange(n_azimuth) + 0.5) * (2.0 * math.pi / n_azimuth)
    pts = np.column_stack([np.cos(phi), np.sin(phi)])
    wts = np.full(n_azimuth, 2.0 * math.pi / n_azimuth)
    for k in range(2, n):
        # lift S^(k-1) to S^k: x = (sin(theta) * omega, cos(theta))
        u, wu = roots_jacobi(n_polar, (k - 2) / 2.0, (k - 2) / 2.0)
        s = np.sqrt(1.0 - u**2)
        pts = np.concatenate(
            [
                s[:, None, None] * pts[None, :, :],
                np.broadcast_to(u[:, None, None], (u.size, pts.shape[0], 1)),
            ],
            axis=2,
        ).reshape(-1, k + 1)
        wts = (wu[:, None] * wts[None, :]).ravel()
    return pts, wts


def hypothesis_integral(
    map_: MobiusMap, t: float, e: float, n_polar: int = 48, n_azimuth: int = 96
) -> float:
    """int over the sphere of radius t of |DF|^e dsigma by product quadrature."""
    pts, wts = sphere_quadrature(map_.dim, n_polar, n_azimuth)
    f = map_.conformal_factor(t * pts)
    return float(t ** (map_.dim - 1) * np.sum(wts * np.power(f, e)))


@dataclass
class Theorem3Report:
    """Conformal monotonicity data on a t-grid.

    bracket(t) is C(F(B_t))^a - C(B_t)^a for p < n (a = (n-p)/(p(p-1)))
    and log(C(F(B_t))/C(B_t)) for p = n; the comparison requires it to be
    nonincreasing wherever the surface-integral hypothesis holds.  Both
    hypothesis sides are reported so alternative readings of the printed
    hypothesis can be re-tested from the output alone.
    """

    exps: SobolevExponents
    t: np.ndarray
    C_image: np.ndarray
    C_ball: np.ndarray
    bracket: np.ndarray
    d_bracket_dt: np.ndarray          # centered differences, endpoints one-sided
    hypothesis_lhs: np.ndarray        # int |DF|^(n-2) dsigma over the t-sphere
    hypothesis_rhs: np.ndarray        # |sphere_t| ** ((p-1)^2)
    sphere_residual: float
    tolerance: float

    @property
    def hypothesis_holds(self) -> np.ndarray:
        return self.hypothesis_lhs >= self.hypothesis_rhs * (1.0 - 1e-9)

    @property
    def monotone_where_hypothesis(self) -> bool:
        scale = float(np.max(np.abs(self.bracket))) or 1.0
        mask = self.hypothesis_holds
        return bool(np.all(self.d_bracket_dt[mask] <= self.tolerance * scale))

    @property
    def monotone_everywhere(self) -> bool:
        scale = float(np.max(np.abs(self.bracket))) or 1.0
        return bool(np.all(self.d_bracket_dt <= self.tolerance * scale))

    def csv_rows(self) -> list[str]:
        rows = ["t,C_image,C_ball,bracket,d_bracket_dt,hypothesis_lhs,hypothesis_rhs"]
        for i in range(self.t.size):
            rows.append(
                f"{self.t[i]},{self.C_image[i]},{self.C_ball[i]},{self.bracket[i]},"
                f"{self.d_bracket_dt[i]},{self.hypothesis_lhs[i]},{self.hypothesis_rhs[i]}"
            )
        return rows

    def to_dict(self) -> dict:
        return {
            "t": self.t.tolist(),
            "C_image": self.C_image.tolist(),
            "C_ball": self.C_ball.tolist(),
            "bracket": self.bracket.tolist(),
            "d_bracket_dt": self.d_bracket_dt.tolist(),
            "hypothesis_lhs": self.hypothesis_lhs.tolist(),
            "hypothesis_rhs": self.hypothesis_rhs.tolist(),
            "hypothesis_holds": self.hypothesis_holds.tolist(),
            "monotone_where_hypothesis": self.monotone_where_hypothesis,
            "monotone_everywhere": self.monotone_everywhere,
            "sphere_residual": self.sphere_residual,
            "tolerance": self.tolerance,
        }


def theorem3_check(
    map_: MobiusMap,
    exps: SobolevExponents,
    t_grid,
    m_radial: int = 4000,
    tolerance: float = 1e-6,
    n_polar: int = 48,
    n_azimuth: int = 96,
) -> Theorem3Report:
    """Evaluate the conformal comparison along a grid of ball radii."""
    if exps.n != map_.dim:
        raise InvalidExponents("exponent dimension must match the map dimension")
    if not exps.is_homogeneous:
        raise InvalidExponents("the conformal comparison needs p = r")
    if not (1.0 < exps.p <= exps.n):
        raise InvalidExponents(f"need 1 < p <= n, got p = {exps.p}")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3 or np.any(t <= 0) or np.any(t >= 1) or np.any(np.diff(t) <= 0):
        raise ValueError("t grid must be increasing inside (0, 1) with >= 3 points")

    n, p = exps.n, exps.p
    C1 = unit_ball_profile(exps, m_radial).C
    s = exps.scaling_exponent  # = -p for p = r

    radii = np.empty(t.size)
    resid = 0.0
    for i, ti in enumerate(t):
        ball = map_.image_ball(float(ti))
        radii[i] = ball.radius
        resid = max(resid, map_.sphere_residual(float(ti), ball))
    C_img = C1 * radii**s
    C_ball = C1 * t**s
    if p < n:
        a = (n - p) / (p * (p - 1.0))
        bracket = C_img**a - C_ball**a
    else:
        bracket = np.log(C_img / C_ball)

    d = np.empty_like(bracket)
    d[1:-1] = (bracket[2:] - bracket[:-2]) / (t[2:] - t[:-2])
    d[0] = (bracket[1] - bracket[0]) / (t[1] - t[0])
    d[-1] = (bracket[-1] - bracket[-2]) / (t[-1] - t[-2])

    hyp_lhs = np.array(
        [hypothesis_integral(map_, float(ti), n - 2.0, n_polar, n_azimuth) for ti in t]
    )
    hyp_rhs = (unit_sphere_area(n) * t ** (n - 1)) ** ((p - 1.0) ** 2)
    return Theorem3Report(
        exps=exps,
        t=t,
        C_image=C_img,
        C_ball=C_ball,
        bracket=bracket,
        d_bracket_dt=d,
        hypothesis_lhs=hyp_lhs,
        hypothesis_rhs=hyp_rhs,
        sphere_residual=resid,
        tolerance=tolerance,
    )
