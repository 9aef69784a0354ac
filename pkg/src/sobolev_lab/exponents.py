"""Exponent triples (n, p, r) and the eigenvalue scaling law."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidExponents


@dataclass(frozen=True)
class SobolevExponents:
    """Dimension and exponent pair for the constant C_{p,r}.

    Valid range: n >= 2, r in (1, n], p in [1, r*] with r* = nr/(n-r) for
    r < n and r* = infinity for r = n.  (The r = n case is compact on
    bounded domains for every finite p, e.g. the planar p=1, r=2 torsion
    problem and the n = r = 2 membrane problem.)
    """

    n: int
    p: float
    r: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidExponents(f"dimension n must be an integer >= 2, got {self.n}")
        if not (self.r > 1.0):
            raise InvalidExponents(f"r must exceed 1, got {self.r}")
        if self.r > self.n:
            raise InvalidExponents(f"r must be <= n = {self.n}, got {self.r}")
        if not (self.p >= 1.0) or not math.isfinite(self.p):
            raise InvalidExponents(f"p must be finite and >= 1, got {self.p}")
        if self.r < self.n and self.p > self.r_star + 1e-12:
            raise InvalidExponents(
                f"p = {self.p} exceeds the critical exponent r* = {self.r_star}"
            )

    @property
    def r_star(self) -> float:
        """Critical embedding exponent nr/(n-r), infinite when r = n."""
        if self.r >= self.n:
            return math.inf
        return self.n * self.r / (self.n - self.r)

    @property
    def scaling_exponent(self) -> float:
        """Exponent s with C(R * Omega) = R**s * C(Omega): s = n - r - rn/p."""
        return self.n - self.r - self.r * self.n / self.p

    @property
    def is_homogeneous(self) -> bool:
        """True when p = r (the Euler-Lagrange equation is then homogeneous)."""
        return abs(self.p - self.r) < 1e-14
