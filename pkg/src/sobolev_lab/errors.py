"""Exception types shared across the lab."""


class SobolevLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidExponents(SobolevLabError):
    """Exponent triple (n, p, r) outside the supported range."""


class MeshFailure(SobolevLabError):
    """Boundary or mesh degeneracy (self-intersection, collapsed radius, ...)."""


class NoConvergence(SobolevLabError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class DegenerateScaling(SobolevLabError):
    """Scaling exponent n - r - rn/p vanishes; no matched ball exists."""


class PoleTooClose(SobolevLabError):
    """Green's function pole too close to the boundary for the mesh size."""


class Singularity(SobolevLabError):
    """Moebius chain evaluated at (or mapping a ball through) an inversion center."""


class NotComparable(SobolevLabError):
    """Rearrangement profiles not monotone within tolerance; crossing count undefined."""


class ZeroFunction(SobolevLabError):
    """Rayleigh quotient of the zero function requested."""
