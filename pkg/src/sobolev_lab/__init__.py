"""Numerical laboratory for best Sobolev constants and domain variation."""

__version__ = "0.1.0"

from .errors import (
    DegenerateScaling,
    InvalidExponents,
    MeshFailure,
    NoConvergence,
    NotComparable,
    PoleTooClose,
    Singularity,
    SobolevLabError,
    ZeroFunction,
)
from .exponents import SobolevExponents
from .geometry import (
    BallDomain,
    BoundarySpeed,
    Mesh2D,
    StarDomain2D,
    ball_volume,
    boundary_measure,
    triangulate,
)
from .radial import RadialProfile, matched_ball, reverse_holder_K, scale_eigenvalue, solve_ball
from .variational import ExtremalField, boundary_gradient, minimize_rayleigh, rayleigh_quotient

__all__ = [
    "__version__",
    "SobolevLabError",
    "InvalidExponents",
    "MeshFailure",
    "NoConvergence",
    "DegenerateScaling",
    "PoleTooClose",
    "Singularity",
    "NotComparable",
    "ZeroFunction",
    "SobolevExponents",
    "BallDomain",
    "StarDomain2D",
    "Mesh2D",
    "BoundarySpeed",
    "ball_volume",
    "boundary_measure",
    "triangulate",
    "RadialProfile",
    "solve_ball",
    "scale_eigenvalue",
    "matched_ball",
    "reverse_holder_K",
    "ExtremalField",
    "minimize_rayleigh",
    "boundary_gradient",
    "rayleigh_quotient",
]
