"""Pydantic request and response models for the lab service."""

from __future__ import annotations

import ast
import math
from typing import Any, Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..exponents import SobolevExponents
from ..geometry import StarDomain2D

_ALLOWED_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
_ALLOWED_NAMES = set(_ALLOWED_FUNCS) | {"theta", "pi"}


def theta_expression(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile a restricted arithmetic expression of theta.

    Only numeric literals, + - * / ** and the whitelisted functions are
    allowed; anything else is rejected at parse time.
    """
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, ast.Name):
            if node.id not in _ALLOWED_NAMES:
                raise ValueError(f"name {node.id!r} not allowed in expression")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_FUNCS:
                raise ValueError("only whitelisted function calls are allowed")
        elif isinstance(node, ast.Attribute):
            raise ValueError("attribute access not allowed in expression")
    code = compile(tree, "<expression>", "eval")
    env = dict(_ALLOWED_FUNCS, pi=math.pi)

    def fn(theta: np.ndarray) -> np.ndarray:
        out = eval(code, {"__builtins__": {}}, dict(env, theta=theta))
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(theta)).copy()

    return fn


class ExponentsSpec(BaseModel):
    n: int = Field(default=2, ge=2)
    p: float = Field(default=2.0, ge=1.0)
    r: float = Field(default=2.0, gt=1.0)

    def to_exponents(self) -> SobolevExponents:
        return SobolevExponents(self.n, self.p, self.r)


class DomainSpec(BaseModel):
    kind: Literal["disk", "square", "star", "ball"] = "disk"
    radius: float = Field(default=1.0, gt=0, alias="R")
    side: float = Field(default=1.0, gt=0)
    rho: Optional[str] = None
    center: tuple[float, float] = (0.0, 0.0)
    samples: int = Field(default=2048, ge=64)
    dim: int = Field(default=2, ge=2)

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _star_needs_rho(self):
        if self.kind == "star" and not self.rho:
            raise ValueError("star domains need a rho expression")
        if self.rho is not None:
            theta_expression(self.rho)  # fail fast with a clear message
        return self

    def to_star(self) -> StarDomain2D:
        if self.kind == "disk":
            return StarDomain2D.disk(self.radius, self.center, self.samples)
        if self.kind == "square":
            return StarDomain2D.square(self.side, self.center, self.samples)
        if self.kind == "star":
            return StarDomain2D.from_function(
                theta_expression(self.rho), self.center, self.samples
            )
        raise ValueError(f"domain kind {self.kind!r} is not a planar star domain")

    def label(self) -> str:
        if self.kind == "disk":
            return f"disk_R{self.radius:g}"
        if self.kind == "square":
            return f"square_s{self.side:g}"
        if self.kind == "ball":
            return f"ball_n{self.dim}_R{self.radius:g}"
        return f"star[{self.rho}]"


class SpeedSpec(BaseModel):
    law: Literal["uniform", "weighted", "hele_shaw"] = "uniform"
    speed: float = Field(default=1.0, gt=0)
    w: Optional[str] = None
    pole: tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def _weighted_needs_w(self):
        if self.law == "weighted" and not self.w:
            raise ValueError("weighted law needs a w expression")
        if self.w is not None:
            theta_expression(self.w)
        return self


class PrimitiveSpec(BaseModel):
    type: Literal["translate", "rotate", "scale", "invert"]
    b: Optional[tuple[float, ...]] = None
    lam: Optional[float] = None
    axis: Optional[tuple[float, ...]] = None
    angle: Optional[float] = None

    @model_validator(mode="after")
    def _fields_for_type(self):
        if self.type == "translate" and self.b is None:
            raise ValueError("translate needs b")
        if self.type == "scale" and (self.lam is None or self.lam <= 0):
            raise ValueError("scale needs lam > 0")
        if self.type == "rotate" and (self.axis is None or self.angle is None):
            raise ValueError("rotate needs axis and angle")
        return self


class SolveRequest(BaseModel):
    domain: DomainSpec = DomainSpec()
    exponents: ExponentsSpec = ExponentsSpec()
    h: float = Field(default=0.02, gt=0)
    m: int = Field(default=4000, ge=100)
    method: Literal["auto", "fem", "radial"] = "auto"


class RearrangeRequest(BaseModel):
    domain: DomainSpec = DomainSpec()
    exponents: ExponentsSpec = ExponentsSpec()
    h: float = Field(default=0.02, gt=0)
    k: int = Field(default=400, ge=100)
    m: int = Field(default=4000, ge=100)


class CheckSpec(BaseModel):
    check: Literal["pp_general", "pp_pminus1", "two_dim_8pi", "pr_general"]
    q1: Optional[float] = None
    q2: Optional[float] = None
    q: Optional[float] = None
    tolerance: Optional[float] = None


class VerifyRequest(BaseModel):
    domain: DomainSpec = DomainSpec()
    exponents: ExponentsSpec = ExponentsSpec()
    h: float = Field(default=0.02, gt=0)
    m: int = Field(default=4000, ge=100)
    suite: Literal["all", "custom"] = "all"
    checks: list[CheckSpec] = []

    @model_validator(mode="after")
    def _custom_needs_checks(self):
        if self.suite == "custom" and not self.checks:
            raise ValueError("custom suite needs explicit checks")
        return self


class DerivativeRequest(BaseModel):
    domain: DomainSpec = DomainSpec()
    exponents: ExponentsSpec = ExponentsSpec()
    h: float = Field(default=0.02, gt=0)
    speed: SpeedSpec = SpeedSpec()
    delta: float = Field(default=1e-3, gt=0)
    tolerance: float = Field(default=0.03, gt=0)


class FlowRequest(BaseModel):
    domain: DomainSpec = DomainSpec()
    exponents: ExponentsSpec = ExponentsSpec()
    h: float = Field(default=0.03, gt=0)
    law: SpeedSpec = SpeedSpec()
    dt: float = Field(default=0.01, gt=0)
    steps: int = Field(default=5, ge=1)
    monitor: Literal["thm1", "thm2", "none"] = "thm2"
    tolerance: float = Field(default=0.02, gt=0)


class ConformalRequest(BaseModel):
    chain: list[PrimitiveSpec] = []
    exponents: ExponentsSpec = ExponentsSpec(n=3, p=2, r=2)
    t_min: float = Field(default=0.05, gt=0)
    t_max: float = Field(default=0.95, lt=1)
    t_count: int = Field(default=20, ge=3)
    m: int = Field(default=4000, ge=100)
    tolerance: float = Field(default=1e-6, gt=0)

    @field_validator("t_max")
    @classmethod
    def _order(cls, v, info):
        if "t_min" in info.data and v <= info.data["t_min"]:
            raise ValueError("t_max must exceed t_min")
        return v


class ResponseHeader(BaseModel):
    version: str
    timestamp: str
    command: str
    config: dict


class LabResponse(BaseModel):
    header: ResponseHeader
    body: dict

    @property
    def passed(self) -> bool:
        return bool(self.body.get("passed", True))


AnyRequest = (
    SolveRequest
    | RearrangeRequest
    | VerifyRequest
    | DerivativeRequest
    | FlowRequest
    | ConformalRequest
)


def jsonable(obj: Any):
    """Recursively convert numpy scalars/arrays for JSON round-tripping."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj
