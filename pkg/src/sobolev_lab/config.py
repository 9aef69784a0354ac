"""Run configuration: line-oriented key = value files plus flag overrides.

Files use bracketed section headers ([run], [domain], [exponents], [speed],
plus one optional section per command); flags always win over file values.
Validation errors name the offending key.
"""

from __future__ import annotations

import configparser
import os
from typing import Any

from pydantic import ValidationError

from .service.models import (
    ConformalRequest,
    DerivativeRequest,
    FlowRequest,
    PrimitiveSpec,
    RearrangeRequest,
    SolveRequest,
    VerifyRequest,
)

COMMANDS = ("solve", "rearrange", "verify", "derivative", "flow", "conformal")

_REQUEST_TYPES = {
    "solve": SolveRequest,
    "rearrange": RearrangeRequest,
    "verify": VerifyRequest,
    "derivative": DerivativeRequest,
    "flow": FlowRequest,
    "conformal": ConformalRequest,
}


class ConfigError(Exception):
    """Configuration problem, with the offending key in the message."""


def read_config_file(path: str) -> dict[str, dict[str, str]]:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return {s: dict(parser.items(s)) for s in parser.sections()}


def parse_chain(text: str) -> list[dict[str, Any]]:
    """Parse a chain like "translate:3,0,0; scale:2; invert"."""
    out: list[dict[str, Any]] = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            kind, args = part.split(":", 1)
            vals = [float(v) for v in args.split(",") if v.strip()]
        else:
            kind, vals = part, []
        kind = kind.strip()
        if kind == "translate":
            out.append({"type": "translate", "b": tuple(vals)})
        elif kind == "scale":
            if len(vals) != 1:
                raise ConfigError("scale takes one factor, e.g. scale:2")
            out.append({"type": "scale", "lam": vals[0]})
        elif kind == "rotate":
            if len(vals) != 4:
                raise ConfigError("rotate takes axis and angle, e.g. rotate:0,0,1,0.5")
            out.append({"type": "rotate", "axis": tuple(vals[:3]), "angle": vals[3]})
        elif kind == "invert":
            out.append({"type": "invert"})
        else:
            raise ConfigError(f"unknown chain primitive {kind!r}")
    return out


def _parse_pair(text: str, key: str) -> tuple[float, float]:
    vals = [float(v) for v in str(text).split(",")]
    if len(vals) != 2:
        raise ConfigError(f"{key} needs two comma-separated numbers")
    return (vals[0], vals[1])


def _set(d: dict, path: tuple[str, ...], value) -> None:
    for k in path[:-1]:
        d = d.setdefault(k, {})
    d[path[-1]] = value


# where each flat key lands in the request model
_KEY_MAP = {
    "domain": ("domain", "kind"),
    "kind": ("domain", "kind"),
    "radius": ("domain", "radius"),
    "side": ("domain", "side"),
    "rho": ("domain", "rho"),
    "center": ("domain", "center"),
    "samples": ("domain", "samples"),
    "dim": ("domain", "dim"),
    "n": ("exponents", "n"),
    "p": ("exponents", "p"),
    "r": ("exponents", "r"),
    "h": ("h",),
    "m": ("m",),
    "method": ("method",),
    "k": ("k",),
    "suite": ("suite",),
    "law": ("law", "law"),
    "speed": ("law", "speed"),
    "w": ("law", "w"),
    "pole": ("law", "pole"),
    "delta": ("delta",),
    "dt": ("dt",),
    "steps": ("steps",),
    "monitor": ("monitor",),
    "tolerance": ("tolerance",),
    "chain": ("chain",),
    "t_min": ("t_min",),
    "t_max": ("t_max",),
    "t_count": ("t_count",),
}

# the derivative command calls its speed block "speed", flows call it "law"
_SPEED_FIELD = {"derivative": "speed", "flow": "law"}


def build_request(command: str, file_cfg: dict[str, dict[str, str]], flags: dict[str, Any]):
    """Merge file sections and flag values into the command's request model."""
    if command not in _REQUEST_TYPES:
        raise ConfigError(f"unknown command {command!r}")
    flat: dict[str, Any] = {}
    for section, items in file_cfg.items():
        for key, value in items.items():
            if section in ("run", command, "domain", "exponents", "speed", "flow",
                           "verify", "conformal", "derivative", "solve", "rearrange"):
                flat.setdefault(key, value)
    # flags override file values
    for key, value in flags.items():
        if value is not None:
            flat[key] = value

    nested: dict[str, Any] = {}
    speed_field = _SPEED_FIELD.get(command, "law")
    for key, value in flat.items():
        if key in ("command", "out", "server", "threads"):
            continue
        if key not in _KEY_MAP:
            raise ConfigError(f"unknown configuration key {key!r}")
        path = _KEY_MAP[key]
        if path[0] == "law":
            path = (speed_field,) + path[1:]
        if key == "center" or key == "pole":
            value = _parse_pair(value, key) if isinstance(value, str) else tuple(value)
        if key == "chain" and isinstance(value, str):
            value = parse_chain(value)
        _set(nested, path, value)

    try:
        return _REQUEST_TYPES[command](**nested)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(x) for x in first["loc"])
        raise ConfigError(f"invalid value for {loc}: {first['msg']}") from exc
