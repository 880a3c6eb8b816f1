"""Problem files: JSON schema for problems, intervals, grids, and hints.

Scalars accept JSON numbers, rational strings ("1/2", "+inf"), and
{"q": rational, "r": rational} for q + r*sqrt(2).  Float-mode problems
coerce rational scalars to floats at load time so downstream mode
detection stays unambiguous.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, ValidationError
from .exact import ExactScalar
from .expr import _parse_scalar, expr_from_json
from .extreal import ExtReal
from .grid import Grid1D
from .multifunction import Interval, phi_from_json
from .problem import ProblemSpec


def parse_scalar(raw, mode: str = "exact"):
    """One scalar from its JSON form, coerced to the arithmetic mode."""
    v = _parse_scalar(raw)
    if isinstance(v, ExtReal):
        return v
    if mode == "float":
        return float(v)
    if isinstance(v, float):
        raise ConfigError(f"float scalar {v!r} is not allowed in exact mode")
    return v


def interval_from_json(d, mode: str) -> Interval:
    try:
        lo = parse_scalar(d["lo"], mode)
        hi = parse_scalar(d["hi"], mode)
    except KeyError as exc:
        raise ConfigError(f"interval needs lo/hi, got {d!r}") from exc
    lo = lo if isinstance(lo, ExtReal) else ExtReal(lo)
    hi = hi if isinstance(hi, ExtReal) else ExtReal(hi)
    return Interval(lo, hi, d.get("closed_lo", True), d.get("closed_hi", True))


def grid_from_json(d, mode: str) -> Grid1D:
    try:
        return Grid1D(
            parse_scalar(d["lo"], mode),
            parse_scalar(d["hi"], mode),
            parse_scalar(d["step"], mode),
        )
    except KeyError as exc:
        raise ConfigError(f"grid needs lo/hi/step, got {d!r}") from exc


def _reciprocal_hint(x):
    # mode-agnostic: 1/x keeps the arithmetic type of x
    return [1 / x] if x > 0 else []


def hints_from_json(raw_list, mode: str) -> tuple:
    """Sample-hint list: scalars, {"reciprocal": true} for y = 1/x, or
    {"sqrt2_halvings": {"scale": q, "count": n}} for r*sqrt(2)*2^-k."""
    out = []
    for raw in raw_list:
        if isinstance(raw, dict) and raw.get("reciprocal"):
            out.append(_reciprocal_hint)
        elif isinstance(raw, dict) and "sqrt2_halvings" in raw:
            if mode != "exact":
                raise ConfigError("sqrt(2) hints require exact mode")
            body = raw["sqrt2_halvings"]
            scale = Fraction(str(body["scale"]))
            out.extend(
                ExactScalar(0, scale / 2**k) for k in range(int(body["count"]))
            )
        else:
            out.append(parse_scalar(raw, mode))
    return tuple(out)


def problem_from_json(d) -> ProblemSpec:
    mode = d.get("mode", "float")
    if mode not in ("float", "exact"):
        raise ConfigError(f"unknown arithmetic mode {mode!r}")
    try:
        u = expr_from_json(d["u"])
        phi = phi_from_json(d["phi"])
        x_domain = interval_from_json(d["x_domain"], mode)
        y_domain = interval_from_json(d["y_domain"], mode)
    except KeyError as exc:
        raise ConfigError(f"problem file missing field: {exc}") from exc
    extra = u.free_vars() - {"x", "y"}
    if extra:
        raise ValidationError(f"objective binds unknown variables {sorted(extra)}")
    return ProblemSpec(
        x_domain=x_domain,
        y_domain=y_domain,
        phi=phi,
        u=u,
        mode=mode,
        sample_hints=hints_from_json(d.get("sample_hints", []), mode),
        y_truncated=d.get("y_truncated", False),
    )


def load_problem(path) -> ProblemSpec:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))
