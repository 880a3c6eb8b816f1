"""Interval-valued feasible maps with guarded pieces.

A MultifunctionSpec selects, per parameter point, the first piece whose
guard holds and yields the interval [lower, upper] (half-open per flags).
Wrappers provide the finiteness filter used by the constrained-problem
transform; membership is exact with respect to the arithmetic mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyNotAllowed, NoGuardMatched, ValidationError
from .exact import ExactScalar
from .extreal import ExtReal, POS_INF, NEG_INF
from .expr import (
    Const,
    Expr,
    Predicate,
    TrueP,
    eval_expr,
    eval_expr_vec,
    expr_from_json,
    pred_from_json,
)


@dataclass(frozen=True)
class Interval:
    """[lo, hi] with optional open ends; lo/hi are ExtReal."""

    lo: ExtReal
    hi: ExtReal
    closed_lo: bool = True
    closed_hi: bool = True

    @classmethod
    def of(cls, lo, hi, closed_lo=True, closed_hi=True) -> "Interval":
        return cls(ExtReal(lo), ExtReal(hi), closed_lo, closed_hi)

    @property
    def is_empty(self) -> bool:
        if self.hi < self.lo:
            return True
        if self.lo == self.hi:
            return not (self.closed_lo and self.closed_hi)
        return False

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi and self.closed_lo and self.closed_hi

    def contains(self, v) -> bool:
        v = v if isinstance(v, ExtReal) else ExtReal(v)
        if v < self.lo or (v == self.lo and not self.closed_lo):
            return False
        if self.hi < v or (v == self.hi and not self.closed_hi):
            return False
        return True

    def mask_vec(self, ys: np.ndarray) -> np.ndarray:
        lo = float(self.lo)
        hi = float(self.hi)
        low = ys >= lo if self.closed_lo else ys > lo
        high = ys <= hi if self.closed_hi else ys < hi
        return low & high

    def finite_endpoints(self) -> list:
        out = []
        if self.lo.is_finite and self.closed_lo:
            out.append(self.lo.finite)
        if self.hi.is_finite and self.closed_hi:
            out.append(self.hi.finite)
        return out


EMPTY_INTERVAL = Interval(ExtReal(1), ExtReal(0))


@dataclass(frozen=True)
class PhiPiece:
    guard: Predicate
    lower: Expr
    upper: Expr
    closed_lower: bool = True
    closed_upper: bool = True


class FeasibleMap:
    """Interface shared by interval specs and their computed wrappers."""

    def interval_at_env(self, env: dict, mode: str) -> Optional[Interval]:
        raise NotImplementedError

    def contains(self, env: dict, y, mode: str) -> bool:
        raise NotImplementedError

    def mask_vec(self, env: dict, ys: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def endpoints(self, env: dict, mode: str) -> list:
        iv = self.interval_at_env(env, mode)
        return iv.finite_endpoints() if iv is not None else []


@dataclass(frozen=True)
class MultifunctionSpec(FeasibleMap):
    pieces: Tuple[PhiPiece, ...]
    empty_allowed: bool = False

    def interval_at_env(self, env: dict, mode: str) -> Interval:
        for piece in self.pieces:
            if not piece.guard.holds(env, mode):
                continue
            lo = eval_expr(piece.lower, env, mode)
            hi = eval_expr(piece.upper, env, mode)
            iv = Interval(lo, hi, piece.closed_lower, piece.closed_upper)
            if iv.is_empty and not self.empty_allowed:
                raise EmptyNotAllowed(
                    f"feasible set empty at {env} with empty_allowed=False"
                )
            return iv
        raise NoGuardMatched(f"no feasibility piece matched {env}")

    def contains(self, env: dict, y, mode: str) -> bool:
        iv = self.interval_at_env(env, mode)
        return iv.contains(ExtReal(y))

    def mask_vec(self, env: dict, ys: np.ndarray) -> np.ndarray:
        iv = self.interval_at_env(env, "float")
        if iv.is_empty:
            return np.zeros(ys.shape, dtype=bool)
        return iv.mask_vec(ys)

    def to_json(self):
        return {
            "pieces": [
                {
                    "guard": p.guard.to_json(),
                    "lower": p.lower.to_json(),
                    "upper": p.upper.to_json(),
                    "closed_lower": p.closed_lower,
                    "closed_upper": p.closed_upper,
                }
                for p in self.pieces
            ],
            "empty_allowed": self.empty_allowed,
        }


def constant_map(lo, hi, closed_lo=True, closed_hi=True) -> MultifunctionSpec:
    return MultifunctionSpec(
        (PhiPiece(TrueP(), Const(lo), Const(hi), closed_lo, closed_hi),)
    )


def phi_from_json(d) -> MultifunctionSpec:
    pieces = []
    for raw in d.get("pieces", []):
        pieces.append(
            PhiPiece(
                guard=pred_from_json(raw.get("guard", {"pred": "true"})),
                lower=expr_from_json(raw["lower"]),
                upper=expr_from_json(raw["upper"]),
                closed_lower=raw.get("closed_lower", True),
                closed_upper=raw.get("closed_upper", True),
            )
        )
    if not pieces:
        raise ValidationError("feasible map needs at least one piece")
    return MultifunctionSpec(tuple(pieces), d.get("empty_allowed", False))


class MemberOf(Predicate):
    """Predicate y ∈ Φ(x); lets indicator/piecewise objectives reference
    feasibility directly (used by the full-space relaxation transform)."""

    def __init__(self, phi: FeasibleMap):
        self.phi = phi

    def holds(self, env, mode):
        return self.phi.contains(env, env["y"], mode)

    def holds_vec(self, env):
        ys = np.asarray(env["y"], dtype=np.float64)
        scalar_env = {k: v for k, v in env.items() if k != "y"}
        mask = self.phi.mask_vec(scalar_env, np.atleast_1d(ys))
        return mask.reshape(np.shape(ys)) if np.shape(ys) else mask[0]

    def to_json(self):
        raise ValidationError("membership predicates are not serializable")

    def __eq__(self, other):
        return isinstance(other, MemberOf) and other.phi == self.phi

    def __hash__(self):
        return hash(("member-of", id(self.phi)))


@dataclass(frozen=True)
class FinitenessFilter(FeasibleMap):
    """Φ̂(x) = {y ∈ Φ(x) : u(x,y) < +∞} — the feasibility map of the
    constrained problem induced by an extended-real objective."""

    base: FeasibleMap
    u: Expr

    def interval_at_env(self, env, mode):
        # not interval-valued in general
        return None

    def base_interval(self, env, mode):
        return self.base.interval_at_env(env, mode)

    def contains(self, env, y, mode):
        if not self.base.contains(env, y, mode):
            return False
        v = eval_expr(self.u, {**env, "y": y}, mode)
        return not v.is_pos_inf

    def mask_vec(self, env, ys):
        base = self.base.mask_vec(env, ys)
        with np.errstate(all="ignore"):
            vals = eval_expr_vec(self.u, {**env, "y": ys})
        return base & np.isfinite(vals)

    def endpoints(self, env, mode):
        # endpoints of the underlying interval, filtered by finiteness
        return [
            e
            for e in self.base.endpoints(env, mode)
            if not eval_expr(self.u, {**env, "y": e}, mode).is_pos_inf
        ]
