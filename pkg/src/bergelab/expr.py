"""Expression trees for objectives and guards.

Scalar evaluation returns ExtReal and works in both arithmetic modes
(float, exact).  Vector evaluation (float mode only) maps numpy arrays
through the same tree for bulk sampling.  Trees round-trip through a
small JSON schema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from .errors import (
    EvaluationError,
    ExactModeUnsupported,
    IndeterminateForm,
    UnboundVariable,
    ValidationError,
)
from .exact import ExactScalar, exact_mul
from .extreal import NEG_INF, POS_INF, ExtReal

VAR_NAMES = ("x", "y", "a", "b")


# ---------------------------------------------------------------------------
# scalar arithmetic on ExtReal payloads


def _ext_mul(u: ExtReal, v: ExtReal, mode: str) -> ExtReal:
    if u.is_finite and v.is_finite:
        if mode == "exact":
            return ExtReal(exact_mul(ExactScalar.of(u.finite), ExactScalar.of(v.finite)))
        return ExtReal(u.finite * v.finite)
    for inf, fin in ((u, v), (v, u)):
        if not inf.is_finite and fin.is_finite:
            if fin == ExtReal(0):
                raise IndeterminateForm("0 * inf is undefined")
            neg = (fin < ExtReal(0)) != inf.is_neg_inf
            return NEG_INF if neg else POS_INF
    # both infinite
    neg = u.is_neg_inf != v.is_neg_inf
    return NEG_INF if neg else POS_INF


def _ext_div(u: ExtReal, v: ExtReal, mode: str) -> ExtReal:
    if not u.is_finite and not v.is_finite:
        raise IndeterminateForm("inf / inf is undefined")
    if not v.is_finite:
        return ExtReal(Fraction(0) if mode == "exact" else 0.0)
    if v == ExtReal(0):
        raise EvaluationError("division by zero")
    if not u.is_finite:
        neg = (v < ExtReal(0)) != u.is_neg_inf
        return NEG_INF if neg else POS_INF
    if mode == "exact":
        return ExtReal(ExactScalar.of(u.finite) / ExactScalar.of(v.finite))
    return ExtReal(u.finite / v.finite)


# ---------------------------------------------------------------------------
# predicate nodes


class Predicate:
    def holds(self, env: Dict, mode: str) -> bool:
        raise NotImplementedError

    def holds_vec(self, env: Dict) -> np.ndarray:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class TrueP(Predicate):
    def holds(self, env, mode):
        return True

    def holds_vec(self, env):
        return np.broadcast_to(True, _vec_shape(env)).copy()

    def to_json(self):
        return {"pred": "true"}


@dataclass(frozen=True)
class Cmp(Predicate):
    op: str  # lt | le | eq
    lhs: "Expr"
    rhs: "Expr"

    def holds(self, env, mode):
        u = eval_expr(self.lhs, env, mode)
        v = eval_expr(self.rhs, env, mode)
        if self.op == "lt":
            return u < v
        if self.op == "le":
            return u <= v
        return u == v

    def holds_vec(self, env):
        u = eval_expr_vec(self.lhs, env)
        v = eval_expr_vec(self.rhs, env)
        if self.op == "lt":
            return u < v
        if self.op == "le":
            return u <= v
        return u == v

    def to_json(self):
        return {"pred": self.op, "args": [self.lhs.to_json(), self.rhs.to_json()]}


@dataclass(frozen=True)
class IsRational(Predicate):
    arg: "Expr"

    def holds(self, env, mode):
        if mode != "exact":
            raise ExactModeUnsupported("rationality test requires exact mode")
        v = eval_expr(self.arg, env, mode)
        if not v.is_finite:
            return False
        return ExactScalar.of(v.finite).is_rational()

    def holds_vec(self, env):
        raise ExactModeUnsupported("rationality test requires exact mode")

    def to_json(self):
        return {"pred": "is_rational", "arg": self.arg.to_json()}


@dataclass(frozen=True)
class And(Predicate):
    args: Tuple[Predicate, ...]

    def holds(self, env, mode):
        return all(p.holds(env, mode) for p in self.args)

    def holds_vec(self, env):
        out = np.broadcast_to(True, _vec_shape(env)).copy()
        for p in self.args:
            out = out & p.holds_vec(env)
        return out

    def to_json(self):
        return {"pred": "and", "args": [p.to_json() for p in self.args]}


@dataclass(frozen=True)
class Or(Predicate):
    args: Tuple[Predicate, ...]

    def holds(self, env, mode):
        return any(p.holds(env, mode) for p in self.args)

    def holds_vec(self, env):
        out = np.broadcast_to(False, _vec_shape(env)).copy()
        for p in self.args:
            out = out | p.holds_vec(env)
        return out

    def to_json(self):
        return {"pred": "or", "args": [p.to_json() for p in self.args]}


@dataclass(frozen=True)
class Not(Predicate):
    arg: Predicate

    def holds(self, env, mode):
        return not self.arg.holds(env, mode)

    def holds_vec(self, env):
        return ~self.arg.holds_vec(env)

    def to_json(self):
        return {"pred": "not", "arg": self.arg.to_json()}


# ---------------------------------------------------------------------------
# expression nodes


class Expr:
    def to_json(self):
        raise NotImplementedError

    def free_vars(self) -> set:
        return set()


@dataclass(frozen=True)
class Const(Expr):
    value: object  # int | float | Fraction | ExactScalar | ExtReal

    def to_json(self):
        v = self.value
        if isinstance(v, ExtReal):
            if v.is_pos_inf:
                return {"const": "+inf"}
            if v.is_neg_inf:
                return {"const": "-inf"}
            v = v.finite
        if isinstance(v, ExactScalar):
            if v.b == 0:
                return {"const": str(v.a)}
            return {"const": {"q": str(v.a), "r": str(v.b)}}
        if isinstance(v, Fraction):
            return {"const": str(v)}
        if isinstance(v, float) and math.isinf(v):
            return {"const": "+inf" if v > 0 else "-inf"}
        return {"const": v}


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VAR_NAMES:
            raise ValidationError(f"unknown variable {self.name!r}")

    def to_json(self):
        return {"var": self.name}

    def free_vars(self):
        return {self.name}


@dataclass(frozen=True)
class OpNode(Expr):
    op: str  # add | sub | mul | div | neg | abs | max | min
    args: Tuple[Expr, ...]

    def __post_init__(self):
        unary = {"neg", "abs"}
        if self.op in unary and len(self.args) != 1:
            raise ValidationError(f"{self.op} takes one argument")
        if self.op in {"add", "sub", "mul", "div"} and len(self.args) != 2:
            raise ValidationError(f"{self.op} takes two arguments")
        if self.op in {"max", "min"} and not self.args:
            raise ValidationError(f"{self.op} needs at least one argument")

    def to_json(self):
        return {"op": self.op, "args": [e.to_json() for e in self.args]}

    def free_vars(self):
        out = set()
        for e in self.args:
            out |= e.free_vars()
        return out


@dataclass(frozen=True)
class Indicator(Expr):
    pred: Predicate

    def to_json(self):
        return {"indicator": self.pred.to_json()}

    def free_vars(self):
        return _pred_free_vars(self.pred)


@dataclass(frozen=True)
class Piecewise(Expr):
    pieces: Tuple[Tuple[Predicate, Expr], ...]
    default: Expr

    def to_json(self):
        return {
            "piecewise": {
                "pieces": [[p.to_json(), e.to_json()] for p, e in self.pieces],
                "default": self.default.to_json(),
            }
        }

    def free_vars(self):
        out = self.default.free_vars()
        for p, e in self.pieces:
            out |= _pred_free_vars(p) | e.free_vars()
        return out


def _pred_free_vars(p: Predicate) -> set:
    if isinstance(p, Cmp):
        return p.lhs.free_vars() | p.rhs.free_vars()
    if isinstance(p, IsRational):
        return p.arg.free_vars()
    if isinstance(p, (And, Or)):
        out = set()
        for q in p.args:
            out |= _pred_free_vars(q)
        return out
    if isinstance(p, Not):
        return _pred_free_vars(p.arg)
    return set()


# convenience constructors, used heavily by fixtures and tests
def const(v) -> Const:
    return Const(v)


def var(name) -> Var:
    return Var(name)


def add(a, b) -> OpNode:
    return OpNode("add", (a, b))


def sub(a, b) -> OpNode:
    return OpNode("sub", (a, b))


def mul(a, b) -> OpNode:
    return OpNode("mul", (a, b))


def div(a, b) -> OpNode:
    return OpNode("div", (a, b))


def neg(a) -> OpNode:
    return OpNode("neg", (a,))


def abs_(a) -> OpNode:
    return OpNode("abs", (a,))


def max_(*args) -> OpNode:
    return OpNode("max", tuple(args))


def min_(*args) -> OpNode:
    return OpNode("min", tuple(args))


def lt(a, b) -> Cmp:
    return Cmp("lt", a, b)


def le(a, b) -> Cmp:
    return Cmp("le", a, b)


def eq(a, b) -> Cmp:
    return Cmp("eq", a, b)


# ---------------------------------------------------------------------------
# scalar evaluation


def _coerce_const(v, mode: str) -> ExtReal:
    if isinstance(v, ExtReal):
        return v
    if mode == "exact":
        if isinstance(v, float):
            if math.isinf(v):
                return POS_INF if v > 0 else NEG_INF
            raise ExactModeUnsupported(f"float constant {v} in exact mode")
        if isinstance(v, (int, Fraction)):
            return ExtReal(ExactScalar.of(v))
        if isinstance(v, ExactScalar):
            return ExtReal(v)
        raise ExactModeUnsupported(f"constant {v!r} in exact mode")
    if isinstance(v, (ExactScalar, Fraction)):
        return ExtReal(float(v))
    return ExtReal(float(v))


def eval_expr(e: Expr, env: Dict, mode: str = "float") -> ExtReal:
    """Evaluate e at env.  env maps names in {x,y,a,b} to scalars; exact
    mode expects Fraction/int/ExactScalar bindings.  Piecewise branches
    are evaluated lazily, so guards protect partial expressions."""
    if isinstance(e, Const):
        return _coerce_const(e.value, mode)
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariable(f"variable {e.name!r} not bound")
        return _coerce_const(env[e.name], mode)
    if isinstance(e, Indicator):
        one = Fraction(1) if mode == "exact" else 1.0
        zero = Fraction(0) if mode == "exact" else 0.0
        return _coerce_const(one if e.pred.holds(env, mode) else zero, mode)
    if isinstance(e, Piecewise):
        for p, branch in e.pieces:
            if p.holds(env, mode):
                return eval_expr(branch, env, mode)
        return eval_expr(e.default, env, mode)
    if isinstance(e, OpNode):
        vals = [eval_expr(a, env, mode) for a in e.args]
        if e.op == "add":
            return vals[0] + vals[1]
        if e.op == "sub":
            return vals[0] - vals[1]
        if e.op == "mul":
            return _ext_mul(vals[0], vals[1], mode)
        if e.op == "div":
            return _ext_div(vals[0], vals[1], mode)
        if e.op == "neg":
            return -vals[0]
        if e.op == "abs":
            v = vals[0]
            return -v if v < ExtReal(0) else v
        if e.op == "max":
            out = vals[0]
            for v in vals[1:]:
                if out < v:
                    out = v
            return out
        if e.op == "min":
            out = vals[0]
            for v in vals[1:]:
                if v < out:
                    out = v
            return out
    raise EvaluationError(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# vector evaluation (float mode)


def _vec_shape(env: Dict):
    shape = ()
    for v in env.values():
        if isinstance(v, np.ndarray):
            shape = np.broadcast_shapes(shape, v.shape)
    return shape


def eval_expr_vec(e: Expr, env: Dict) -> np.ndarray:
    """Float-mode bulk evaluation over numpy arrays (broadcasting env).
    All piecewise branches are computed eagerly under suppressed numpy
    warnings and combined with np.select; out-of-branch NaN/inf values
    are masked away by the guards."""
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, ExtReal):
            v = float(v)
        elif isinstance(v, (Fraction, ExactScalar)):
            v = float(v)
        return np.broadcast_to(np.float64(v), _vec_shape(env)).copy()
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariable(f"variable {e.name!r} not bound")
        return np.broadcast_to(np.asarray(env[e.name], dtype=np.float64), _vec_shape(env)).copy()
    if isinstance(e, Indicator):
        return e.pred.holds_vec(env).astype(np.float64)
    if isinstance(e, Piecewise):
        with np.errstate(all="ignore"):
            conds = [p.holds_vec(env) for p, _ in e.pieces]
            vals = [eval_expr_vec(branch, env) for _, branch in e.pieces]
            default = eval_expr_vec(e.default, env)
        return np.select(conds, vals, default=default)
    if isinstance(e, OpNode):
        with np.errstate(all="ignore"):
            vals = [eval_expr_vec(a, env) for a in e.args]
            if e.op == "add":
                return vals[0] + vals[1]
            if e.op == "sub":
                return vals[0] - vals[1]
            if e.op == "mul":
                return vals[0] * vals[1]
            if e.op == "div":
                return vals[0] / vals[1]
            if e.op == "neg":
                return -vals[0]
            if e.op == "abs":
                return np.abs(vals[0])
            if e.op == "max":
                return np.maximum.reduce(vals)
            if e.op == "min":
                return np.minimum.reduce(vals)
    raise EvaluationError(f"unknown expression node {e!r}")


# ---------------------------------------------------------------------------
# JSON serde


def _parse_scalar(s):
    if isinstance(s, str):
        if s == "+inf":
            return POS_INF
        if s == "-inf":
            return NEG_INF
        return Fraction(s)
    if isinstance(s, bool):
        raise ValidationError("boolean is not a scalar")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        return s
    if isinstance(s, dict) and set(s) <= {"q", "r"}:
        return ExactScalar(Fraction(str(s.get("q", 0))), Fraction(str(s.get("r", 0))))
    raise ValidationError(f"bad constant {s!r}")


def expr_from_json(d) -> Expr:
    if not isinstance(d, dict):
        raise ValidationError(f"expression must be an object, got {d!r}")
    if "const" in d:
        return Const(_parse_scalar(d["const"]))
    if "var" in d:
        return Var(d["var"])
    if "indicator" in d:
        return Indicator(pred_from_json(d["indicator"]))
    if "piecewise" in d:
        body = d["piecewise"]
        pieces = tuple(
            (pred_from_json(p), expr_from_json(e)) for p, e in body.get("pieces", [])
        )
        return Piecewise(pieces, expr_from_json(body["default"]))
    if "op" in d:
        return OpNode(d["op"], tuple(expr_from_json(a) for a in d["args"]))
    raise ValidationError(f"unrecognized expression node {d!r}")


def pred_from_json(d) -> Predicate:
    if not isinstance(d, dict) or "pred" not in d:
        raise ValidationError(f"predicate must be an object with 'pred', got {d!r}")
    kind = d["pred"]
    if kind == "true":
        return TrueP()
    if kind in ("lt", "le", "eq"):
        a, b = d["args"]
        return Cmp(kind, expr_from_json(a), expr_from_json(b))
    if kind == "is_rational":
        return IsRational(expr_from_json(d["arg"]))
    if kind == "and":
        return And(tuple(pred_from_json(p) for p in d["args"]))
    if kind == "or":
        return Or(tuple(pred_from_json(p) for p in d["args"]))
    if kind == "not":
        return Not(pred_from_json(d["arg"]))
    raise ValidationError(f"unrecognized predicate {d!r}")
