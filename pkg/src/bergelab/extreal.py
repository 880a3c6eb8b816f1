"""Extended real numbers with total order and explicit indeterminate forms.

The finite payload may be an int, float, Fraction, or ExactScalar; mixed
payloads compare through their natural coercions.  inf + (-inf) raises
IndeterminateForm instead of silently producing a NaN.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

from .errors import IndeterminateForm, ValidationError
from .exact import ExactScalar

_POS = 1
_FIN = 0
_NEG = -1


@total_ordering
class ExtReal:
    """A point of the extended real line R union {-inf, +inf}."""

    __slots__ = ("_kind", "_value")

    def __init__(self, value):
        if isinstance(value, ExtReal):
            self._kind = value._kind
            self._value = value._value
            return
        if isinstance(value, float):
            if math.isnan(value):
                raise ValidationError("NaN is not an extended real")
            if math.isinf(value):
                self._kind = _POS if value > 0 else _NEG
                self._value = None
                return
        self._kind = _FIN
        self._value = value

    @classmethod
    def pos_inf(cls) -> "ExtReal":
        out = cls.__new__(cls)
        out._kind = _POS
        out._value = None
        return out

    @classmethod
    def neg_inf(cls) -> "ExtReal":
        out = cls.__new__(cls)
        out._kind = _NEG
        out._value = None
        return out

    @property
    def is_finite(self) -> bool:
        return self._kind == _FIN

    @property
    def is_pos_inf(self) -> bool:
        return self._kind == _POS

    @property
    def is_neg_inf(self) -> bool:
        return self._kind == _NEG

    @property
    def finite(self):
        """The finite payload; raises if infinite."""
        if self._kind != _FIN:
            raise ValidationError("infinite ExtReal has no finite payload")
        return self._value

    def __float__(self) -> float:
        if self._kind == _POS:
            return math.inf
        if self._kind == _NEG:
            return -math.inf
        return float(self._value)

    def __neg__(self) -> "ExtReal":
        if self._kind == _POS:
            return ExtReal.neg_inf()
        if self._kind == _NEG:
            return ExtReal.pos_inf()
        return ExtReal(-self._value)

    def __add__(self, other) -> "ExtReal":
        other = _coerce(other)
        if self._kind == _FIN and other._kind == _FIN:
            return ExtReal(self._value + other._value)
        if {self._kind, other._kind} == {_POS, _NEG}:
            raise IndeterminateForm("(+inf) + (-inf) is undefined")
        kind = self._kind if self._kind != _FIN else other._kind
        return ExtReal.pos_inf() if kind == _POS else ExtReal.neg_inf()

    __radd__ = __add__

    def __sub__(self, other) -> "ExtReal":
        return self + (-_coerce(other))

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if self._kind != other._kind:
            return False
        if self._kind != _FIN:
            return True
        return _cmp_payload(self._value, other._value) == 0

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if self._kind != other._kind:
            return self._kind < other._kind
        if self._kind != _FIN:
            return False
        return _cmp_payload(self._value, other._value) < 0

    def __hash__(self):
        if self._kind != _FIN:
            return hash(("extreal", self._kind))
        return hash(self._value)

    def __repr__(self):
        if self._kind == _POS:
            return "ExtReal(+inf)"
        if self._kind == _NEG:
            return "ExtReal(-inf)"
        return f"ExtReal({self._value!r})"

    def __str__(self):
        if self._kind == _POS:
            return "+inf"
        if self._kind == _NEG:
            return "-inf"
        return str(self._value)


POS_INF = ExtReal.pos_inf()
NEG_INF = ExtReal.neg_inf()

Scalarish = Union[int, float, Fraction, ExtReal]


def _coerce(v) -> ExtReal:
    return v if isinstance(v, ExtReal) else ExtReal(v)


def _cmp_payload(a, b) -> int:
    # ExactScalar implements exact ordering against Fraction/int itself
    # (one rationalization decides eq and lt together); floats fall back
    # to native comparison.
    if isinstance(a, ExactScalar):
        return a._diff_sign(b)
    if isinstance(b, ExactScalar):
        return -b._diff_sign(a)
    if a == b:
        return 0
    return -1 if a < b else 1


def ext_add(a, b) -> ExtReal:
    """Extended-real sum; raises IndeterminateForm on opposite infinities."""
    return _coerce(a) + _coerce(b)


def ext_min(values: Iterable) -> ExtReal:
    """Minimum of a sequence of extended reals; +inf for an empty sequence
    (the inf-of-empty-set convention)."""
    best = None
    for v in values:
        v = _coerce(v)
        if best is None or v < best:
            best = v
    return POS_INF if best is None else best


def ext_max(values: Iterable) -> ExtReal:
    """Maximum of a sequence of extended reals; -inf for an empty sequence."""
    best = None
    for v in values:
        v = _coerce(v)
        if best is None or best < v:
            best = v
    return NEG_INF if best is None else best
