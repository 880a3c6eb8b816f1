"""Exact arithmetic in the field Q(sqrt(2)).

An ExactScalar is a + b*sqrt(2) with rational a, b.  Equality, ordering,
and the rationality test are exact: a + b*sqrt(2) is rational iff b == 0,
and the sign of a difference is decided by rationalization, never by a
floating tolerance.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

from .errors import ExactModeUnsupported

_SQRT2 = math.sqrt(2.0)

RationalLike = Union[int, Fraction]


def _sign2(a, b) -> int:
    """Sign of a + b*sqrt(2) with rational a, b, by rationalization."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with 2 b^2
    aa, bb2 = a * a, 2 * b * b
    if aa > bb2:
        return 1 if a > 0 else -1
    if aa < bb2:
        return 1 if b > 0 else -1
    return 0  # unreachable: a^2 = 2 b^2 with a,b rational forces a=b=0


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"not a rational: {v!r}")


@total_ordering
class ExactScalar:
    """a + b*sqrt(2) with Fraction coefficients."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        object.__setattr__(self, "a", _as_fraction(a))
        object.__setattr__(self, "b", _as_fraction(b))

    def __setattr__(self, *_):
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def of(cls, v) -> "ExactScalar":
        if isinstance(v, ExactScalar):
            return v
        return cls(_as_fraction(v))

    def is_rational(self) -> bool:
        return self.b == 0

    # sign of a + b*sqrt(2), exactly
    def sign(self) -> int:
        return _sign2(self.a, self.b)

    def __neg__(self):
        return ExactScalar(-self.a, -self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        other = ExactScalar.of(other)
        return ExactScalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-ExactScalar.of(other))

    def __rsub__(self, other):
        return ExactScalar.of(other) - self

    def __mul__(self, other):
        other = ExactScalar.of(other)
        # (a1 + b1 r)(a2 + b2 r) = a1 a2 + 2 b1 b2 + (a1 b2 + a2 b1) r
        return ExactScalar(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + other.a * self.b,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "ExactScalar":
        a, b = self.a, self.b
        den = a * a - 2 * b * b
        if den == 0:
            raise ZeroDivisionError("reciprocal of zero ExactScalar")
        return ExactScalar(a / den, -b / den)

    def __truediv__(self, other):
        return self * ExactScalar.of(other).reciprocal()

    def __rtruediv__(self, other):
        return ExactScalar.of(other) * self.reciprocal()

    def _diff_sign(self, other) -> int:
        if isinstance(other, float):
            # float comparisons are approximate by nature; used only for
            # cross-checks, never inside exact-mode computations
            mine = float(self)
            return (mine > other) - (mine < other)
        if isinstance(other, ExactScalar):
            return _sign2(self.a - other.a, self.b - other.b)
        return _sign2(self.a - other, self.b)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ExactScalar, float)):
            return self._diff_sign(other) == 0
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (int, Fraction, ExactScalar, float)):
            return self._diff_sign(other) < 0
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    def __repr__(self):
        if self.b == 0:
            return f"ExactScalar({self.a})"
        return f"ExactScalar({self.a} + {self.b}*sqrt2)"


SQRT2 = ExactScalar(0, 1)


def exact_mul(x: ExactScalar, y: ExactScalar) -> ExactScalar:
    """Product restricted per the expression-validation rule: at most one
    factor may carry an irrational part."""
    if x.b != 0 and y.b != 0:
        raise ExactModeUnsupported(
            "product of two sqrt(2)-bearing values is rejected in exact mode"
        )
    return x * y
