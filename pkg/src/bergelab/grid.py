"""Uniform 1-D grids over real or exact-rational intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .errors import ValidationError
from .exact import ExactScalar


def _as_rational(v) -> Optional[Fraction]:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, ExactScalar) and v.is_rational():
        return v.a
    return None


@dataclass(frozen=True)
class Grid1D:
    """Arithmetic sequence lo, lo+step, ... with last point <= hi and
    hi - last < step.  Rational endpoints/step give exact Fraction points;
    otherwise float points."""

    lo: object
    hi: object
    step: object

    def __post_init__(self):
        if not (self.step > 0):
            raise ValidationError(f"grid step must be positive, got {self.step}")
        if self.lo > self.hi:
            raise ValidationError(f"grid needs lo <= hi, got [{self.lo}, {self.hi}]")

    def _rational_parts(self):
        lo, hi, step = map(_as_rational, (self.lo, self.hi, self.step))
        if lo is None or hi is None or step is None:
            return None
        return lo, hi, step

    @property
    def count(self) -> int:
        parts = self._rational_parts()
        if parts is not None:
            lo, hi, step = parts
            return (hi - lo) // step + 1
        # 1e-9 slack absorbs float rounding so hi itself stays on the grid
        return int(math.floor((float(self.hi) - float(self.lo)) / float(self.step) + 1e-9)) + 1

    @property
    def points(self) -> List:
        n = self.count
        parts = self._rational_parts()
        if parts is not None:
            lo, _, step = parts
            return [lo + k * step for k in range(n)]
        lo, step = float(self.lo), float(self.step)
        return [lo + k * step for k in range(n)]

    def refine(self) -> "Grid1D":
        r = _as_rational(self.step)
        return Grid1D(self.lo, self.hi, r / 2 if r is not None else self.step / 2)

    def __iter__(self):
        return iter(self.points)
