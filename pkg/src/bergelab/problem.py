"""Parametric minimization problems: value functions, solution sets,
problem transforms, and epigraph projections.

Infima are minima over finite action samples.  The action sample at x is
the y grid plus the finite closed endpoints of the feasible interval,
the y-domain endpoints, and any per-problem sample hints; every claim is
relative to that sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EvaluationError, PreconditionFailed
from .exact import ExactScalar
from .extreal import ExtReal, POS_INF, ext_min
from .expr import Const, Expr, Piecewise, eval_expr, eval_expr_vec
from .grid import Grid1D
from .multifunction import (
    FeasibleMap,
    FinitenessFilter,
    Interval,
    MemberOf,
    MultifunctionSpec,
)

Hint = Union[int, float, Fraction, ExactScalar, Callable]


@dataclass(frozen=True)
class ProblemSpec:
    x_domain: Interval
    y_domain: Interval
    phi: FeasibleMap
    u: Expr
    mode: str = "float"
    # extra action-sample points: scalars, or callables x -> iterable
    sample_hints: Tuple[Hint, ...] = ()
    # true action space extends beyond y_domain.hi (documented truncation)
    y_truncated: bool = False


@dataclass(frozen=True)
class ValueProfile:
    grid_x: Grid1D
    values: Tuple[ExtReal, ...]
    argmins: Tuple[Tuple, ...]


@lru_cache(maxsize=64)
def _grid_array(grid: Grid1D) -> np.ndarray:
    return np.asarray([float(p) for p in grid.points], dtype=np.float64)


def resolve_hints(p, x) -> list:
    out = []
    for h in p.sample_hints:
        if callable(h):
            out.extend(h(x))
        else:
            out.append(h)
    return out


def _base_extras(p: ProblemSpec, x) -> list:
    env = {"x": x}
    extras = list(p.phi.endpoints(env, p.mode))
    extras.extend(p.y_domain.finite_endpoints())
    extras.extend(resolve_hints(p, x))
    return extras


def feasible_sample(p, x, y_grid: Grid1D):
    """All sampled feasible actions at x with their objective values.

    Returns (ys, vals): numpy arrays in float mode, aligned lists (with
    ExtReal values) in exact mode.  Handles plain and modified problems.
    """
    if isinstance(p, ModifiedProblem):
        return _feasible_modified(p, x, y_grid)
    if p.mode == "float":
        return _feasible_float(p, x, y_grid)
    return _feasible_exact(p, x, y_grid)


def _feasible_float(p: ProblemSpec, x, y_grid: Grid1D):
    x = float(x)
    ys = _grid_array(y_grid)
    extras = [float(e) for e in _base_extras(p, x)]
    if extras:
        ys = np.unique(np.concatenate([ys, np.asarray(extras, dtype=np.float64)]))
    mask = p.phi.mask_vec({"x": x}, ys) & p.y_domain.mask_vec(ys)
    ys = ys[mask]
    if ys.size == 0:
        return ys, ys
    with np.errstate(all="ignore"):
        vals = eval_expr_vec(p.u, {"x": x, "y": ys})
    if np.isnan(vals).any():
        bad = ys[np.isnan(vals)][0]
        raise EvaluationError(f"objective is NaN at (x={x}, y={bad})")
    return ys, vals


def _feasible_exact(p: ProblemSpec, x, y_grid: Grid1D):
    seen = set()
    ys = []
    for cand in list(y_grid.points) + _base_extras(p, x):
        key = ExactScalar.of(cand) if not isinstance(cand, ExactScalar) else cand
        if key in seen:
            continue
        seen.add(key)
        ys.append(cand)
    ys.sort(key=lambda v: (float(v),))
    env = {"x": x}
    out_y, out_v = [], []
    for y in ys:
        if not p.y_domain.contains(y):
            continue
        if not p.phi.contains(env, y, p.mode):
            continue
        out_y.append(y)
        out_v.append(eval_expr(p.u, {"x": x, "y": y}, p.mode))
    return out_y, out_v


def value_at(p, x, y_grid: Grid1D) -> ExtReal:
    """min of u(x, .) over the sampled feasible actions; +inf when none."""
    ys, vals = feasible_sample(p, x, y_grid)
    if isinstance(vals, np.ndarray):
        if vals.size == 0:
            return POS_INF
        return ExtReal(float(np.min(vals)))
    return ext_min(vals)


def solutions_at(p, x, y_grid: Grid1D, eps_sol) -> list:
    """Sampled feasible y within eps_sol of the sampled minimum; when the
    value is +inf every feasible sampled action is a solution."""
    ys, vals = feasible_sample(p, x, y_grid)
    if isinstance(vals, np.ndarray):
        if vals.size == 0:
            return []
        vmin = float(np.min(vals))
        if not np.isfinite(vmin):
            return [float(y) for y in ys]
        keep = vals <= vmin + float(eps_sol)
        return [float(y) for y in ys[keep]]
    if not vals:
        return []
    vmin = ext_min(vals)
    if vmin.is_pos_inf:
        return list(ys)
    thresh = vmin + ExtReal(eps_sol)
    return [y for y, v in zip(ys, vals) if v <= thresh]


def value_profile(p, x_grid: Grid1D, y_grid: Grid1D, eps_sol) -> ValueProfile:
    values = []
    argmins = []
    for x in x_grid.points:
        values.append(value_at(p, x, y_grid))
        argmins.append(tuple(solutions_at(p, x, y_grid, eps_sol)))
    return ValueProfile(x_grid, tuple(values), tuple(argmins))


def u_at(p, x, y) -> ExtReal:
    """Point evaluation of the objective, dispatching on problem kind."""
    if isinstance(p, ModifiedProblem):
        base_x = x if p.sublevel_nonempty(x) else p.x0
        return eval_expr(p.base.u, {"x": base_x, "y": y}, p.base.mode)
    return eval_expr(p.u, {"x": x, "y": y}, p.mode)


def phi_contains(p, x, y) -> bool:
    if isinstance(p, ModifiedProblem):
        return p.contains(x, y)
    return p.phi.contains({"x": x}, y, p.mode)


# ---------------------------------------------------------------------------
# transforms


def bar_transform(p: ProblemSpec) -> ProblemSpec:
    """Relax feasibility to the whole action space; the objective becomes
    +inf off the original graph, so sampled values are unchanged."""
    full = MultifunctionSpec(
        (
            _piece_const(p.y_domain),
        )
    )
    u_bar = Piecewise(((MemberOf(p.phi), p.u),), Const(POS_INF))
    orig_phi = p.phi

    def orig_endpoints(x, _phi=orig_phi, _mode=p.mode):
        return _phi.endpoints({"x": x}, _mode)

    return replace(
        p,
        phi=full,
        u=u_bar,
        sample_hints=p.sample_hints + (orig_endpoints,),
    )


def _piece_const(iv: Interval):
    from .multifunction import PhiPiece
    from .expr import TrueP

    return PhiPiece(
        TrueP(), Const(iv.lo), Const(iv.hi), iv.closed_lo, iv.closed_hi
    )


def hat_transform(p: ProblemSpec) -> ProblemSpec:
    """Constrain feasibility to the finiteness set of the objective."""
    return replace(p, phi=FinitenessFilter(p.phi, p.u))


# ---------------------------------------------------------------------------
# modified (sublevel-localized) problem


@dataclass(frozen=True)
class ModifiedProblem:
    """Sublevel-filtered problem: feasibility is the lam-sublevel of
    u(z, .) on the original feasible set, falling back to the sublevel
    slice at x0 (with objective evaluated at x0) where the local slice is
    empty at the working resolution."""

    base: ProblemSpec
    lam: object
    x0: object
    y_grid_work: Grid1D

    @property
    def mode(self):
        return self.base.mode

    @property
    def x_domain(self):
        return self.base.x_domain

    @property
    def y_domain(self):
        return self.base.y_domain

    @property
    def resolution(self):
        return {"y_step": str(self.y_grid_work.step)}

    def _lam_ext(self) -> ExtReal:
        return ExtReal(self.lam)

    def sublevel_nonempty(self, z) -> bool:
        ys, vals = feasible_sample(self.base, z, self.y_grid_work)
        if isinstance(vals, np.ndarray):
            return vals.size > 0 and bool(np.any(vals <= float(self.lam)))
        lam = self._lam_ext()
        return any(v <= lam for v in vals)

    def contains(self, z, y) -> bool:
        anchor = z if self.sublevel_nonempty(z) else self.x0
        if not self.base.phi.contains({"x": anchor}, y, self.base.mode):
            return False
        v = eval_expr(self.base.u, {"x": anchor, "y": y}, self.base.mode)
        return v <= self._lam_ext()


def _feasible_modified(mp: ModifiedProblem, z, y_grid: Grid1D):
    ys, vals = feasible_sample(mp.base, z, y_grid)
    if isinstance(vals, np.ndarray):
        lam = float(mp.lam)
        mask = vals <= lam
        if mask.any():
            return ys[mask], vals[mask]
        ys0, vals0 = feasible_sample(mp.base, mp.x0, y_grid)
        mask0 = vals0 <= lam
        return ys0[mask0], vals0[mask0]
    lam = mp._lam_ext()
    kept = [(y, v) for y, v in zip(ys, vals) if v <= lam]
    if not kept:
        ys0, vals0 = feasible_sample(mp.base, mp.x0, y_grid)
        kept = [(y, v) for y, v in zip(ys0, vals0) if v <= lam]
    return [y for y, _ in kept], [v for _, v in kept]


def modified_problem(p: ProblemSpec, lam, x0, y_grid: Grid1D) -> ModifiedProblem:
    """Build the sublevel-localized problem anchored at (lam, x0).

    Precondition: some sampled y in Phi(x0) has u(x0, y) <= lam; reported
    at the working resolution of y_grid.
    """
    mp = ModifiedProblem(p, lam, x0, y_grid)
    if not mp.sublevel_nonempty(x0):
        raise PreconditionFailed(
            f"no sampled feasible action at x0={x0} with value <= {lam}"
        )
    return mp


# ---------------------------------------------------------------------------
# epigraph projection


def epi_projection_at(p, x, lam_grid: Grid1D, y_grid: Grid1D) -> set:
    """Sampled projection of the epigraph: the lam-grid values for which
    some sampled feasible action has u(x, y) <= lam."""
    v = value_at(p, x, y_grid)
    if v.is_pos_inf:
        return set()
    return {lam for lam in lam_grid.points if v <= ExtReal(lam)}


def check_epi_equality(
    p,
    x_grid: Grid1D,
    lam_grid: Grid1D,
    y_grid: Grid1D,
    value_ref: Optional[Callable] = None,
) -> list:
    """Compare the sampled epigraph projection with the epigraph of the
    value function at each grid x.  value_ref, when given, supplies the
    true value (closed form) so unattained infima become visible as
    proper subsets."""
    out = []
    for x in x_grid.points:
        proj = epi_projection_at(p, x, lam_grid, y_grid)
        vstar = value_ref(x) if value_ref is not None else value_at(p, x, y_grid)
        if not isinstance(vstar, ExtReal):
            vstar = ExtReal(vstar)
        epi = (
            set()
            if vstar.is_pos_inf
            else {lam for lam in lam_grid.points if vstar <= ExtReal(lam)}
        )
        if proj == epi:
            out.append({"x": x, "status": "equal"})
        else:
            missing = sorted(epi - proj, key=float)
            out.append(
                {
                    "x": x,
                    "status": "proper-subset",
                    "witness_lambda": missing[0] if missing else None,
                }
            )
    return out
