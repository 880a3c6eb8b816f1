"""Two-player worst-case optimization on grids.

A decision maker picks a from a feasible set depending on x; an
adversary, seeing (x, a), picks b from an uncertainty set.  The inner
supremum is the worst-loss surface, the outer infimum the robust value.
Both players' feasible sets are guarded interval maps, so every sampled
set is an interval slice with endpoints adjoined.

The B-side semicontinuity checks go through the reduction to the robust
value function (usc / lsc / attainment of the sampled outer min); the
A-side clustering check has no single-function reduction and probes the
raw definition on shrinking windows.
"""

from __future__ import annotations

import json
import types
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

from .checkers import (
    NO_VIOLATION,
    NOT_APPLICABLE,
    VIOLATED,
    CheckerParams,
    CheckerVerdict,
    Witness,
    _check_fn_at,
    _windows,
)
from .errors import ConfigError, InfeasibleAction, ValidationError
from .expr import Expr, eval_expr, expr_from_json
from .extreal import ExtReal, NEG_INF, POS_INF, ext_max, ext_min
from .grid import Grid1D
from .loader import interval_from_json
from .multifunction import Interval, MultifunctionSpec, phi_from_json


@dataclass(frozen=True)
class MinimaxProblem:
    x_domain: Interval
    a_domain: Interval
    b_domain: Interval
    phi_A: MultifunctionSpec          # guards in x
    phi_B: MultifunctionSpec          # guards in (x, a)
    f: Expr                           # in (x, a, b)
    mode: str = "float"

    def __post_init__(self):
        extra = self.f.free_vars() - {"x", "a", "b"}
        if extra:
            raise ValidationError(f"objective binds unknown variables {sorted(extra)}")


def _sample_interval(iv: Interval, grid: Grid1D) -> list:
    """Grid points inside the interval, closed finite endpoints adjoined."""
    if iv.is_empty:
        return []
    pts = [p for p in grid.points if iv.contains(p)]
    for e in iv.finite_endpoints():
        if e not in pts and grid.lo <= e <= grid.hi:
            pts.append(e)
    return sorted(pts, key=float)


def _a_sample(mp: MinimaxProblem, x, a_grid: Grid1D) -> list:
    iv = mp.phi_A.interval_at_env({"x": x}, mp.mode)
    return _sample_interval(iv, a_grid)


def _b_sample(mp: MinimaxProblem, x, a, b_grid: Grid1D) -> list:
    iv = mp.phi_B.interval_at_env({"x": x, "a": a}, mp.mode)
    return _sample_interval(iv, b_grid)


def _f(mp: MinimaxProblem, x, a, b) -> ExtReal:
    return eval_expr(mp.f, {"x": x, "a": a, "b": b}, mp.mode)


def worst_loss_at(mp: MinimaxProblem, x, a, b_grid: Grid1D) -> ExtReal:
    """Adversary's best sampled response value at (x, a)."""
    if not mp.phi_A.contains({"x": x}, a, mp.mode):
        raise InfeasibleAction(f"action {a} infeasible at {x}")
    bs = _b_sample(mp, x, a, b_grid)
    if not bs:
        raise ValidationError(f"uncertainty set has no sampled points at ({x}, {a})")
    return ext_max(_f(mp, x, a, b) for b in bs)


def minimax_at(mp: MinimaxProblem, x, a_grid: Grid1D, b_grid: Grid1D) -> ExtReal:
    """Robust value: sampled outer min of the worst-loss surface."""
    actions = _a_sample(mp, x, a_grid)
    if not actions:
        raise ValidationError(f"no sampled feasible actions at {x}")
    return ext_min(worst_loss_at(mp, x, a, b_grid) for a in actions)


def solution_sets_at(mp: MinimaxProblem, x, a_grid: Grid1D, b_grid: Grid1D,
                     eps_sol) -> Tuple[list, Dict]:
    """eps-argmin actions and, per sampled action, the adversary's
    eps-argmax responses."""
    actions = _a_sample(mp, x, a_grid)
    if not actions:
        raise ValidationError(f"no sampled feasible actions at {x}")
    sharp = {a: worst_loss_at(mp, x, a, b_grid) for a in actions}
    v = ext_min(sharp.values())
    a_star = [a for a in actions if not v + ExtReal(eps_sol) < sharp[a]]
    b_sharp = {}
    for a in actions:
        bs = _b_sample(mp, x, a, b_grid)
        vals = {b: _f(mp, x, a, b) for b in bs}
        top = sharp[a]
        b_sharp[a] = [b for b in bs if not vals[b] + ExtReal(eps_sol) < top]
    return a_star, b_sharp


def duality_values(mp: MinimaxProblem, x, a_grid: Grid1D, b_grid: Grid1D):
    """(min over a of max over b, max over b of min over a) from the same
    f samples on the common rectangle of feasible pairs; the first never
    falls below the second."""
    actions = _a_sample(mp, x, a_grid)
    table = {a: {b: _f(mp, x, a, b) for b in _b_sample(mp, x, a, b_grid)}
             for a in actions}
    minmax = ext_min(ext_max(row.values()) for row in table.values() if row)
    bs = sorted({b for row in table.values() for b in row}, key=float)
    maxmin = ext_max(
        ext_min(row[b] for row in table.values() if b in row) for b in bs
    ) if bs else NEG_INF
    return minmax, maxmin


# ---------------------------------------------------------------------------
# player swap


@dataclass(frozen=True)
class SwappedProblem:
    """The lower-inverse restructuring: the adversary's actions become the
    outer coordinate and the decision maker's actions the inner one."""

    base: MinimaxProblem

    def f(self, x, b, a) -> ExtReal:
        return _f(self.base, x, a, b)

    def phi_a_sample(self, x, a_grid: Grid1D, b_grid: Grid1D) -> list:
        """Sampled union over feasible a of the uncertainty sets at x."""
        out = set()
        for a in _a_sample(self.base, x, a_grid):
            out.update(_b_sample(self.base, x, a, b_grid))
        return sorted(out, key=float)

    def contains(self, x, b, a) -> bool:
        """a lies in the swapped inner set at (x, b)."""
        return (
            self.base.phi_A.contains({"x": x}, a, self.base.mode)
            and self.base.phi_B.contains({"x": x, "a": a}, b, self.base.mode)
        )

    def phi_b_sample(self, x, b, a_grid: Grid1D) -> list:
        return [a for a in _a_sample(self.base, x, a_grid)
                if self.contains(x, b, a)]


def swap_transform(mp: MinimaxProblem) -> SwappedProblem:
    return SwappedProblem(mp)


# ---------------------------------------------------------------------------
# semicontinuity checks


@dataclass(frozen=True)
class MinimaxParams:
    a_grid: Grid1D
    b_grid: Grid1D
    base: CheckerParams = CheckerParams()
    eps_schedule: tuple = tuple(0.5 ** k for k in range(9))
    value_ref: Optional[Callable] = None


def _shim(mp: MinimaxProblem):
    return types.SimpleNamespace(mode=mp.mode, x_domain=mp.x_domain)


def _value_fn_verdict(mp: MinimaxProblem, x, params: MinimaxParams,
                      lower: bool, kind: str) -> CheckerVerdict:
    windows = _windows(_shim(mp), x, params.base)
    xs = sorted({x} | {z for pts in windows for z in pts}, key=float)
    vals = [minimax_at(mp, z, params.a_grid, params.b_grid) for z in xs]
    verdict = _check_fn_at(vals, xs, x, params.base, lower=lower)
    if not verdict.violated:
        return verdict
    w = verdict.witness
    data = dict(w.data)
    data["surface"] = "robust value"
    gap = float(w.gap)
    eps = [e for e in params.eps_schedule if e < gap]
    if eps:
        data["eps_certified"] = max(eps)
    return CheckerVerdict(
        VIOLATED,
        Witness(kind=kind, x=x, gap=w.gap, pairs=w.pairs, data=data),
        verdict.resolution,
        note=verdict.note,
    )


def check_b_uniform_fptusc(mp: MinimaxProblem, x,
                           params: MinimaxParams) -> CheckerVerdict:
    """Violated exactly when the sampled robust value jumps up in the
    limit at x (its usc failure), per the equivalence with the uniform
    transfer property of the objective."""
    return _value_fn_verdict(mp, x, params, lower=False, kind="b-uniform-usc")


def check_b_fptlisc(mp: MinimaxProblem, x,
                    params: MinimaxParams) -> CheckerVerdict:
    """Violated exactly when the sampled robust value jumps down in the
    limit at x (its lsc failure)."""
    return _value_fn_verdict(mp, x, params, lower=True, kind="b-lisc")


def check_b_fptlmsc(mp: MinimaxProblem, x,
                    params: MinimaxParams) -> CheckerVerdict:
    """lsc of the robust value plus attainment of the sampled outer min.
    Attainment failure is certified only against a reference value."""
    lisc = check_b_fptlisc(mp, x, params)
    if lisc.violated:
        return lisc
    v = minimax_at(mp, x, params.a_grid, params.b_grid)
    if params.value_ref is None:
        return CheckerVerdict(
            NOT_APPLICABLE, None, {},
            note="attainment not certifiable without a reference value",
        )
    ref = params.value_ref(x)
    ref = ref if isinstance(ref, ExtReal) else ExtReal(ref)
    attained = not ref < v
    if not attained and mp.mode == "float":
        attained = float(v) - float(ref) <= params.base.attain_tol
    if attained:
        return CheckerVerdict(NO_VIOLATION, None, {})
    w = Witness(
        kind="b-attainment", x=x, gap=None, pairs=(),
        data={"sampled_min": v, "reference": ref},
    )
    return CheckerVerdict(VIOLATED, w, {})


def check_a_lsc(mp: MinimaxProblem, x, params: MinimaxParams) -> CheckerVerdict:
    """Clustering of adversary-feasible points along decision sequences:
    for each sampled (a, b) with b feasible at (x, a), some nearby pair
    (x', a') must offer a feasible b' within the cluster radius.  Violated
    when a target b stays isolated from every sampled nearby uncertainty
    set at every depth."""
    windows = _windows(_shim(mp), x, params.base)
    r = 3.0 * float(params.b_grid.step)
    sub = params.base.graph_subsample

    # per depth: feasible-(a', b'-sample) pairs over the window
    depth_sets = []
    for pts in windows:
        entries = []
        for z in pts:
            for ap in _thin(_a_sample(mp, z, params.a_grid), sub):
                entries.append((z, ap, _b_sample(mp, z, ap, params.b_grid)))
        depth_sets.append(entries)

    for a in _thin(_a_sample(mp, x, params.a_grid), sub):
        for b in _thin(_b_sample(mp, x, a, params.b_grid), sub):
            pairs = []
            min_dist = None
            isolated = True
            for entries in depth_sets:
                best = None  # (dist, z, a', b')
                for z, ap, bs in entries:
                    if not bs:
                        continue
                    bp = min(bs, key=lambda t: abs(float(t) - float(b)))
                    d = abs(float(bp) - float(b))
                    if best is None or d < best[0]:
                        best = (d, z, ap, bp)
                if best is None or best[0] <= r:
                    isolated = False
                    break
                pairs.append((best[1], best[3]))
                if min_dist is None or best[0] < min_dist:
                    min_dist = best[0]
            if isolated and pairs:
                w = Witness(
                    kind="a-lsc", x=x, gap=min_dist - r, pairs=tuple(pairs),
                    data={"action": a, "target_b": b, "radius": r},
                )
                return CheckerVerdict(VIOLATED, w, {"radius": r})
    return CheckerVerdict(NO_VIOLATION, None, {"radius": r})


def _thin(seq: list, cap: int) -> list:
    if len(seq) <= cap:
        return seq
    step = (len(seq) - 1) / (cap - 1)
    return [seq[round(i * step)] for i in range(cap)]


# ---------------------------------------------------------------------------
# profiles and configuration


@dataclass(frozen=True)
class MinimaxProfile:
    grid_x: Grid1D
    f_star: Tuple[ExtReal, ...]
    worst_loss: Tuple[Tuple[Tuple[object, ExtReal], ...], ...]  # per x: (a, f#)
    a_star: Tuple[Tuple[object, ...], ...]


def minimax_profile(mp: MinimaxProblem, x_grid: Grid1D, a_grid: Grid1D,
                    b_grid: Grid1D, eps_sol) -> MinimaxProfile:
    f_star, surface, arg = [], [], []
    for x in x_grid:
        actions = _a_sample(mp, x, a_grid)
        row = tuple((a, worst_loss_at(mp, x, a, b_grid)) for a in actions)
        v = ext_min(val for _, val in row) if row else POS_INF
        f_star.append(v)
        surface.append(row)
        arg.append(tuple(a for a, val in row if not v + ExtReal(eps_sol) < val))
    return MinimaxProfile(x_grid, tuple(f_star), tuple(surface), tuple(arg))


def minimax_from_json(d: dict) -> MinimaxProblem:
    mode = d.get("mode", "float")
    try:
        return MinimaxProblem(
            x_domain=interval_from_json(d["x_domain"], mode),
            a_domain=interval_from_json(d["a_domain"], mode),
            b_domain=interval_from_json(d["b_domain"], mode),
            phi_A=phi_from_json(d["phi_A"]),
            phi_B=phi_from_json(d["phi_B"]),
            f=expr_from_json(d["f"]),
            mode=mode,
        )
    except KeyError as exc:
        raise ConfigError(f"minimax problem missing field: {exc}") from exc


def load_minimax(path) -> MinimaxProblem:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return minimax_from_json(json.load(fh))
