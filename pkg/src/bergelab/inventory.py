"""Finite-horizon single-item inventory control with setup costs.

Four feasibility variants (order cap L and storage cap M each finite or
infinite), lost-sales or backorder dynamics x' = T(x + y - D), and exact
finite-support demand expectations.  Backward induction sweeps a state
grid; continuation values off the grid are piecewise-linear interpolated
and never extrapolated.  The never-order policy's cost g_t doubles as a
certified upper bound on the value function and as the dominance cap
that truncates unbounded order sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import (
    ConfigError,
    GridCoverageError,
    InfeasibleOrder,
    InterpolationRangeError,
    StateOutOfRange,
    ValidationError,
)
from .expr import Expr, eval_expr, eval_expr_vec, expr_from_json
from .extreal import ExtReal, POS_INF
from .grid import Grid1D
from .multifunction import Interval

_TOL = 1e-9


@dataclass(frozen=True)
class InventoryModel:
    backorders: bool          # False = lost sales (states clamped at 0)
    L: ExtReal                # order cap, possibly +inf; normalized >= 1
    M: ExtReal                # storage cap, possibly +inf
    c1: float                 # setup cost per order placed
    c2: float                 # unit order cost
    alpha: float              # discount factor in (0, 1]
    h: Expr                   # holding/backlog cost in the state variable x
    demand: Tuple[Tuple[float, float], ...]  # (atom, probability)

    def __post_init__(self):
        if not (self.L.is_pos_inf or float(self.L) >= 1):
            raise ValidationError("order cap L must be >= 1 (or +inf)")
        if not (self.M.is_pos_inf or float(self.M) > 0):
            raise ValidationError("storage cap M must be > 0 (or +inf)")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValidationError("costs c1, c2 must be positive")
        if not 0 < self.alpha <= 1:
            raise ValidationError("discount alpha must lie in (0, 1]")
        if not self.demand:
            raise ValidationError("demand distribution is empty")
        total = 0.0
        for d, p in self.demand:
            if d < 0 or p <= 0:
                raise ValidationError(f"bad demand atom ({d}, {p})")
            total += p
        if abs(total - 1.0) > _TOL:
            raise ValidationError(f"demand probabilities sum to {total}")

    @property
    def d_max(self) -> float:
        return max(d for d, _ in self.demand)

    @property
    def d_min(self) -> float:
        return min(d for d, _ in self.demand)


def transition(m: InventoryModel, x: float, y: float, d: float) -> float:
    """Next state T(x + y - d); positive part under lost sales."""
    if d < 0:
        raise ValidationError(f"demand {d} is negative")
    iv = feasible_orders(m, x)
    if not iv.contains(y):
        raise InfeasibleOrder(f"order {y} outside {iv} at state {x}")
    z = x + y - d
    return z if m.backorders else max(z, 0.0)


def _t(m: InventoryModel, z):
    return z if m.backorders else np.maximum(z, 0.0)


def _check_state(m: InventoryModel, x: float) -> None:
    if not m.backorders and x < -_TOL:
        raise StateOutOfRange(f"state {x} negative under lost sales")
    if not m.M.is_pos_inf and x > float(m.M) + _TOL:
        raise StateOutOfRange(f"state {x} above storage cap {float(m.M)}")


def feasible_orders(m: InventoryModel, x: float,
                    g_bound: Optional[float] = None,
                    pad: float = 0.0) -> Interval:
    """The variant's order interval at state x.

    For the doubly-unbounded variant the true set is [0, +inf); a
    dominance cap g_bound/c2 (+ pad) derived from the never-order cost
    is applied when supplied: any larger order already pays more in
    unit costs than never ordering at all.
    """
    _check_state(m, x)
    l_fin, m_fin = not m.L.is_pos_inf, not m.M.is_pos_inf
    if l_fin and m_fin:
        hi = min(float(m.L), float(m.M) - x)
    elif l_fin:
        hi = float(m.L)
    elif m_fin:
        hi = float(m.M) - x
    else:
        if g_bound is None:
            return Interval.of(0.0, float("inf"))
        hi = g_bound / m.c2 + pad
    return Interval.of(0.0, max(hi, 0.0))


def never_order_bound(m: InventoryModel, tau: int, x: float,
                      _memo: Optional[Dict] = None) -> float:
    """Cost g_tau(x) of never ordering: g_0 = 0 and
    g_{t+1}(x) = E h(T(x-D)) + alpha E g_t(T(x-D)).  Exact recursion on
    the demand tree; an upper bound on the optimal value by feasibility
    of the zero order in every variant."""
    if tau < 0:
        raise ValidationError("stage must be nonnegative")
    memo = {} if _memo is None else _memo
    key = (tau, x)
    if key in memo:
        return memo[key]
    if tau == 0:
        return 0.0
    total = 0.0
    for d, p in m.demand:
        z = _t(m, x - d)
        total += p * (_h_at(m, z) + m.alpha * never_order_bound(m, tau - 1, z, memo))
    memo[key] = total
    return total


def _h_at(m: InventoryModel, z: float) -> float:
    v = eval_expr(m.h, {"x": z}, "float")
    return float(v)


def sigma_path(x: float, y: float, x_prime: float) -> float:
    """Continuous order selector through (x, y): keeps ordering y below
    x, ramps linearly down to zero on [x, x+y], zero beyond."""
    if x_prime < x:
        return y
    if x_prime <= x + y:
        return y - x_prime + x
    return 0.0


# ---------------------------------------------------------------------------
# backward induction


@dataclass(frozen=True)
class ValueTable:
    horizon: int
    grid: Grid1D
    values: Tuple[Tuple[float, ...], ...]   # [stage][state index]
    policy: Tuple[Tuple[float, ...], ...]   # [stage-1][state index], stages 1..horizon

    def stage_values(self, tau: int) -> Tuple[float, ...]:
        if not 0 <= tau <= self.horizon:
            raise ValidationError(f"stage {tau} outside horizon {self.horizon}")
        return self.values[tau]


def continuity_modulus(table: ValueTable, tau: int) -> float:
    """Largest jump between adjacent grid values of u*_tau; a grid proxy
    for the modulus of continuity."""
    vals = table.stage_values(tau)
    if len(vals) < 2:
        return 0.0
    return max(abs(b - a) for a, b in zip(vals, vals[1:]))


def validate_h(m: InventoryModel, state_grid: Grid1D) -> None:
    """h must vanish at 0, stay nonnegative on the grid, and pass the
    midpoint convexity test on consecutive grid triples."""
    if abs(_h_at(m, 0.0)) > _TOL:
        raise ValidationError("holding cost h(0) must be 0")
    pts = [float(p) for p in state_grid.points]
    vals = [_h_at(m, z) for z in pts]
    for z, v in zip(pts, vals):
        if v < -_TOL:
            raise ValidationError(f"holding cost negative at {z}: {v}")
    for i in range(1, len(vals) - 1):
        if vals[i] > (vals[i - 1] + vals[i + 1]) / 2 + _TOL:
            raise ValidationError(
                f"holding cost fails midpoint convexity at {pts[i]}"
            )


def _order_cap(m: InventoryModel, x: float, horizon: int, action_step: float,
               g_memo: Dict) -> float:
    # the dominance cap is only needed when the true order set is [0, inf)
    if m.L.is_pos_inf and m.M.is_pos_inf:
        g_top = never_order_bound(m, horizon, x, g_memo)
        return float(feasible_orders(m, x, g_bound=g_top, pad=action_step).hi)
    return float(feasible_orders(m, x).hi)


def _stage_regions(m: InventoryModel, grid: Grid1D, horizon: int,
                   action_step: float, g_memo: Dict) -> list:
    """Sweep range per stage index.

    Stage values u*_tau are queried only at states reachable from the
    reporting grid in horizon - tau steps, so the sweep range grows by
    one step of reachability per level of the recursion: up by the
    largest order minus the smallest demand, down by the largest demand
    (clamped at zero under lost sales, at M above).  Each range carries
    one extra grid step of slack so interpolation always finds valid
    bracketing points."""
    step = float(grid.step)

    def clamp(lo_c: float, hi_c: float):
        if not m.backorders:
            lo_c = max(lo_c, 0.0)
        if not m.M.is_pos_inf:
            hi_c = min(hi_c, float(m.M))
        return lo_c, hi_c

    regions = [clamp(float(grid.lo) - step, float(grid.hi) + step)]
    for _ in range(horizon):
        lo_r, hi_r = regions[-1]
        up = max(_order_cap(m, hi_r, horizon, action_step, g_memo) - m.d_min, 0.0)
        regions.append(clamp(lo_r - m.d_max - step, hi_r + up + step))
    # regions[k] = range for the stage solved k recursion levels below
    # the top; reverse so regions[tau] serves stage tau
    return list(reversed(regions))


def _work_grid(grid: Grid1D, lo: float, hi: float) -> np.ndarray:
    step = float(grid.step)
    base = float(grid.lo)
    n_below = math.ceil(max(base - lo, 0.0) / step - _TOL)
    n_above = math.ceil(max(hi - float(grid.hi), 0.0) / step - _TOL)
    lo_w = base - n_below * step
    count = len(grid.points) + n_below + n_above
    return lo_w + step * np.arange(count)


def backward_induction(m: InventoryModel, horizon: int, state_grid: Grid1D,
                       action_step: float) -> ValueTable:
    """Solve the optimality equations stage by stage on the grid.

    u*_0 = 0 and u*_{t+1}(x) minimizes setup + unit cost + expected
    holding cost + discounted continuation over sampled feasible orders
    (zero always included; ties broken toward the smallest order).
    Expectations are exact finite sums; continuation values come from
    piecewise-linear interpolation on a working grid that is extended
    up-front to cover every state reachable from the reporting grid,
    so interpolation never extrapolates.
    """
    if horizon < 0:
        raise ValidationError("horizon must be nonnegative")
    if action_step <= 0:
        raise ValidationError("action step must be positive")
    if not m.M.is_pos_inf and float(state_grid.hi) > float(m.M) + _TOL:
        raise GridCoverageError("state grid exceeds the storage cap")
    validate_h(m, state_grid)

    g_memo: Dict = {}
    regions = _stage_regions(m, state_grid, horizon, action_step, g_memo)
    full_lo = min(lo for lo, _ in regions)
    full_hi = max(hi for _, hi in regions)
    xs = _work_grid(state_grid, full_lo, full_hi)
    report = np.asarray([float(p) for p in state_grid.points])
    ri = np.searchsorted(xs, report - _TOL)
    if not np.allclose(xs[ri], report, atol=1e-7):
        raise GridCoverageError("reporting grid does not embed in the working grid")

    demand = np.asarray([d for d, _ in m.demand])
    probs = np.asarray([p for _, p in m.demand])

    def expected_h(z: np.ndarray) -> np.ndarray:
        # z: (n_y, n_d) successor states
        return eval_expr_vec(m.h, {"x": z}) @ probs

    prev = np.zeros_like(xs)  # u*_0 = 0
    values = [tuple(prev[ri])]
    policy = []
    for tau in range(1, horizon + 1):
        lo_r, hi_r = regions[tau]
        cur = np.full_like(xs, np.nan)
        pol = np.full_like(xs, np.nan)
        for i, x in enumerate(xs):
            if x < lo_r - _TOL or x > hi_r + _TOL:
                continue
            cap = _order_cap(m, float(x), horizon, action_step, g_memo)
            ys = np.arange(0.0, cap + action_step / 2, action_step)
            if ys.size == 0 or ys[-1] < cap - _TOL:
                ys = np.append(ys, cap)
            z = _t(m, x + ys[:, None] - demand[None, :])
            if z.min() < xs[0] - 1e-7 or z.max() > xs[-1] + 1e-7:
                raise InterpolationRangeError(
                    f"successor state off the working grid at x={x}"
                )
            cont = np.interp(z, xs, prev)
            if np.isnan(cont).any():
                raise GridCoverageError(
                    f"successor state outside the valid stage region at x={x}"
                )
            cost = (
                m.c1 * (ys > 0)
                + m.c2 * ys
                + expected_h(z)
                + m.alpha * (cont @ probs)
            )
            j = int(np.argmin(cost))  # first minimum = smallest order
            cur[i] = cost[j]
            pol[i] = ys[j]
        prev = cur
        values.append(tuple(cur[ri]))
        policy.append(tuple(pol[ri]))
    return ValueTable(
        horizon=horizon,
        grid=state_grid,
        values=tuple(values),
        policy=tuple(policy),
    )


def exhaustive_value(m: InventoryModel, tau: int, x: float,
                     action_step: float) -> float:
    """Brute-force optimal cost by enumerating order choices stage by
    stage over the exact demand tree (no grid, no interpolation).  Only
    tractable for tiny horizons; used as the induction oracle."""
    if tau == 0:
        return 0.0
    cap = _order_cap(m, x, tau, action_step, {})
    ys = np.arange(0.0, cap + action_step / 2, action_step)
    if ys.size == 0 or ys[-1] < cap - _TOL:
        ys = np.append(ys, cap)
    best = math.inf
    for y in ys:
        total = m.c1 * (y > 0) + m.c2 * y
        for d, p in m.demand:
            z = float(_t(m, x + y - d))
            total += p * (_h_at(m, z) + m.alpha * exhaustive_value(m, tau - 1, z, action_step))
        best = min(best, total)
    return best


# ---------------------------------------------------------------------------
# configuration files


@dataclass(frozen=True)
class InventoryConfig:
    model: InventoryModel
    grid: Grid1D
    action_step: float
    horizon: int


def _cap_from_json(raw) -> ExtReal:
    if raw in ("+inf", None):
        return POS_INF
    return ExtReal(float(raw))


def model_from_json(d: dict) -> InventoryConfig:
    try:
        model = InventoryModel(
            backorders=bool(d["backorders"]),
            L=_cap_from_json(d.get("L", "+inf")),
            M=_cap_from_json(d.get("M", "+inf")),
            c1=float(d["c1"]),
            c2=float(d["c2"]),
            alpha=float(d["alpha"]),
            h=expr_from_json(d["h"]),
            demand=tuple((float(a), float(p)) for a, p in d["demand"]),
        )
        g = d["grid"]
        grid = Grid1D(float(g["lo"]), float(g["hi"]), float(g["step"]))
        return InventoryConfig(
            model=model,
            grid=grid,
            action_step=float(d["action_step"]),
            horizon=int(d["horizon"]),
        )
    except KeyError as exc:
        raise ConfigError(f"inventory config missing field: {exc}") from exc


def load_inventory_config(path) -> InventoryConfig:
    with open(Path(path), "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
