"""Witness-producing falsifiers for semicontinuity properties.

Every checker is a falsifier, not a prover: Violated verdicts carry a
replayable witness with a recorded gap; NoViolationFound is always
qualified by the resolution (shrinking-ball schedule, grid steps, depth)
and never interpreted as proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyDomainNeighborhood, ValidationError
from .exact import ExactScalar, SQRT2
from .extreal import ExtReal, POS_INF, NEG_INF
from .grid import Grid1D
from .multifunction import Interval
from .problem import (
    ModifiedProblem,
    feasible_sample,
    phi_contains,
    solutions_at,
    u_at,
    value_at,
)

VIOLATED = "Violated"
NO_VIOLATION = "NoViolationFound"
NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class CheckerParams:
    y_grid: Optional[Grid1D] = None
    delta0: object = None  # defaults to 1/2 in the active mode
    depth: int = 12
    window_points: int = 6
    min_gap: float = 1e-9
    attain_tol: float = 1e-6
    cluster_expansions: int = 4
    strip_points: int = 4096
    graph_subsample: int = 17
    cluster_candidates: Tuple = ()
    value_ref: Optional[Callable] = None  # certified closed-form value at x
    irrational_probes: bool = True  # exact mode: probe off the rationals


@dataclass(frozen=True)
class Witness:
    kind: str
    x: object
    gap: object
    pairs: Tuple  # finite sequence of (x_n, y_n) or (x_n, value)
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckerVerdict:
    status: str
    witness: Optional[Witness] = None
    resolution: dict = field(default_factory=dict)
    note: str = ""

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED


# ---------------------------------------------------------------------------
# shared plumbing


def _mode_of(p) -> str:
    return p.mode


def _delta0(params: CheckerParams, mode: str):
    if params.delta0 is not None:
        return params.delta0
    return Fraction(1, 2) if mode == "exact" else 0.5


def _resolution(p, params: CheckerParams) -> dict:
    mode = _mode_of(p)
    d0 = _delta0(params, mode)
    res = {
        "delta_min": str(_scale(d0, Fraction(1, 2 ** params.depth))),
        "depth": params.depth,
        "window_points": params.window_points,
    }
    if params.y_grid is not None:
        res["y_step"] = str(params.y_grid.step)
    return res


def _scale(v, frac: Fraction):
    if isinstance(v, float):
        return v * float(frac)
    return v * frac


def _in_domain(p, x) -> bool:
    return p.x_domain.contains(x)


def _windows(p, x, params: CheckerParams):
    """List (per depth k) of probe points x' with 0 < |x'-x| <= delta_k,
    restricted to the x domain.  Exact mode optionally adds sqrt(2)-offset
    probes so rationality-sensitive objectives are exercised off Q."""
    mode = _mode_of(p)
    d0 = _delta0(params, mode)
    J = params.window_points
    out = []
    for k in range(params.depth + 1):
        dk = _scale(d0, Fraction(1, 2 ** k))
        pts = []
        for j in range(1, J + 1):
            off = _scale(dk, Fraction(j, J))
            for cand in (x + off, x - off):
                if _in_domain(p, cand):
                    pts.append(cand)
            if mode == "exact" and params.irrational_probes:
                ioff = SQRT2 * _scale(dk, Fraction(j, 2 * J))
                for cand in (x + ioff, x - ioff):
                    if _in_domain(p, cand):
                        pts.append(cand)
        out.append(pts)
    return out


class _ValueCache:
    def __init__(self, p, y_grid: Grid1D):
        self.p = p
        self.y_grid = y_grid
        self._vals = {}
        self._sols = {}

    def _key(self, x):
        return x if isinstance(x, (Fraction, ExactScalar, int)) else float(x)

    def value(self, x) -> ExtReal:
        k = self._key(x)
        if k not in self._vals:
            self._vals[k] = value_at(self.p, x, self.y_grid)
        return self._vals[k]

    def argmin(self, x):
        k = self._key(x)
        if k not in self._sols:
            ys, vals = feasible_sample(self.p, x, self.y_grid)
            if isinstance(vals, np.ndarray):
                if vals.size == 0:
                    self._sols[k] = None
                else:
                    self._sols[k] = float(ys[int(np.argmin(vals))])
            else:
                if not vals:
                    self._sols[k] = None
                else:
                    best = min(range(len(vals)), key=lambda i: (vals[i],))
                    self._sols[k] = ys[best]
        return self._sols[k]

    def nonempty(self, x) -> bool:
        ys, _ = feasible_sample(self.p, x, self.y_grid)
        return (ys.size if isinstance(ys, np.ndarray) else len(ys)) > 0


def _require_grid(params: CheckerParams) -> Grid1D:
    if params.y_grid is None:
        raise ValidationError("checker params need a y_grid")
    return params.y_grid


def _half(a: ExtReal, b: ExtReal, mode: str):
    """Positive half-distance (a - b)/2 as a plain scalar; capped at 1
    when the headroom is infinite."""
    if a.is_pos_inf or b.is_neg_inf:
        return Fraction(1) if mode == "exact" else 1.0
    diff = a.finite - b.finite
    if mode == "exact":
        d = diff if isinstance(diff, (Fraction, ExactScalar)) else Fraction(diff)
        return d / 2
    return float(diff) / 2.0


def _gap_positive(gap, mode: str, min_gap) -> bool:
    if mode == "exact":
        return gap > 0
    return gap > min_gap


def _absdiff(a: ExtReal, b: ExtReal) -> ExtReal:
    if a == b:
        return ExtReal(0)
    if not a.is_finite or not b.is_finite:
        return POS_INF
    d = a.finite - b.finite
    return ExtReal(-d) if ExtReal(d) < ExtReal(0) else ExtReal(d)


def _converged(estimates, gap) -> bool:
    """A shrinking-window estimate certifies a limit only once it has
    settled: the two deepest depth estimates must agree to within half
    the claimed gap.  A continuous slope makes the estimate keep moving
    by the window radius, so it never settles relative to its own gap."""
    if len(estimates) < 2:
        return False
    return _absdiff(estimates[-1], estimates[-2]) <= ExtReal(gap / 2)


def _check_dom_neighborhood(cache: _ValueCache, x, windows):
    if cache.nonempty(x):
        return
    for pts in windows:
        for z in pts:
            if cache.nonempty(z):
                return
    raise EmptyDomainNeighborhood(
        f"no sampled feasible points near x={x} at the working resolution"
    )


# ---------------------------------------------------------------------------
# grid-function semicontinuity


def check_lsc_fn(f_values, x_grid: Grid1D, params: CheckerParams = CheckerParams()) -> CheckerVerdict:
    """Lower semicontinuity of a function on a grid of base points.

    A callable f is probed on synthetic shrinking windows around each
    grid point, which attributes a jump to the point that carries the
    offending value.  A plain sequence of samples can only anchor the
    liminf proxy at the immediate neighbors, so a jump between two
    samples is attributed to the higher endpoint (resolution limit)."""
    if callable(f_values):
        return _check_fn_callable(f_values, x_grid, params, lower=True)
    xs = list(x_grid.points)
    vals = [v if isinstance(v, ExtReal) else ExtReal(v) for v in f_values]
    if len(xs) != len(vals):
        raise ValidationError("grid/value length mismatch")
    mode = "exact" if xs and isinstance(xs[0], (Fraction, int)) else "float"
    d0 = _delta0(params, mode)
    best = None
    for i, x in enumerate(xs):
        fi = vals[i]
        if fi.is_neg_inf:
            continue
        # the deepest resolvable window is the immediate neighbors; the
        # liminf proxy anchors there so jumps below the grid spacing are
        # not mistaken for violations
        neighbors = [j for j in (i - 1, i + 1) if 0 <= j < len(xs)]
        if not neighbors:
            continue
        jlow = min(neighbors, key=lambda j: (vals[j],))
        anchor = vals[jlow]
        if not anchor < fi:
            continue
        gap = _half(fi, anchor, mode)
        if not _gap_positive(gap, mode, params.min_gap):
            continue
        # a drop to the neighbor is a jump only when it dwarfs the local
        # variation on either flank; otherwise it is a slope at the grid
        # resolution (f(x) = x must not be flagged)
        flank = ExtReal(0)
        j2 = jlow + (jlow - i)
        if 0 <= j2 < len(xs):
            flank = max(flank, _absdiff(vals[jlow], vals[j2]))
        i2 = i + (i - jlow)
        if 0 <= i2 < len(xs):
            flank = max(flank, _absdiff(fi, vals[i2]))
        drop = _absdiff(fi, anchor)
        if flank.is_pos_inf:
            continue
        if not flank == ExtReal(0) and not ExtReal(flank.finite * 4) < drop:
            continue
        pairs = []
        for k in range(params.depth + 1):
            dk = _scale(d0, Fraction(1, 2 ** k))
            window = [
                j for j in range(len(xs)) if j != i and abs(xs[j] - x) <= dk
            ]
            if not window:
                break
            jmin = min(window, key=lambda j: (vals[j],))
            pairs.append((xs[jmin], vals[jmin]))
        cand = Witness(
            kind="lsc-fn",
            x=x,
            gap=gap,
            pairs=tuple(pairs),
            data={"value": fi, "window_max_min": anchor},
        )
        if best is None or float(gap) > float(best.gap):
            best = cand
    if best is not None:
        return CheckerVerdict(VIOLATED, best, {"depth": params.depth, "x_step": str(x_grid.step)})
    return CheckerVerdict(NO_VIOLATION, None, {"depth": params.depth, "x_step": str(x_grid.step)})


def _check_fn_callable(f, x_grid: Grid1D, params: CheckerParams, lower: bool) -> CheckerVerdict:
    """Semicontinuity of a pointwise-evaluable function: probe shrinking
    windows around each grid point and run the single-point check there."""
    import types

    pts = list(x_grid.points)
    mode = "exact" if pts and isinstance(pts[0], (Fraction, int)) else "float"
    shim = types.SimpleNamespace(
        mode=mode, x_domain=Interval.of(x_grid.lo, x_grid.hi)
    )
    best = None
    res = {"depth": params.depth, "x_step": str(x_grid.step)}
    for x in pts:
        probes = []
        seen = set()
        for layer in _windows(shim, x, params):
            for z in layer:
                key = z if isinstance(z, (Fraction, ExactScalar, int)) else float(z)
                if key not in seen:
                    seen.add(key)
                    probes.append(z)
        xs = [x] + probes
        vals = [f(z) for z in xs]
        vals = [v if isinstance(v, ExtReal) else ExtReal(v) for v in vals]
        verdict = _check_fn_at(vals, xs, x, params, lower)
        if verdict.violated and (best is None or float(verdict.witness.gap) > float(best.gap)):
            best = verdict.witness
    if best is not None:
        return CheckerVerdict(VIOLATED, best, res)
    return CheckerVerdict(NO_VIOLATION, None, res)


def check_usc_fn(f_values, x_grid: Grid1D, params: CheckerParams = CheckerParams()) -> CheckerVerdict:
    """Upper semicontinuity via negation of the lsc check."""
    if callable(f_values):
        return _check_fn_callable(f_values, x_grid, params, lower=False)
    neg = [-(v if isinstance(v, ExtReal) else ExtReal(v)) for v in f_values]
    verdict = check_lsc_fn(neg, x_grid, params)
    if verdict.witness is None:
        return verdict
    w = verdict.witness
    flipped = Witness(
        kind="usc-fn",
        x=w.x,
        gap=w.gap,
        pairs=tuple((xx, -vv) for xx, vv in w.pairs),
        data={"value": -w.data["value"], "window_min_max": -w.data["window_max_min"]},
    )
    return CheckerVerdict(verdict.status, flipped, verdict.resolution)


# ---------------------------------------------------------------------------
# value-function transfer properties


def check_fptusc(p, x, params: CheckerParams) -> CheckerVerdict:
    """Feasible-path-transfer usc at x, checked through its equivalence
    with upper semicontinuity of the sampled value function: Violated
    when every shrinking window around x contains a point whose value
    stays above the value at x by a uniform gap."""
    grid = _require_grid(params)
    cache = _ValueCache(p, grid)
    windows = _windows(p, x, params)
    _check_dom_neighborhood(cache, x, windows)
    mode = _mode_of(p)
    v0 = cache.value(x)
    if v0.is_pos_inf:
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params),
                              note="value at x is +inf; nothing exceeds it")
    floor = None  # min over depths of the window maximum
    maxes = []
    pairs = []
    for pts in windows:
        if not pts:
            continue
        zmax = max(pts, key=lambda z: (cache.value(z),))
        mk = cache.value(zmax)
        maxes.append(mk)
        pairs.append((zmax, cache.argmin(zmax)))
        if floor is None or mk < floor:
            floor = mk
    if floor is None or not v0 < floor:
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    gap = _half(floor, v0, mode)
    if not _gap_positive(gap, mode, params.min_gap):
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    if not _converged(maxes, gap):
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params),
                              note="window estimate still moving at max depth")
    gamma = v0.finite + gap
    w = Witness(
        kind="usc-value",
        x=x,
        gap=gap,
        pairs=tuple(pairs),
        data={"gamma": gamma, "value_at_x": v0, "y_at_x": cache.argmin(x)},
    )
    return CheckerVerdict(VIOLATED, w, _resolution(p, params))


def check_lisc(p, x, params: CheckerParams) -> CheckerVerdict:
    """Lower inf-semicontinuity at x: Violated when a sampled feasible
    sequence (x_n, y_n) -> x keeps the objective below a level that every
    sampled feasible action at x exceeds."""
    grid = _require_grid(params)
    cache = _ValueCache(p, grid)
    windows = _windows(p, x, params)
    _check_dom_neighborhood(cache, x, windows)
    mode = _mode_of(p)
    v0 = cache.value(x)
    ceiling = None  # max over depths of the window minimum (sup along the sequence)
    mins = []
    pairs = []
    for pts in windows:
        if not pts:
            continue
        zmin = min(pts, key=lambda z: (cache.value(z),))
        mk = cache.value(zmin)
        y = cache.argmin(zmin)
        if y is None:
            # no feasible action at the best window point: cannot extend
            # the candidate sequence through this depth
            return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params),
                                  note="feasibility gap in the window schedule")
        mins.append(mk)
        pairs.append((zmin, y))
        if ceiling is None or ceiling < mk:
            ceiling = mk
    if ceiling is None or not ceiling < v0:
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    gap = _half(v0, ceiling, mode)
    if not _gap_positive(gap, mode, params.min_gap):
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    if not _converged(mins, gap):
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params),
                              note="window estimate still moving at max depth")
    if ceiling.is_neg_inf:
        lam = v0.finite - gap if v0.is_finite else 0
    else:
        lam = ceiling.finite + gap
    w = Witness(
        kind="lisc",
        x=x,
        gap=gap,
        pairs=tuple(pairs),
        data={"lambda": lam, "value_at_x": v0, "sequence_sup": ceiling},
    )
    return CheckerVerdict(VIOLATED, w, _resolution(p, params))


def check_lmsc(p, x, params: CheckerParams) -> CheckerVerdict:
    """Lower min-semicontinuity: value-function lsc at x plus sampled
    attainment.  Attainment failure is certified only against a certified
    lower value bound (closed form, or exact-mode computation); plain
    float mode without a bound yields NotApplicable for that half."""
    lisc = check_lisc(p, x, params)
    if lisc.violated:
        return lisc
    grid = _require_grid(params)
    mode = _mode_of(p)
    v0 = value_at(p, x, grid)
    if params.value_ref is None:
        if mode == "exact":
            # no certified bound: exact arithmetic alone cannot certify
            # that a strictly smaller feasible value exists
            return CheckerVerdict(NOT_APPLICABLE, None, _resolution(p, params),
                                  note="no certified lower bound for attainment")
        return CheckerVerdict(NOT_APPLICABLE, None, _resolution(p, params),
                              note="attainment not certifiable in float mode without a bound")
    lb = params.value_ref(x)
    lb = lb if isinstance(lb, ExtReal) else ExtReal(lb)
    if v0.is_pos_inf and lb.is_pos_inf:
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    attained = not lb < v0
    if not attained and mode == "float":
        attained = float(v0) - float(lb) <= params.attain_tol
    if attained:
        return CheckerVerdict(NO_VIOLATION, None, _resolution(p, params))
    gap = _half(v0, lb, mode)
    w = Witness(
        kind="attainment",
        x=x,
        gap=gap,
        pairs=(),
        data={"sampled_min": v0, "lower_bound": lb},
    )
    return CheckerVerdict(VIOLATED, w, _resolution(p, params))


# ---------------------------------------------------------------------------
# inf-compactness


def _dist_to_sample(y, ys) -> float:
    if isinstance(ys, np.ndarray):
        if ys.size == 0:
            return math.inf
        return float(np.min(np.abs(ys - float(y))))
    if not ys:
        return math.inf
    return min(abs(float(y) - float(z)) for z in ys)


def _bounded_pairs(p, z, grid, lam_bar: float):
    """Sampled feasible actions at z with objective <= lam_bar (floats)."""
    ys, vals = feasible_sample(p, z, grid)
    if isinstance(vals, np.ndarray):
        keep = vals <= lam_bar
        return ys[keep], vals[keep]
    out_y, out_v = [], []
    for y, v in zip(ys, vals):
        if not v.is_pos_inf and float(v) <= lam_bar:
            out_y.append(y)
            out_v.append(v)
    return out_y, out_v


def check_kn_inf_compact(p, x, params: CheckerParams) -> CheckerVerdict:
    """Joint lsc of the objective on the sampled graph near x, plus
    clustering of bounded-value feasible sequences inside the feasible
    set at x.  Cluster candidates (labeled witness targets) are tried
    first; then a farthest-point scan; then, for problems with a
    truncated action space, an escape-to-infinity scan past the box."""
    grid = _require_grid(params)
    cache = _ValueCache(p, grid)
    windows = _windows(p, x, params)
    _check_dom_neighborhood(cache, x, windows)
    mode = _mode_of(p)
    res = _resolution(p, params)

    lsc = _check_graph_lsc(p, x, params, windows)
    if lsc is not None:
        return CheckerVerdict(VIOLATED, lsc, res)

    v0 = cache.value(x)
    lam_bar = (float(v0) + 1.0) if v0.is_finite else 1.0
    phi_x_ys, _ = feasible_sample(p, x, grid)
    r = 3.0 * float(grid.step)

    # (1) labeled cluster targets
    for cand in params.cluster_candidates:
        d = _dist_to_sample(cand, phi_x_ys)
        if d <= r:
            continue
        pairs = []
        ok = True
        for pts in windows:
            found = None
            for z in pts:
                ys, vals = _bounded_pairs(p, z, grid, lam_bar)
                n = ys.size if isinstance(ys, np.ndarray) else len(ys)
                if n == 0:
                    continue
                if isinstance(ys, np.ndarray):
                    i = int(np.argmin(np.abs(ys - float(cand))))
                    yb = float(ys[i])
                else:
                    yb = min(ys, key=lambda y: abs(float(y) - float(cand)))
                if abs(float(yb) - float(cand)) <= r:
                    found = (z, yb)
                    break
            if found is None:
                ok = False
                break
            pairs.append(found)
        if ok and pairs:
            w = Witness(
                kind="kn-cluster",
                x=x,
                gap=d - r,
                pairs=tuple(pairs),
                data={"candidate": cand, "radius": r, "lam_bar": lam_bar,
                      "candidate_distance": d},
            )
            return CheckerVerdict(VIOLATED, w, res)

    # (2) farthest bounded-value point per depth
    pairs = []
    min_dist = None
    for pts in windows:
        best = None  # (dist, z, y)
        for z in pts:
            ys, _ = _bounded_pairs(p, z, grid, lam_bar)
            n = ys.size if isinstance(ys, np.ndarray) else len(ys)
            if n == 0:
                continue
            if isinstance(ys, np.ndarray):
                dists = np.abs(ys[:, None] - np.asarray(
                    [float(t) for t in np.atleast_1d(phi_x_ys)], dtype=np.float64)[None, :])
                dmin = dists.min(axis=1)
                i = int(np.argmax(dmin))
                cand = (float(dmin[i]), z, float(ys[i]))
            else:
                scored = [(_dist_to_sample(y, phi_x_ys), y) for y in ys]
                dd, yy = max(scored, key=lambda t: t[0])
                cand = (dd, z, yy)
            if best is None or cand[0] > best[0]:
                best = cand
        if best is None:
            pairs = []
            break
        pairs.append((best[1], best[2]))
        if min_dist is None or best[0] < min_dist:
            min_dist = best[0]
    if pairs and min_dist is not None and min_dist > r:
        w = Witness(
            kind="kn-no-cluster",
            x=x,
            gap=min_dist - r,
            pairs=tuple(pairs),
            data={"radius": r, "lam_bar": lam_bar, "min_distance": min_dist},
        )
        return CheckerVerdict(VIOLATED, w, res)

    # (3) escape past the truncation box
    if getattr(p, "y_truncated", False):
        w = _check_escape(p, x, params, windows, lam_bar)
        if w is not None:
            return CheckerVerdict(VIOLATED, w, res)

    return CheckerVerdict(NO_VIOLATION, None, res)


def _graph_probe_offsets(p, params: CheckerParams, dk):
    mode = _mode_of(p)
    J = params.window_points
    offs = [_scale(dk, Fraction(j, J)) for j in range(1, J + 1)]
    out = []
    for o in offs:
        out.extend((o, -o))
    if mode == "exact" and params.irrational_probes:
        for o in offs:
            io = SQRT2 * _scale(o, Fraction(1, 2))
            out.extend((io, -io))
    return out


def _check_graph_lsc(p, x, params: CheckerParams, windows) -> Optional[Witness]:
    """lsc of u on the sampled graph near {x} x Phi(x): for a subsample
    of feasible actions, compare u(x, y) against the minimum of u over
    nearby feasible graph points at every depth."""
    grid = _require_grid(params)
    mode = _mode_of(p)
    d0 = _delta0(params, mode)
    ys, vals = feasible_sample(p, x, grid)
    n = ys.size if isinstance(ys, np.ndarray) else len(ys)
    if n == 0:
        return None
    idx = range(n) if n <= params.graph_subsample else [
        round(i * (n - 1) / (params.graph_subsample - 1))
        for i in range(params.graph_subsample)
    ]
    best = None
    for i in idx:
        y0 = ys[i] if not isinstance(ys, np.ndarray) else float(ys[i])
        v = u_at(p, x, y0)
        if not v.is_finite and not v.is_pos_inf:
            continue
        worst_min = None
        mins = []
        pairs = []
        ok = True
        for k, xpts in enumerate(windows):
            dk = _scale(d0, Fraction(1, 2 ** k))
            yoffs = _graph_probe_offsets(p, params, dk)
            mk = None
            arg = None
            for z in list(xpts) + [x]:
                for yo in yoffs + ([0] if z is not x else []):
                    yq = y0 + yo
                    if z is x and (yo == 0):
                        continue
                    if not p.y_domain.contains(yq):
                        continue
                    if not phi_contains(p, z, yq):
                        continue
                    uv = u_at(p, z, yq)
                    if mk is None or uv < mk:
                        mk = uv
                        arg = (z, yq)
            if mk is None:
                ok = False
                break
            mins.append(mk)
            pairs.append(arg)
            if worst_min is None or worst_min < mk:
                worst_min = mk
            if not mk < v:
                ok = False
                break
        if not ok or worst_min is None:
            continue
        gap = _half(v, worst_min, mode)
        if not _gap_positive(gap, mode, params.min_gap):
            continue
        if not _converged(mins, gap):
            continue
        cand = Witness(
            kind="kn-graph-lsc",
            x=x,
            gap=gap,
            pairs=tuple(pairs),
            data={"y": y0, "value": v, "window_max_min": worst_min},
        )
        if best is None or float(gap) > float(best.gap):
            best = cand
    return best


def _strip_sample(p, z, lo: float, hi: float, params: CheckerParams):
    from .problem import resolve_hints

    ys = np.linspace(lo, hi, params.strip_points)
    extras = [float(h) for h in resolve_hints(p if not isinstance(p, ModifiedProblem) else p.base, z)
              if lo <= float(h) <= hi]
    if extras:
        ys = np.unique(np.concatenate([ys, np.asarray(extras)]))
    return ys


def _check_escape(p, x, params: CheckerParams, windows, lam_bar: float) -> Optional[Witness]:
    """For problems whose true action space extends past the working box:
    Violated when every doubling of the box still contains feasible
    bounded-value points at window parameters, i.e. the bounded-value
    sequence escapes to infinity."""
    hi = float(p.y_domain.hi)
    flat = [z for pts in reversed(windows) for z in pts]  # deepest first
    pairs = []
    slack = None
    for j in range(1, params.cluster_expansions + 1):
        lo_j, hi_j = hi * 2 ** (j - 1), hi * 2 ** j
        found = None
        for z in flat:
            ys = _strip_sample(p, z, lo_j, hi_j, params)
            base = p.base if isinstance(p, ModifiedProblem) else p
            from .expr import eval_expr_vec
            feas = base.phi.mask_vec({"x": float(z)}, ys)
            if not feas.any():
                continue
            ysf = ys[feas]
            with np.errstate(all="ignore"):
                vals = eval_expr_vec(base.u, {"x": float(z), "y": ysf})
            good = vals <= lam_bar
            if not good.any():
                continue
            i = int(np.argmin(vals))
            found = (float(z), float(ysf[i]), float(vals[i]))
            break
        if found is None:
            return None
        pairs.append((found[0], found[1]))
        s = lam_bar - found[2]
        if slack is None or s < slack:
            slack = s
    if not pairs:
        return None
    return Witness(
        kind="kn-escape",
        x=x,
        gap=slack if slack and slack > 0 else params.min_gap,
        pairs=tuple(pairs),
        data={"lam_bar": lam_bar, "box_hi": hi,
              "expansions": params.cluster_expansions},
    )


def check_k_inf_compact(p, K, lam, params: CheckerParams) -> CheckerVerdict:
    """Compactness of the sampled level set {(x, y) : x in K, y feasible,
    u <= lam}: Violated on unboundedness past the working box at every
    expansion, or on a sampled closedness failure (a limit point outside
    the set by a margin)."""
    grid = _require_grid(params)
    mode = _mode_of(p)
    res = _resolution(p, params)
    lo_k, hi_k = float(K.lo), float(K.hi)
    span = hi_k - lo_k
    xs = list(np.linspace(lo_k, hi_k, 201))
    # dyadic probes catch escapes concentrating near a single parameter
    for m in range(1, 26):
        for s in (2.0 ** -m, -(2.0 ** -m)):
            if lo_k <= s <= hi_k:
                xs.append(s)
    if lo_k <= 0.0 <= hi_k:
        xs.append(0.0)
    xs = sorted(set(xs))
    lam_f = float(lam)

    if getattr(p, "y_truncated", False):
        hi_box = float(p.y_domain.hi)
        pairs = []
        slack = None
        escaped = True
        for j in range(1, params.cluster_expansions + 1):
            lo_j, hi_j = hi_box * 2 ** (j - 1), hi_box * 2 ** j
            found = None
            for z in xs:
                ys = _strip_sample(p, z, lo_j, hi_j, params)
                feas = p.phi.mask_vec({"x": z}, ys)
                if not feas.any():
                    continue
                from .expr import eval_expr_vec
                ysf = ys[feas]
                with np.errstate(all="ignore"):
                    vals = eval_expr_vec(p.u, {"x": z, "y": ysf})
                good = vals <= lam_f
                if not good.any():
                    continue
                i = int(np.argmin(vals))
                found = (z, float(ysf[i]), float(vals[i]))
                break
            if found is None:
                escaped = False
                break
            pairs.append((found[0], found[1]))
            s = lam_f - found[2]
            if slack is None or s < slack:
                slack = s
        if escaped and pairs:
            w = Witness(
                kind="k-unbounded",
                x=None,
                gap=slack if slack and slack > 0 else params.min_gap,
                pairs=tuple(pairs),
                data={"lambda": lam_f, "box_hi": hi_box, "K": [lo_k, hi_k]},
            )
            return CheckerVerdict(VIOLATED, w, res)

    # sampled closedness: coarse complement candidates whose shrinking
    # neighborhoods keep containing level-set points
    def member(z, y) -> bool:
        if not K.contains(z):
            return False
        if not phi_contains(p, z, y):
            return False
        v = u_at(p, z, y)
        return (not v.is_pos_inf) and float(v) <= lam_f

    ys_coarse = list(np.linspace(float(p.y_domain.lo), float(p.y_domain.hi), 41))
    xs_coarse = list(np.linspace(lo_k, hi_k, 41))
    d0 = float(_delta0(params, "float"))
    for z in xs_coarse:
        for y in ys_coarse:
            if member(z, y):
                continue
            feas = phi_contains(p, z, y)
            v = u_at(p, z, y)
            if feas and v.is_finite and float(v) <= lam_f:
                continue  # only excluded by K: not a closedness issue
            margin = (float(v) - lam_f) if feas and v.is_finite else None
            pairs = []
            ok = True
            for k in range(params.depth + 1):
                dk = d0 * 2.0 ** -k
                got = None
                for i in range(1, params.window_points + 1):
                    o = dk * i / params.window_points
                    for zz, yy in ((z + o, y), (z - o, y), (z, y + o), (z, y - o),
                                   (z + o, y + o), (z - o, y - o),
                                   (z + o, y - o), (z - o, y + o)):
                        if member(zz, yy):
                            got = (zz, yy)
                            break
                    if got:
                        break
                if got is None:
                    ok = False
                    break
                pairs.append(got)
            if not ok:
                continue
            # q is a sampled limit point of the level set yet outside it
            if margin is not None and margin <= params.min_gap:
                continue  # grid quantization around a continuous boundary
            gap = margin if margin is not None else _infeasibility_gap(p, z, y)
            if gap is None or gap <= 0:
                gap = params.min_gap
            w = Witness(
                kind="k-not-closed",
                x=z,
                gap=gap,
                pairs=tuple(pairs),
                data={"y": y, "lambda": lam_f, "feasible": feas},
            )
            return CheckerVerdict(VIOLATED, w, res)
    return CheckerVerdict(NO_VIOLATION, None, res)


def _infeasibility_gap(p, z, y) -> Optional[float]:
    base = p.base if isinstance(p, ModifiedProblem) else p
    iv = base.phi.interval_at_env({"x": z}, "float") if hasattr(base.phi, "interval_at_env") else None
    if iv is None or iv.is_empty:
        return None
    lo, hi = float(iv.lo), float(iv.hi)
    if y < lo:
        return lo - y
    if y > hi:
        return y - hi
    return None  # on a half-open boundary: outside by flags, distance 0


def characterize_continuity(p, x, params: CheckerParams) -> dict:
    """Runs the transfer checkers plus direct semicontinuity checks on
    the sampled value function near x; the consistency flag asserts that
    each transfer verdict matches its direct counterpart."""
    grid = _require_grid(params)
    fpt = check_fptusc(p, x, params)
    lisc = check_lisc(p, x, params)
    lmsc = check_lmsc(p, x, params)
    windows = _windows(p, x, params)
    xs = sorted({x} | {z for pts in windows for z in pts}, key=float)
    cache = _ValueCache(p, grid)
    vals = [cache.value(z) for z in xs]
    lsc_direct = _check_fn_at(vals, xs, x, params, lower=True)
    usc_direct = _check_fn_at(vals, xs, x, params, lower=False)
    consistent = (fpt.violated == usc_direct.violated) and (
        lisc.violated == lsc_direct.violated
    )
    return {
        "x": x,
        "fptusc": fpt,
        "lisc": lisc,
        "lmsc": lmsc,
        "value_lsc": lsc_direct,
        "value_usc": usc_direct,
        "consistent": consistent,
    }


class _PointSet:
    """Duck-typed stand-in for Grid1D over an irregular point list."""

    def __init__(self, pts):
        self._pts = list(pts)
        self.step = min(
            (abs(b - a) for a, b in zip(self._pts, self._pts[1:])), default=0
        )

    @property
    def points(self):
        return self._pts


def _check_fn_at(vals, xs, x, params: CheckerParams, lower: bool) -> CheckerVerdict:
    """Direct lsc/usc check of a sampled function at the single point x."""
    seq = vals if lower else [-v for v in vals]
    i = xs.index(x)
    mode = "exact" if isinstance(x, (Fraction, int, ExactScalar)) else "float"
    d0 = _delta0(params, mode)
    fi = seq[i]
    worst_min = None
    mins = []
    pairs = []
    for k in range(params.depth + 1):
        dk = _scale(d0, Fraction(1, 2 ** k))
        window = [j for j in range(len(xs)) if j != i and abs(xs[j] - x) <= dk]
        if not window:
            # cannot shrink further: insufficient evidence for a violation
            return CheckerVerdict(NO_VIOLATION, None, _res_fn(params))
        jmin = min(window, key=lambda j: (seq[j],))
        mk = seq[jmin]
        mins.append(mk)
        pairs.append((xs[jmin], mk if lower else -mk))
        if worst_min is None or worst_min < mk:
            worst_min = mk
        if not mk < fi:
            return CheckerVerdict(NO_VIOLATION, None, _res_fn(params))
    if worst_min is None:
        return CheckerVerdict(NO_VIOLATION, None, _res_fn(params))
    gap = _half(fi, worst_min, mode)
    if not _gap_positive(gap, mode, params.min_gap):
        return CheckerVerdict(NO_VIOLATION, None, _res_fn(params))
    if not _converged(mins, gap):
        return CheckerVerdict(NO_VIOLATION, None, _res_fn(params),
                              note="window estimate still moving at max depth")
    kind = "lsc-fn" if lower else "usc-fn"
    w = Witness(kind=kind, x=x, gap=gap, pairs=tuple(pairs),
                data={"value": fi if lower else -fi})
    return CheckerVerdict(VIOLATED, w, _res_fn(params))


def _res_fn(params: CheckerParams) -> dict:
    return {"depth": params.depth, "window_points": params.window_points}


# ---------------------------------------------------------------------------
# witness replay


def replay_witness(p, witness: Witness, params: CheckerParams):
    """Recompute the violating inequality from the recorded witness.

    Returns (ok, margin): ok means the inequality reproduces with margin
    at least the recorded gap (exactly in exact mode, within 1e-12 in
    float mode)."""
    grid = _require_grid(params)
    mode = _mode_of(p) if hasattr(p, "mode") else "float"
    kind = witness.kind
    if kind == "usc-value":
        v0 = value_at(p, witness.x, grid)
        gamma = witness.data["gamma"]
        lo = min((value_at(p, z, grid) for z, _ in witness.pairs))
        margin = _min_scalar(
            _sub(lo, gamma, mode), _sub(gamma, v0, mode)
        )
    elif kind == "lisc":
        lam = witness.data["lambda"]
        sup = None
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            v = u_at(p, z, y)
            if sup is None or sup < v:
                sup = v
        v0 = value_at(p, witness.x, grid)
        margin = _min_scalar(_sub(lam, sup, mode), _sub(v0, lam, mode))
    elif kind == "attainment":
        v0 = value_at(p, witness.x, grid)
        lb = witness.data["lower_bound"]
        margin = _half(v0, lb if isinstance(lb, ExtReal) else ExtReal(lb), mode)
    elif kind == "kn-graph-lsc":
        y0 = witness.data["y"]
        v = u_at(p, witness.x, y0)
        hi = None
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            uv = u_at(p, z, y)
            if hi is None or hi < uv:
                hi = uv
        margin = _half(v, hi, mode)
    elif kind == "kn-cluster":
        cand = witness.data["candidate"]
        r = witness.data["radius"]
        lam_bar = witness.data["lam_bar"]
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            if float(u_at(p, z, y)) > lam_bar:
                return False, None
            if abs(float(y) - float(cand)) > r:
                return False, None
        ys, _ = feasible_sample(p, witness.x, grid)
        margin = _dist_to_sample(cand, ys) - r
    elif kind == "kn-no-cluster":
        r = witness.data["radius"]
        lam_bar = witness.data["lam_bar"]
        ys, _ = feasible_sample(p, witness.x, grid)
        dmin = None
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            if float(u_at(p, z, y)) > lam_bar:
                return False, None
            d = _dist_to_sample(y, ys)
            if dmin is None or d < dmin:
                dmin = d
        margin = (dmin - r) if dmin is not None else None
    elif kind == "kn-escape":
        lam_bar = witness.data["lam_bar"]
        hi_box = witness.data["box_hi"]
        slack = None
        last = hi_box
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            if float(y) < last:
                return False, None
            last = float(y)
            s = lam_bar - float(u_at(p, z, y))
            if slack is None or s < slack:
                slack = s
        margin = slack
    elif kind in ("lsc-fn", "usc-fn"):
        # pairs carry (x, value) snapshots for plain grid functions
        sign = 1 if kind == "lsc-fn" else -1
        fx = witness.data["value"]
        fx = fx if isinstance(fx, ExtReal) else ExtReal(fx)
        hi = None
        for _, v in witness.pairs:
            v = v if isinstance(v, ExtReal) else ExtReal(v)
            v = v if sign == 1 else -v
            if hi is None or hi < v:
                hi = v
        base = fx if sign == 1 else -fx
        margin = _half(base, hi, mode)
    elif kind == "k-unbounded":
        lam_f = witness.data["lambda"]
        hi_box = witness.data["box_hi"]
        slack = None
        last = hi_box
        for z, y in witness.pairs:
            if not phi_contains(p, z, y):
                return False, None
            if float(y) < last:
                return False, None
            last = float(y)
            s = lam_f - float(u_at(p, z, y))
            if slack is None or s < slack:
                slack = s
        margin = slack
    elif kind == "k-not-closed":
        lam_f = witness.data["lambda"]
        y = witness.data["y"]
        for zz, yy in witness.pairs:
            if not phi_contains(p, zz, yy):
                return False, None
            if float(u_at(p, zz, yy)) > lam_f:
                return False, None
        if witness.data.get("feasible"):
            margin = float(u_at(p, witness.x, y)) - lam_f
        else:
            margin = witness.gap
    else:
        raise ValidationError(f"unknown witness kind {kind!r}")
    if margin is None:
        return False, None
    ok = _ge(margin, witness.gap, mode)
    return ok, margin


def _sub(a, b, mode):
    a = a if isinstance(a, ExtReal) else ExtReal(a)
    b = b if isinstance(b, ExtReal) else ExtReal(b)
    if a.is_pos_inf or b.is_neg_inf:
        return POS_INF
    return a - b


def _min_scalar(a, b):
    a = a if isinstance(a, ExtReal) else ExtReal(a)
    b = b if isinstance(b, ExtReal) else ExtReal(b)
    return a if a < b else b


def _ge(margin, gap, mode) -> bool:
    m = margin if isinstance(margin, ExtReal) else ExtReal(margin)
    g = gap if isinstance(gap, ExtReal) else ExtReal(gap)
    if mode == "exact":
        return not m < g
    return float(m) >= float(g) - 1e-12
