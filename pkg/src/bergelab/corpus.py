"""Registry of counterexample problems with labeled ground truth.

Each fixture ships as a JSON data file (problem-file schema plus a labels
block) and carries a closed-form value function, a description of the
solution sets, and expected property verdicts at named base points.
corpus_verify recomputes everything at the fixture's minimum resolution
and reports agreement; it is the executable regression suite for the
checker stack.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional, Tuple

from .checkers import (
    NOT_APPLICABLE,
    CheckerParams,
    characterize_continuity,
    check_fptusc,
    check_kn_inf_compact,
    check_lisc,
    check_lmsc,
    replay_witness,
)
from .errors import UnknownFixture, ValidationError
from .expr import Expr, eval_expr, expr_from_json
from .extreal import ExtReal
from .grid import Grid1D
from .loader import grid_from_json, parse_scalar, problem_from_json
from .problem import ProblemSpec, phi_contains, u_at, value_at

# stable ordering: the order the examples build on each other, from the
# unattained-infimum warm-up to the escaping-minimizer finale
ORDER = (
    "lisc-not-lmsc",
    "lmsc-insufficient",
    "lsc-lmsc-independence",
    "optimum-counterexample",
    "fptusc-not-epi-usc",
    "vasquez",
)

PROPERTIES = ("FPTusc", "lisc", "lmsc", "KN")

# fails-propagation: if the key property fails, every listed one must too
_IMPLIES = {"lisc": ("lmsc", "KN"), "lmsc": ("KN",)}


@dataclass(frozen=True)
class Label:
    prop: str
    point: object
    status: str  # "holds" | "fails"


@dataclass(frozen=True)
class SubCase:
    name: str
    problem: ProblemSpec
    closed_form_value: Expr
    closed_form_solution: Optional[Expr]
    solutions_note: str
    value_tolerance: object  # "exact" | ("absolute", t) | ("lipschitz", L)
    labels: Tuple[Label, ...]
    cluster_candidates: Tuple = ()


@dataclass(frozen=True)
class Fixture:
    name: str
    title: str
    notes: str
    x_grid: Grid1D
    y_grid: Grid1D
    depth: int
    per_property: dict  # property -> {"depth": n} overrides
    subcases: Tuple[SubCase, ...]

    def value_ref(self, sub: SubCase):
        mode = sub.problem.mode
        return lambda x: eval_expr(sub.closed_form_value, {"x": x}, mode)


def corpus_list() -> list:
    return list(ORDER)


def _load_raw(name: str) -> dict:
    if name not in ORDER:
        raise UnknownFixture(f"no fixture named {name!r}; known: {list(ORDER)}")
    path = resources.files(__package__) / "fixtures" / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def _tolerance(raw):
    if raw == "exact":
        return "exact"
    if isinstance(raw, dict) and "absolute" in raw:
        return ("absolute", float(raw["absolute"]))
    if isinstance(raw, dict) and "lipschitz" in raw:
        return ("lipschitz", float(raw["lipschitz"]))
    raise ValidationError(f"bad value_tolerance {raw!r}")


def _check_label_lattice(labels: Tuple[Label, ...], name: str) -> None:
    by_point = {}
    for lab in labels:
        by_point.setdefault(lab.point, {})[lab.prop] = lab.status
    for point, statuses in by_point.items():
        missing = set(PROPERTIES) - set(statuses)
        if missing:
            raise ValidationError(
                f"{name}: labels at {point} missing {sorted(missing)}"
            )
        for src, targets in _IMPLIES.items():
            if statuses[src] == "fails":
                for t in targets:
                    if statuses[t] != "fails":
                        raise ValidationError(
                            f"{name}: {src} fails at {point} forces {t} to fail"
                        )


def _subcase_from_json(raw: dict) -> SubCase:
    problem = problem_from_json(raw["problem"])
    mode = problem.mode
    labels = tuple(
        Label(d["property"], parse_scalar(d["point"], mode), d["status"])
        for d in raw.get("labels", [])
    )
    _check_label_lattice(labels, raw.get("name", "?"))
    solution = raw.get("closed_form_solution")
    return SubCase(
        name=raw["name"],
        problem=problem,
        closed_form_value=expr_from_json(raw["closed_form_value"]),
        closed_form_solution=None if solution is None else expr_from_json(solution),
        solutions_note=raw.get("solutions_note", ""),
        value_tolerance=_tolerance(raw.get("value_tolerance", "exact")),
        labels=labels,
        cluster_candidates=tuple(
            parse_scalar(c, mode) for c in raw.get("cluster_candidates", [])
        ),
    )


def corpus_instantiate(name: str) -> Fixture:
    raw = _load_raw(name)
    subcases = tuple(_subcase_from_json(s) for s in raw["subcases"])
    if not subcases:
        raise ValidationError(f"{name}: fixture has no subcases")
    mode = subcases[0].problem.mode
    res = raw["min_resolution"]
    return Fixture(
        name=raw["name"],
        title=raw.get("title", ""),
        notes=raw.get("notes", ""),
        x_grid=grid_from_json(res["x_grid"], mode),
        y_grid=grid_from_json(res["y_grid"], mode),
        depth=int(res.get("depth", 12)),
        per_property=res.get("per_property", {}),
        subcases=subcases,
    )


# ---------------------------------------------------------------------------
# verification


def _as_ext(v) -> ExtReal:
    return v if isinstance(v, ExtReal) else ExtReal(v)


def _value_error(v: ExtReal, ref: ExtReal) -> float:
    if v == ref:
        return 0.0
    if not (v.is_finite and ref.is_finite):
        return float("inf")
    return abs(float(v) - float(ref))


def _tol_bound(tol, y_grid: Grid1D) -> float:
    if tol == "exact":
        return 0.0
    kind, c = tol
    if kind == "absolute":
        return c
    return c * float(y_grid.step)  # lipschitz bound x sampling step


def _verify_values(fx: Fixture, sub: SubCase) -> dict:
    ref = fx.value_ref(sub)
    bound = _tol_bound(sub.value_tolerance, fx.y_grid)
    max_err, argmax = 0.0, None
    exact_ok = True
    for x in fx.x_grid:
        v = value_at(sub.problem, x, fx.y_grid)
        r = _as_ext(ref(x))
        if sub.value_tolerance == "exact":
            if not v == r:
                exact_ok = False
                max_err = float("inf")
                argmax = x
                break
            continue
        err = _value_error(v, r)
        if err > max_err:
            max_err, argmax = err, x
    ok = exact_ok and max_err <= bound
    out = {"max_error": max_err, "bound": bound, "ok": ok}
    if argmax is not None:
        out["worst_x"] = argmax
    return out


def _verify_solution(fx: Fixture, sub: SubCase) -> Optional[dict]:
    if sub.closed_form_solution is None:
        return None
    ref = fx.value_ref(sub)
    mode = sub.problem.mode
    bound = _tol_bound(sub.value_tolerance, fx.y_grid)
    for x in fx.x_grid:
        y = eval_expr(sub.closed_form_solution, {"x": x}, mode)
        if not phi_contains(sub.problem, x, y):
            return {"ok": False, "x": x, "reason": "solution infeasible"}
        err = _value_error(u_at(sub.problem, x, y), _as_ext(ref(x)))
        if err > bound:
            return {"ok": False, "x": x, "reason": f"objective off by {err}"}
    return {"ok": True}


_CHECKS = {
    "FPTusc": check_fptusc,
    "lisc": check_lisc,
    "lmsc": check_lmsc,
    "KN": check_kn_inf_compact,
}


def _label_params(fx: Fixture, sub: SubCase, prop: str,
                  base: CheckerParams) -> CheckerParams:
    depth = fx.per_property.get(prop, {}).get("depth", base.depth)
    return replace(
        base,
        depth=depth,
        value_ref=fx.value_ref(sub) if prop == "lmsc" else None,
        cluster_candidates=sub.cluster_candidates if prop == "KN" else (),
    )


def _verify_label(fx: Fixture, sub: SubCase, lab: Label,
                  base: CheckerParams) -> dict:
    params = _label_params(fx, sub, lab.prop, base)
    verdict = _CHECKS[lab.prop](sub.problem, lab.point, params)
    agrees = verdict.violated == (lab.status == "fails")
    out = {
        "property": lab.prop,
        "point": lab.point,
        "expected": lab.status,
        "status": verdict.status,
        "agrees": agrees,
    }
    if verdict.violated:
        ok, margin = replay_witness(sub.problem, verdict.witness, params)
        out["witness_kind"] = verdict.witness.kind
        out["replay_ok"] = ok
        out["replay_margin"] = margin
        out["ok"] = agrees and ok
    else:
        out["ok"] = agrees
    return out


def _characterize_depth(fx: Fixture) -> int:
    depths = [fx.depth] + [
        d.get("depth", fx.depth) for d in fx.per_property.values()
    ]
    return min(depths)


def corpus_verify(name: str, params: Optional[CheckerParams] = None) -> dict:
    """Recompute one fixture end to end: value profile against the closed
    form, labeled checker verdicts (with witness replay on violations),
    and transfer-vs-direct consistency at each labeled base point."""
    fx = corpus_instantiate(name)
    base = params if params is not None else CheckerParams(
        y_grid=fx.y_grid, depth=fx.depth
    )
    if base.y_grid is None:
        base = replace(base, y_grid=fx.y_grid)
    report = {"fixture": fx.name, "title": fx.title, "subcases": []}
    all_ok = True
    for sub in fx.subcases:
        entry = {"name": sub.name}
        entry["value"] = _verify_values(fx, sub)
        sol = _verify_solution(fx, sub)
        if sol is not None:
            entry["solution"] = sol
        entry["labels"] = [
            _verify_label(fx, sub, lab, base) for lab in sub.labels
        ]
        char_params = replace(
            base, depth=_characterize_depth(fx), value_ref=fx.value_ref(sub)
        )
        points = {lab.point for lab in sub.labels}
        entry["consistent"] = all(
            characterize_continuity(sub.problem, pt, char_params)["consistent"]
            for pt in points
        )
        entry["ok"] = (
            entry["value"]["ok"]
            and (sol is None or sol["ok"])
            and all(l["ok"] for l in entry["labels"])
            and entry["consistent"]
        )
        all_ok = all_ok and entry["ok"]
        report["subcases"].append(entry)
    report["ok"] = all_ok
    return report
