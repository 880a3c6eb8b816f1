"""Command-line front door: solves, checks, corpus runs, reports.

Payload files are byte-reproducible; timestamps live in a sibling
``*.meta.json``.  Exit codes: 0 success, 1 error, 2 when --strict is set
and any check came back Violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .checkers import (
    CheckerParams,
    check_fptusc,
    check_kn_inf_compact,
    check_lisc,
    check_lmsc,
)
from .corpus import ORDER, corpus_instantiate, corpus_list, corpus_verify
from .errors import BergelabError, ComputeError, ConfigError
from .expr import eval_expr
from .grid import Grid1D
from .inventory import (
    backward_induction,
    continuity_modulus,
    exhaustive_value,
    load_inventory_config,
    never_order_bound,
)
from .loader import load_problem, parse_scalar
from .minimax import (
    MinimaxParams,
    check_a_lsc,
    check_b_fptlisc,
    check_b_fptlmsc,
    check_b_uniform_fptusc,
    duality_values,
    load_minimax,
    minimax_profile,
)
from .problem import value_profile
from .reporting import (
    emit_plot_data,
    json_payload,
    render_plot,
    variant_boundary_rows,
    verdict_to_json,
    write_metadata,
    write_payload,
)

_PROPERTY_CHECKS = {
    "FPTusc": check_fptusc,
    "lisc": check_lisc,
    "lmsc": check_lmsc,
    "KN": check_kn_inf_compact,
}

_MINIMAX_CHECKS = {
    "a-lsc": check_a_lsc,
    "b-uniform-fptusc": check_b_uniform_fptusc,
    "b-fptlisc": check_b_fptlisc,
    "b-fptlmsc": check_b_fptlmsc,
}


def workers() -> int:
    raw = os.environ.get("BERGELAB_WORKERS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"BERGELAB_WORKERS must be an integer, got {raw!r}")
    if n < 1:
        raise ConfigError("BERGELAB_WORKERS must be at least 1")
    return n


def _grid_arg(text: str, mode: str) -> Grid1D:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be lo:hi:step, got {text!r}")
    return Grid1D(*(parse_scalar(p, mode) for p in parts))


def _emit(args, name: str, payload: bytes) -> Path:
    out_dir = Path(args.out)
    path = write_payload(out_dir / name, payload)
    write_metadata(out_dir / f"{name}.meta.json", " ".join(sys.argv[1:]))
    return path


def _print(obj) -> None:
    sys.stdout.write(json_payload(obj).decode("ascii"))


# ---------------------------------------------------------------------------
# subcommands


def _resolve_problem(spec):
    """A path to a problem file, or a corpus fixture name (first subcase).
    Returns (problem, default_x_grid, default_y_grid); grids are None for
    plain files."""
    if Path(spec).exists():
        return load_problem(spec), None, None
    if spec in corpus_list():
        fx = corpus_instantiate(spec)
        return fx.subcases[0].problem, fx.x_grid, fx.y_grid
    raise ConfigError(f"{spec!r} is neither a problem file nor a fixture name")


def _cmd_solve(args) -> int:
    p, fx_xg, fx_yg = _resolve_problem(args.problem)
    mode = args.mode or p.mode
    xg = (
        _grid_arg(args.grid, mode)
        if args.grid
        else fx_xg or _domain_grid(p.x_domain, mode)
    )
    yg = (
        _grid_arg(args.ygrid, mode)
        if args.ygrid
        else fx_yg or _domain_grid(p.y_domain, mode)
    )
    prof = value_profile(p, xg, yg, args.eps)
    rows = [
        {"x": x, "value": v, "argmins": list(a)}
        for x, v, a in zip(xg.points, prof.values, prof.argmins)
    ]
    payload = json_payload({"grid": _grid_json(xg), "profile": rows})
    if "json" in args.format:
        _emit(args, "solve.json", payload)
    if "csv" in args.format:
        csv_path = _emit(args, "solve.csv", _plot_bytes(prof))
        render_plot(csv_path)
    _print({"points": len(rows), "out": str(Path(args.out))})
    return 0


def _plot_bytes(profile, extra_rows=None) -> bytes:
    import tempfile

    with tempfile.TemporaryDirectory() as td:
        path = emit_plot_data(profile, Path(td) / "p.csv", extra_rows)
        return path.read_bytes()


def _domain_grid(domain, mode, n: int = 64) -> Grid1D:
    lo, hi = domain.lo, domain.hi
    if not (lo.is_finite and hi.is_finite):
        raise ConfigError("unbounded domain needs an explicit --grid lo:hi:step")
    span = hi.finite - lo.finite
    return Grid1D(lo.finite, hi.finite, span / n if mode == "exact" else float(span) / n)


def _grid_json(g: Grid1D) -> dict:
    return {"lo": g.lo, "hi": g.hi, "step": g.step}


def _cmd_check(args) -> int:
    p, _, fx_yg = _resolve_problem(args.problem)
    mode = args.mode or p.mode
    if args.property not in _PROPERTY_CHECKS:
        raise ConfigError(
            f"unknown property {args.property!r}; expected one of "
            f"{sorted(_PROPERTY_CHECKS)}"
        )
    x = parse_scalar(args.at, mode)
    yg = (
        _grid_arg(args.grid, mode)
        if args.grid
        else fx_yg or _domain_grid(p.y_domain, mode)
    )
    params = CheckerParams(y_grid=yg, depth=args.depth)
    verdict = _PROPERTY_CHECKS[args.property](p, x, params)
    report = {
        "problem": str(args.problem),
        "property": args.property,
        "at": x,
        "verdict": verdict_to_json(verdict),
    }
    _emit(args, "check.json", json_payload(report))
    _print(report)
    return 2 if args.strict and verdict.violated else 0


def _cmd_corpus(args) -> int:
    if args.action == "list":
        _print({"fixtures": corpus_list()})
        return 0
    if args.action == "show":
        fx = corpus_instantiate(_require(args, "name"))
        _print(
            {
                "name": fx.name,
                "title": fx.title,
                "notes": fx.notes,
                "subcases": [
                    {
                        "name": sub.name,
                        "labels": [
                            {"property": l.prop, "point": l.point, "status": l.status}
                            for l in sub.labels
                        ],
                    }
                    for sub in fx.subcases
                ],
            }
        )
        return 0
    names = list(ORDER) if (args.name in (None, "all")) else [args.name]
    with ThreadPoolExecutor(max_workers=workers()) as pool:
        reports = list(pool.map(corpus_verify, names))
    reports.sort(key=lambda r: names.index(r["fixture"]))
    payload = {"reports": reports, "ok": all(r["ok"] for r in reports)}
    _emit(args, "corpus-verify.json", json_payload(payload))
    _print({"fixtures": names, "ok": payload["ok"]})
    return 0 if payload["ok"] else 1


def _require(args, field: str):
    val = getattr(args, field, None)
    if val is None:
        raise ConfigError(f"this action needs a {field.upper()} argument")
    return val


def _cmd_inventory(args) -> int:
    cfg = load_inventory_config(args.config)
    table = backward_induction(cfg.model, cfg.horizon, cfg.grid, cfg.action_step)
    moduli = [continuity_modulus(table, t) for t in range(cfg.horizon + 1)]
    diagnostics = {
        "horizon": cfg.horizon,
        "grid": _grid_json(cfg.grid),
        "modulus_per_stage": moduli,
        "never_order_bound_respected": _below_never_order(cfg, table),
    }
    if args.oracle:
        _oracle_budget(cfg)
        dev = max(
            abs(v - float(exhaustive_value(cfg.model, cfg.horizon, float(x),
                                           cfg.action_step)))
            for x, v in zip(cfg.grid.points, table.values[cfg.horizon])
        )
        diagnostics["oracle_max_deviation"] = dev
    if args.action == "diagnose":
        fine = backward_induction(
            cfg.model,
            cfg.horizon,
            Grid1D(cfg.grid.lo, cfg.grid.hi, cfg.grid.step / 2),
            cfg.action_step / 2,
        )
        diagnostics["modulus_per_stage_refined"] = [
            continuity_modulus(fine, t) for t in range(cfg.horizon + 1)
        ]
        _emit(args, "inventory-diagnose.json", json_payload(diagnostics))
        _print(diagnostics)
        return 0
    boundaries = variant_boundary_rows(cfg.model, cfg.grid)
    if "csv" in args.format:
        csv_path = _emit(args, "inventory.csv", _plot_bytes(table, boundaries))
        render_plot(csv_path)
    if "json" in args.format:
        _emit(args, "inventory.json", json_payload(diagnostics))
    _print(diagnostics)
    return 0


def _oracle_budget(cfg, cap: float = 2e6) -> None:
    """Exhaustive enumeration branches on every feasible order and demand
    atom per stage; refuse configs where that clearly cannot finish."""
    span = float(cfg.grid.hi) - float(cfg.grid.lo)
    branch = (span / cfg.action_step + 2) * len(cfg.model.demand)
    cost = cfg.grid.count * branch ** cfg.horizon
    if cost > cap:
        raise ConfigError(
            "oracle cross-check is exhaustive; use a smaller grid, horizon, "
            f"or coarser action step (estimated {cost:.0f} evaluations)"
        )


def _below_never_order(cfg, table) -> bool:
    for tau in range(cfg.horizon + 1):
        for x, v in zip(cfg.grid.points, table.values[tau]):
            if v > float(never_order_bound(cfg.model, tau, float(x))) + 1e-9:
                return False
    return True


def _minimax_setup(args):
    with open(Path(args.config), "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    mp = load_minimax(args.config)

    def grid(key, domain):
        if key in raw:
            g = raw[key]
            return Grid1D(*(parse_scalar(g[f], mp.mode) for f in ("lo", "hi", "step")))
        return _domain_grid(domain, mp.mode, n=16)

    return mp, grid("a_grid", mp.a_domain), grid("b_grid", mp.b_domain), raw


def _cmd_minimax(args) -> int:
    mp, ag, bg, raw = _minimax_setup(args)
    if args.action == "check":
        if args.property not in _MINIMAX_CHECKS:
            raise ConfigError(
                f"unknown minimax property {args.property!r}; expected one of "
                f"{sorted(_MINIMAX_CHECKS)}"
            )
        x = parse_scalar(_require(args, "at"), mp.mode)
        verdict = _MINIMAX_CHECKS[args.property](
            mp, x, MinimaxParams(a_grid=ag, b_grid=bg,
                                 base=CheckerParams(depth=args.depth))
        )
        report = {"property": args.property, "at": x,
                  "verdict": verdict_to_json(verdict)}
        _emit(args, "minimax-check.json", json_payload(report))
        _print(report)
        return 2 if args.strict and verdict.violated else 0
    xg = (
        _grid_arg(args.grid, mp.mode)
        if args.grid
        else _domain_grid(mp.x_domain, mp.mode, n=16)
    )
    prof = minimax_profile(mp, xg, ag, bg, args.eps)
    report = {
        "grid": _grid_json(xg),
        "f_star": list(prof.f_star),
        "argmin_actions": [list(a) for a in prof.a_star],
    }
    if args.oracle:
        checks = []
        for x in xg:
            minmax, maxmin = duality_values(mp, x, ag, bg)
            checks.append(not minmax < maxmin)
        report["weak_duality_holds"] = all(checks)
        report["oracle_matches"] = [
            _nested_oracle(mp, x, ag, bg) == v for x, v in zip(xg, prof.f_star)
        ]
    if "json" in args.format:
        _emit(args, "minimax.json", json_payload(report))
    if "csv" in args.format:
        csv_path = _emit(args, "minimax.csv", _plot_bytes(prof))
        render_plot(csv_path)
    _print({"points": len(report["f_star"]), "out": str(Path(args.out))})
    return 0


def _nested_oracle(mp, x, ag, bg):
    # direct double loop, bypassing the library's sampling helpers
    best = None
    for a in ag:
        if not mp.phi_A.contains({"x": x}, a, mp.mode):
            continue
        worst = None
        for b in bg:
            if not mp.phi_B.contains({"x": x, "a": a}, b, mp.mode):
                continue
            v = eval_expr(mp.f, {"x": x, "a": a, "b": b}, mp.mode)
            if worst is None or worst < v:
                worst = v
        if worst is not None and (best is None or worst < best):
            best = worst
    return best


def _cmd_plot(args) -> int:
    png = render_plot(args.csv)
    _print({"png": str(png)})
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="bergelab",
        description="Value-function continuity toolkit: solves, checks, reports.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, needs_format=True):
        p.add_argument("--out", default="bergelab-out", help="output directory")
        p.add_argument("--strict", action="store_true",
                       help="exit 2 on any Violated verdict")
        p.add_argument("--mode", choices=("float", "exact"), default=None)
        p.add_argument("--depth", type=int, default=12)
        p.add_argument("--eps", type=float, default=1e-9,
                       help="solution-set tolerance")
        p.add_argument("--grid", default=None, help="x grid as lo:hi:step")
        p.add_argument("--oracle", action="store_true",
                       help="cross-check against brute-force enumeration")
        if needs_format:
            p.add_argument("--format", default="csv,json",
                           type=lambda s: tuple(s.split(",")))

    p = sub.add_parser("solve", help="value profile of a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--ygrid", default=None, help="action grid as lo:hi:step")
    common(p)

    p = sub.add_parser("check", help="run one semicontinuity check at a point")
    p.add_argument("--problem", required=True)
    p.add_argument("--property", required=True)
    p.add_argument("--at", required=True)
    common(p)

    p = sub.add_parser("corpus", help="fixture registry operations")
    p.add_argument("action", choices=("list", "show", "verify"))
    p.add_argument("name", nargs="?", default=None)
    common(p)

    p = sub.add_parser("inventory", help="finite-horizon inventory solver")
    p.add_argument("action", choices=("solve", "diagnose"))
    p.add_argument("--config", required=True)
    common(p)

    p = sub.add_parser("minimax", help="worst-case optimization")
    p.add_argument("action", choices=("solve", "check"))
    p.add_argument("--config", required=True)
    p.add_argument("--property", default=None)
    p.add_argument("--at", default=None)
    common(p)

    p = sub.add_parser("plot", help="render a plot-data CSV to PNG")
    p.add_argument("csv")
    common(p, needs_format=False)

    return top


_DISPATCH = {
    "solve": _cmd_solve,
    "check": _cmd_check,
    "corpus": _cmd_corpus,
    "inventory": _cmd_inventory,
    "minimax": _cmd_minimax,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ComputeError as exc:
        _fail({"module": exc.module, "op": exc.op, "detail": exc.detail})
    except BergelabError as exc:
        _fail({"module": "cli", "op": args.command,
               "detail": f"{type(exc).__name__}: {exc}"})
    except OSError as exc:
        _fail({"module": "cli", "op": args.command, "detail": str(exc)})
    return 1


def _fail(err: dict) -> None:
    sys.stderr.write(json_payload({"error": err}).decode("ascii"))


if __name__ == "__main__":
    sys.exit(main())
