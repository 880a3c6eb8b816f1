"""Deterministic report payloads and plot-ready data files.

Payload bytes are reproducible across runs and worker counts: keys are
sorted, floats use their shortest round-trip form, and anything
time-dependent goes into a separate metadata file that sits next to the
payload.  Plot emission writes long-format CSV (series, x, value) plus a
rendered PNG of the same series.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Tuple

from . import __version__
from .exact import ExactScalar
from .extreal import ExtReal
from .grid import Grid1D
from .inventory import InventoryModel, ValueTable, feasible_orders
from .minimax import MinimaxProfile
from .problem import ValueProfile

PLOT_HEADER = ("series", "x", "value")


def fmt_scalar(v) -> str:
    """Canonical cell text: round-trippable and mode-faithful."""
    if isinstance(v, ExtReal):
        return "+inf" if v.is_pos_inf else "-inf" if v.is_neg_inf else fmt_scalar(v.finite)
    if isinstance(v, float):
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        return repr(float(v))  # shortest round-trip text, numpy-proof
    if isinstance(v, (Fraction, ExactScalar, int)):
        return str(v)
    return str(v)


def _canon(obj):
    """JSON-safe form with deterministic scalar text."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return fmt_scalar(obj)
    if isinstance(obj, (ExtReal, Fraction, ExactScalar)):
        return fmt_scalar(obj)
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj, key=str) if isinstance(obj, (set, frozenset)) else obj
        return [_canon(v) for v in seq]
    return str(obj)


def json_payload(obj) -> bytes:
    return (
        json.dumps(_canon(obj), sort_keys=True, separators=(",", ":")) + "\n"
    ).encode("ascii")


def csv_payload(rows: Iterable[Tuple], header: Tuple[str, ...]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_scalar(c) for c in row])
    return buf.getvalue().encode("ascii")


def write_payload(path, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return path


def write_metadata(path, command: str) -> Path:
    """Run provenance next to the payload; the only non-reproducible file."""
    meta = {
        "command": command,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
        "python": platform.python_version(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# plot data


def _profile_rows(profile) -> list:
    if profile is None:
        return []
    if isinstance(profile, ValueProfile):
        return [
            ("u_star", x, v) for x, v in zip(profile.grid_x.points, profile.values)
        ]
    if isinstance(profile, ValueTable):
        pts = list(profile.grid.points)
        rows = []
        for tau, vals in enumerate(profile.values):
            rows.extend((f"stage_{tau}", x, v) for x, v in zip(pts, vals))
        for t, ys in enumerate(profile.policy, start=1):
            rows.extend((f"policy_stage_{t}", x, y) for x, y in zip(pts, ys))
        return rows
    if isinstance(profile, MinimaxProfile):
        return [
            ("f_star", x, v) for x, v in zip(profile.grid_x.points, profile.f_star)
        ]
    raise TypeError(f"no plot-data layout for {type(profile).__name__}")


def variant_boundary_rows(m: InventoryModel, x_grid: Grid1D) -> list:
    """Upper boundaries of the feasible-order region for the four cap
    layouts (both caps, order cap only, storage cap only, uncapped),
    evaluated with this model's cap values where the layout uses them."""
    rows = []
    layouts = (
        ("both_caps", m.L, m.M),
        ("order_cap", m.L, ExtReal.pos_inf()),
        ("storage_cap", ExtReal.pos_inf(), m.M),
        ("uncapped", ExtReal.pos_inf(), ExtReal.pos_inf()),
    )
    for name, L, M in layouts:
        variant = InventoryModel(
            backorders=m.backorders, L=L, M=M, c1=m.c1, c2=m.c2,
            alpha=m.alpha, h=m.h, demand=m.demand,
        )
        for x in x_grid:
            xf = float(x)
            if not variant.backorders and variant.M < ExtReal(xf):
                continue  # state outside this layout's space
            rows.append((name, x, feasible_orders(variant, xf).hi))
    return rows


def emit_plot_data(profile, path, extra_rows: Optional[list] = None) -> Path:
    """Long-format CSV (series, x, value); an empty profile yields a
    header-only file."""
    rows = _profile_rows(profile)
    if extra_rows:
        rows = rows + list(extra_rows)
    return write_payload(path, csv_payload(rows, PLOT_HEADER))


def _cell_float(text: str) -> float:
    if "/" in text:
        return float(Fraction(text))
    return float(text.replace("+inf", "inf"))


def render_plot(csv_path, png_path=None) -> Path:
    """Draw every series of a plot-data CSV into one PNG next to it."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    png_path = Path(png_path) if png_path else csv_path.with_suffix(".png")
    series: dict = {}
    with open(csv_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            try:
                x = _cell_float(rec["x"])
                v = _cell_float(rec["value"])
            except (ValueError, ZeroDivisionError):
                continue
            if math.isfinite(x) and math.isfinite(v):
                series.setdefault(rec["series"], ([], []))
                series[rec["series"]][0].append(x)
                series[rec["series"]][1].append(v)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in sorted(series):
        xs, vs = series[name]
        ax.plot(xs, vs, marker=".", markersize=3, linewidth=1, label=name)
    if series:
        ax.legend(fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


# ---------------------------------------------------------------------------
# verdict serialization


def witness_to_json(w) -> Optional[dict]:
    if w is None:
        return None
    return {
        "kind": w.kind,
        "x": fmt_scalar(w.x),
        "gap": None if w.gap is None else fmt_scalar(w.gap),
        "pairs": [[fmt_scalar(a), fmt_scalar(b)] for a, b in w.pairs],
        "data": _canon(w.data),
    }


def verdict_to_json(v) -> dict:
    out = {
        "status": v.status,
        "witness": witness_to_json(v.witness),
        "resolution": _canon(v.resolution),
    }
    if v.note:
        out["note"] = v.note
    return out
