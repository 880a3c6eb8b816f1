"""Backward induction against exhaustive enumeration and closed forms."""

import numpy as np
import pytest

from bergelab.errors import (
    InfeasibleOrder,
    StateOutOfRange,
    ValidationError,
)
from bergelab.expr import abs_, const, min_, mul, neg, var
from bergelab.extreal import ExtReal, POS_INF
from bergelab.grid import Grid1D
from bergelab.inventory import (
    InventoryModel,
    backward_induction,
    continuity_modulus,
    exhaustive_value,
    feasible_orders,
    model_from_json,
    never_order_bound,
    sigma_path,
    transition,
    validate_h,
)

X = var("x")
H = abs_(X)


def lost_sales(**kw):
    base = dict(
        backorders=False, L=POS_INF, M=POS_INF,
        c1=1.0, c2=1.0, alpha=1.0, h=H, demand=((0.0, 1.0),),
    )
    base.update(kw)
    return InventoryModel(**base)


# ---------------------------------------------------------------------------
# dynamics and feasibility


def test_transition_clamps_only_under_lost_sales():
    assert transition(lost_sales(), 1.0, 0.0, 3.0) == 0.0
    assert transition(lost_sales(backorders=True), 1.0, 0.0, 3.0) == -2.0
    assert transition(lost_sales(), 2.0, 1.0, 1.0) == 2.0


def test_transition_rejects_infeasible_order():
    m = lost_sales(L=ExtReal(2.0), M=ExtReal(3.0))
    with pytest.raises(InfeasibleOrder):
        transition(m, 2.0, 2.0, 0.0)  # 2 > M - x = 1


def test_feasible_orders_variants():
    m = lost_sales(L=ExtReal(2.0), M=ExtReal(3.0))
    assert float(feasible_orders(m, 2.0).hi) == 1.0
    m = lost_sales(L=ExtReal(2.0))
    assert float(feasible_orders(m, 7.0).hi) == 2.0
    m = lost_sales(M=ExtReal(3.0))
    assert float(feasible_orders(m, 1.0).hi) == 2.0
    # dominance cap: orders beyond bound/c2 cost more than never ordering
    m = lost_sales(c2=2.0)
    assert float(feasible_orders(m, 1.0, g_bound=10.0).hi) == 5.0
    assert feasible_orders(m, 1.0).hi.is_pos_inf


def test_feasible_orders_state_space():
    with pytest.raises(StateOutOfRange):
        feasible_orders(lost_sales(), -1.0)
    with pytest.raises(StateOutOfRange):
        feasible_orders(lost_sales(M=ExtReal(3.0)), 4.0)
    # backorders admit negative stock
    assert feasible_orders(lost_sales(backorders=True), -1.0).hi.is_pos_inf


def test_sigma_path_branches():
    assert sigma_path(1.0, 0.0, 5.0) == 0.0
    assert sigma_path(1.0, 2.0, 2.0) == 1.0
    assert sigma_path(1.0, 2.0, 0.5) == 2.0
    assert sigma_path(1.0, 2.0, 4.0) == 0.0
    # selector through (x, y) returns y at x itself
    assert sigma_path(1.0, 2.0, 1.0) == 2.0


def test_sigma_path_is_1_lipschitz_on_grid():
    pts = [i / 16 for i in range(65)]
    vals = [sigma_path(1.0, 2.0, z) for z in pts]
    for a, b in zip(vals, vals[1:]):
        assert abs(b - a) <= 1.0 / 16 + 1e-12


# ---------------------------------------------------------------------------
# never-order bound


def test_never_order_bound_base_and_step():
    m = lost_sales()
    assert never_order_bound(m, 0, 3.0) == 0.0
    assert never_order_bound(m, 1, 3.0) == 3.0  # g_1 = h with D = 0


def test_never_order_bound_vanishes_at_zero_stock():
    # lost sales absorb demand at zero stock without cost when h(0) = 0
    m = lost_sales(demand=((0.0, 0.5), (1.0, 0.5)))
    assert never_order_bound(m, 4, 0.0) == 0.0


# ---------------------------------------------------------------------------
# model validation


def test_model_validation():
    with pytest.raises(ValidationError):
        lost_sales(L=ExtReal(0.5))  # caps are normalized to at least 1
    with pytest.raises(ValidationError):
        lost_sales(alpha=0.0)
    with pytest.raises(ValidationError):
        lost_sales(demand=((0.0, 0.5), (1.0, 0.4)))  # mass 0.9
    with pytest.raises(ValidationError):
        lost_sales(demand=((-1.0, 1.0),))


def test_h_validation():
    grid = Grid1D(0.0, 3.0, 0.5)
    validate_h(lost_sales(), grid)
    with pytest.raises(ValidationError):
        validate_h(lost_sales(h=neg(abs_(X))), grid)  # negative
    with pytest.raises(ValidationError):
        validate_h(lost_sales(h=min_(abs_(X), const(1))), grid)  # concave kink
    # h(0) != 0 rejected
    from bergelab.expr import add
    with pytest.raises(ValidationError):
        validate_h(lost_sales(h=add(abs_(X), const(1))), grid)
    validate_h(lost_sales(h=mul(X, X)), grid)  # quadratic passes


# ---------------------------------------------------------------------------
# backward induction


def test_stage_zero_is_identically_zero():
    tab = backward_induction(lost_sales(), 1, Grid1D(0.0, 5.0, 0.5), 0.5)
    assert set(tab.values[0]) == {0.0}


def test_one_stage_deterministic_value_is_identity():
    # D = 0, h = |x|: ordering only adds cost, so u*_1(x) = h(x) = x
    tab = backward_induction(lost_sales(), 1, Grid1D(0.0, 5.0, 0.5), 0.5)
    xs = [float(p) for p in tab.grid.points]
    assert tab.values[1] == pytest.approx(xs)
    assert set(tab.policy[0]) == {0.0}
    assert continuity_modulus(tab, 1) == pytest.approx(0.5)
    assert continuity_modulus(tab, 0) == 0.0


TINY = InventoryModel(
    backorders=False, L=ExtReal(2.0), M=POS_INF,
    c1=1.0, c2=1.0, alpha=0.9, h=H,
    demand=((0.0, 0.5), (1.0, 0.5)),
)


def test_tiny_instance_matches_exhaustive_enumeration():
    grid = Grid1D(0.0, 2.0, 1.0)
    tab = backward_induction(TINY, 2, grid, 1.0)
    for i, x in enumerate(float(p) for p in grid.points):
        assert abs(tab.values[2][i] - exhaustive_value(TINY, 2, x, 1.0)) <= 1e-9


def test_values_nondecreasing_in_horizon_and_below_never_order_bound():
    grid = Grid1D(0.0, 2.0, 1.0)
    tab = backward_induction(TINY, 3, grid, 1.0)
    for i, x in enumerate(float(p) for p in grid.points):
        stages = [tab.values[t][i] for t in range(4)]
        assert stages == sorted(stages)
        for t in range(4):
            assert tab.values[t][i] <= never_order_bound(TINY, t, x) + 1e-9


def test_policies_are_feasible():
    grid = Grid1D(0.0, 2.0, 1.0)
    tab = backward_induction(TINY, 2, grid, 1.0)
    for stage in tab.policy:
        for x, y in zip((float(p) for p in grid.points), stage):
            assert feasible_orders(TINY, x).contains(y)


def test_backorder_mode_with_deterministic_demand():
    m = lost_sales(backorders=True, L=ExtReal(2.0), demand=((1.0, 1.0),))
    grid = Grid1D(-3.0, 3.0, 0.5)
    tab = backward_induction(m, 2, grid, 0.5)
    assert all(np.isfinite(tab.values[2]))
    # negative stock is costly, so the policy orders somewhere
    assert any(y > 0 for y in tab.policy[1])


def test_reference_config_modulus_contracts_under_refinement():
    m = InventoryModel(
        backorders=False, L=POS_INF, M=POS_INF,
        c1=4.0, c2=1.0, alpha=0.9, h=H,
        demand=((0.0, 0.5), (1.0, 0.5)),
    )
    mods = {}
    for step in (0.5, 0.25):
        tab = backward_induction(m, 4, Grid1D(0.0, 10.0, step), step)
        mods[step] = [continuity_modulus(tab, t) for t in range(5)]
    for t in range(1, 5):
        assert mods[0.25][t] <= 0.75 * mods[0.5][t] + 1e-12


def test_config_roundtrip():
    cfg = model_from_json(
        {
            "backorders": False,
            "L": 2.0,
            "M": "+inf",
            "c1": 1.0,
            "c2": 1.0,
            "alpha": 0.9,
            "h": {"op": "abs", "args": [{"var": "x"}]},
            "demand": [[0.0, 0.5], [1.0, 0.5]],
            "grid": {"lo": 0.0, "hi": 2.0, "step": 1.0},
            "action_step": 1.0,
            "horizon": 2,
        }
    )
    tab = backward_induction(cfg.model, cfg.horizon, cfg.grid, cfg.action_step)
    assert abs(tab.values[2][1] - exhaustive_value(cfg.model, 2, 1.0, 1.0)) <= 1e-9
