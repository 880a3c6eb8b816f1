"""Value/solution machinery: transforms, sublevel localization, oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergelab.corpus import corpus_instantiate
from bergelab.errors import PreconditionFailed
from bergelab.expr import add, const, eval_expr, mul, var
from bergelab.extreal import ExtReal, POS_INF
from bergelab.grid import Grid1D
from bergelab.multifunction import Interval, constant_map
from bergelab.problem import (
    ProblemSpec,
    bar_transform,
    hat_transform,
    modified_problem,
    solutions_at,
    value_at,
    value_profile,
)

X, Y = var("x"), var("y")
UNIT = Interval.of(ExtReal(0.0), ExtReal(1.0))

coeff = st.integers(min_value=-3, max_value=3)
eighth = st.integers(min_value=0, max_value=8)


@st.composite
def problems(draw):
    c = [draw(coeff) for _ in range(4)]
    u = add(
        add(const(c[0]), mul(const(c[1]), X)),
        add(mul(const(c[2]), Y), mul(const(c[3]), mul(X, Y))),
    )
    lo, hi = sorted(draw(eighth) / 8 for _ in range(2))
    return ProblemSpec(
        x_domain=UNIT,
        y_domain=UNIT,
        phi=constant_map(ExtReal(lo), ExtReal(hi)),
        u=u,
        mode="float",
    ), (lo, hi)


XG = Grid1D(0.0, 1.0, 0.25)
YG = Grid1D(0.0, 1.0, 0.125)


@settings(max_examples=60, deadline=None)
@given(problems())
def test_transforms_preserve_sampled_values(drawn):
    p, _ = drawn
    bar = bar_transform(p)
    hat = hat_transform(bar)
    for x in XG:
        v = value_at(p, x, YG)
        assert value_at(bar, x, YG) == v
        assert value_at(hat, x, YG) == v


@settings(max_examples=60, deadline=None)
@given(problems())
def test_value_is_monotone_under_grid_refinement(drawn):
    p, _ = drawn
    for x in XG:
        coarse = value_at(p, x, YG)
        fine = value_at(p, x, YG.refine())
        assert not coarse < fine  # larger sample can only lower the min


@settings(max_examples=60, deadline=None)
@given(problems())
def test_value_and_solutions_match_exhaustive_enumeration(drawn):
    p, (lo, hi) = drawn
    ys = [i / 8 for i in range(9) if lo <= i / 8 <= hi]
    for x in XG:
        vals = [float(eval_expr(p.u, {"x": float(x), "y": y}, "float")) for y in ys]
        got = value_at(p, float(x), YG)
        if not vals:
            assert got == POS_INF
            continue
        assert float(got) == min(vals)
        expected = {y for y, v in zip(ys, vals) if v <= min(vals) + 1e-9}
        assert set(solutions_at(p, float(x), YG, 1e-9)) == expected


# ---------------------------------------------------------------------------
# sublevel-localized problem


def _optimum_problem():
    fx = corpus_instantiate("optimum-counterexample")
    return fx, fx.subcases[0].problem


def test_modified_problem_agrees_below_the_level():
    fx, p = _optimum_problem()
    for lam, x0 in [(0.9, 0.5), (0.7, 0.6), (0.5, 0.8)]:
        mp = modified_problem(p, lam, x0, fx.y_grid)
        for z in fx.x_grid:
            z = float(z)
            if not value_at(p, z, fx.y_grid) < ExtReal(lam):
                continue
            assert value_at(mp, z, fx.y_grid) == value_at(p, z, fx.y_grid)
            assert set(solutions_at(mp, z, fx.y_grid, 1e-9)) == set(
                solutions_at(p, z, fx.y_grid, 1e-9)
            )


def test_modified_problem_needs_a_feasible_anchor():
    fx, p = _optimum_problem()
    # u* = 1 - x, so no sampled action reaches value <= 0.3 at x0 = 0.5
    with pytest.raises(PreconditionFailed):
        modified_problem(p, 0.3, 0.5, fx.y_grid)


def test_checker_runs_are_deterministic():
    from bergelab.checkers import CheckerParams, check_kn_inf_compact

    fx, p = _optimum_problem()
    params = CheckerParams(y_grid=fx.y_grid)
    first = check_kn_inf_compact(p, 0.0, params)
    second = check_kn_inf_compact(p, 0.0, params)
    assert first == second
    assert first.witness == second.witness


def test_value_profile_collects_grid_columns():
    fx, p = _optimum_problem()
    prof = value_profile(p, Grid1D(0.0, 1.0, 0.5), fx.y_grid, 1e-9)
    # u = 1 - x*y minimized at y = 1, so the profile is 1 - x
    assert [float(v) for v in prof.values] == [1.0, 0.5, 0.0]
    assert prof.argmins[2] == (1.0,)
