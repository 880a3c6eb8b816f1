"""Falsifier behavior on hand-built problems with known analysis."""

from fractions import Fraction

import pytest

from bergelab.checkers import (
    NO_VIOLATION,
    NOT_APPLICABLE,
    VIOLATED,
    CheckerParams,
    characterize_continuity,
    check_fptusc,
    check_k_inf_compact,
    check_kn_inf_compact,
    check_lisc,
    check_lmsc,
    check_lsc_fn,
    check_usc_fn,
    replay_witness,
)
from bergelab.exact import ExactScalar
from bergelab.expr import (
    Indicator,
    IsRational,
    Or,
    Piecewise,
    TrueP,
    abs_,
    add,
    const,
    div,
    eq,
    le,
    mul,
    sub,
    var,
)
from bergelab.extreal import ExtReal
from bergelab.grid import Grid1D
from bergelab.multifunction import Interval, MultifunctionSpec, PhiPiece, constant_map
from bergelab.problem import ProblemSpec, value_at


X, Y = var("x"), var("y")
STEP_GRID = Grid1D(Fraction(-1), Fraction(1), Fraction(1, 64))


def step(x):
    return 1 if x <= 0 else 0


# ---------------------------------------------------------------------------
# grid-function checks


def test_lsc_fn_flags_upper_closed_step_at_jump():
    verdict = check_lsc_fn([step(x) for x in STEP_GRID], STEP_GRID)
    assert verdict.violated
    assert verdict.witness.x == 0
    assert verdict.witness.gap == Fraction(1, 2)


def test_lsc_fn_clean_on_constant_and_identity():
    xs = list(STEP_GRID)
    assert check_lsc_fn([7 for _ in xs], STEP_GRID).status == NO_VIOLATION
    assert check_lsc_fn(xs, STEP_GRID).status == NO_VIOLATION


def test_usc_fn_negation_wraps_witness():
    verdict = check_usc_fn([-step(x) for x in STEP_GRID], STEP_GRID)
    assert verdict.violated
    assert verdict.witness.kind == "usc-fn"
    assert verdict.witness.x == 0


def test_callable_checks_attribute_jump_to_closed_side():
    # indicator of [0, 1/2]: closed upper set, so usc holds and lsc fails
    f = lambda x: 1 if (0 <= x <= Fraction(1, 2)) else 0  # noqa: E731
    grid = Grid1D(Fraction(0), Fraction(1), Fraction(1, 64))
    lsc = check_lsc_fn(f, grid)
    assert lsc.violated and lsc.witness.x == Fraction(1, 2)
    assert check_usc_fn(f, grid).status == NO_VIOLATION

    # indicator of (1/2, 1]: open at the jump, so lsc holds and usc fails
    g = lambda x: 1 if x > Fraction(1, 2) else 0  # noqa: E731
    usc = check_usc_fn(g, grid)
    assert usc.violated and usc.witness.x == Fraction(1, 2)
    assert check_lsc_fn(g, grid).status == NO_VIOLATION


def test_callable_checks_clean_on_slope():
    grid = Grid1D(Fraction(0), Fraction(1), Fraction(1, 16))
    assert check_lsc_fn(lambda x: x, grid).status == NO_VIOLATION
    assert check_usc_fn(lambda x: x, grid).status == NO_VIOLATION


# ---------------------------------------------------------------------------
# problems


def vasquez_problem() -> ProblemSpec:
    inv2x = div(const(1), mul(const(2), X))
    invx = div(const(1), X)
    u = Piecewise(
        (
            (Or((le(X, const(0)), le(Y, inv2x))), add(const(1), Y)),
            (le(Y, invx), sub(add(const(2), invx), mul(add(mul(const(2), X), const(1)), Y))),
        ),
        sub(Y, invx),
    )
    return ProblemSpec(
        x_domain=Interval.of(-2, 2),
        # the true action space is [0, inf); y_domain is the working box
        y_domain=Interval.of(0, 400),
        phi=constant_map(0, float("inf")),
        u=u,
        mode="float",
        sample_hints=(lambda x: [1.0 / x] if x > 0 else [],),
        y_truncated=True,
    )


def optimum_gap_problem() -> ProblemSpec:
    # feasible set pinned to {1} at x = 0, [0, 1] elsewhere; u = 1 - x y
    phi = MultifunctionSpec(
        (
            PhiPiece(eq(X, const(0)), const(1), const(1)),
            PhiPiece(TrueP(), const(0), const(1)),
        )
    )
    return ProblemSpec(
        x_domain=Interval.of(0, 1),
        y_domain=Interval.of(0, 1),
        phi=phi,
        u=sub(const(1), mul(X, Y)),
        mode="float",
    )


def rational_indicator_problem() -> ProblemSpec:
    # u = 1_Q(x - y) + 1_{y = 0} + y, everything feasible on [0, 1]
    u = add(
        add(Indicator(IsRational(sub(X, Y))), Indicator(eq(Y, const(0)))),
        Y,
    )
    hints = tuple(
        ExactScalar(Fraction(0), Fraction(1, 5 * 2**k)) for k in range(12)
    )
    return ProblemSpec(
        x_domain=Interval.of(0, 1),
        y_domain=Interval.of(0, 1),
        phi=constant_map(0, 1),
        u=u,
        mode="exact",
        sample_hints=hints,
    )


def toy_distance_problem() -> ProblemSpec:
    return ProblemSpec(
        x_domain=Interval.of(0, 1),
        y_domain=Interval.of(0, 1),
        phi=constant_map(0, 1),
        u=abs_(sub(X, Y)),
        mode="float",
    )


FLOAT_PARAMS = CheckerParams(y_grid=Grid1D(0.0, 400.0, 0.5))
# value-function probes must stay where 1/x fits inside the action box:
# the smallest window offset is delta0 * 2^-depth / window_points
VASQUEZ_VALUE_PARAMS = CheckerParams(y_grid=Grid1D(0.0, 400.0, 0.5), depth=5)
UNIT_PARAMS = CheckerParams(y_grid=Grid1D(0.0, 1.0, 1.0 / 64))
EXACT_PARAMS = CheckerParams(y_grid=Grid1D(Fraction(0), Fraction(1), Fraction(1, 64)))


# ---------------------------------------------------------------------------
# pinched-constraint problem (value jumps down off x <= 0)


def test_vasquez_values():
    p = vasquez_problem()
    g = FLOAT_PARAMS.y_grid
    assert float(value_at(p, -0.5, g)) == pytest.approx(1.0)
    assert float(value_at(p, 0.0, g)) == pytest.approx(1.0)
    assert float(value_at(p, 1.0, g)) == pytest.approx(0.0)
    assert float(value_at(p, 0.25, g)) == pytest.approx(0.0)


def test_vasquez_lisc_violated_with_reciprocal_pairs():
    p = vasquez_problem()
    verdict = check_lisc(p, 0.0, VASQUEZ_VALUE_PARAMS)
    assert verdict.violated
    assert float(verdict.witness.gap) == pytest.approx(0.5)
    for xx, yy in verdict.witness.pairs:
        assert xx > 0
        assert abs(yy - 1.0 / xx) <= 0.02
    ok, margin = replay_witness(p, verdict.witness, VASQUEZ_VALUE_PARAMS)
    assert ok and margin >= float(verdict.witness.gap) - 1e-12


def test_vasquez_fptusc_clean_at_jump():
    p = vasquez_problem()
    assert check_fptusc(p, 0.0, FLOAT_PARAMS).status == NO_VIOLATION


def test_vasquez_bounded_sequence_escapes_box():
    p = vasquez_problem()
    verdict = check_kn_inf_compact(p, 0.0, FLOAT_PARAMS)
    assert verdict.violated
    assert verdict.witness.kind == "kn-escape"
    ys = [yy for _, yy in verdict.witness.pairs]
    assert ys == sorted(ys) and ys[0] > 400.0
    ok, _ = replay_witness(p, verdict.witness, FLOAT_PARAMS)
    assert ok


def test_vasquez_level_set_unbounded():
    p = vasquez_problem()
    verdict = check_k_inf_compact(p, Interval.of(-1, 1), 0.5, FLOAT_PARAMS)
    assert verdict.violated
    assert verdict.witness.kind == "k-unbounded"
    ok, _ = replay_witness(p, verdict.witness, FLOAT_PARAMS)
    assert ok


def test_vasquez_characterization_is_consistent():
    p = vasquez_problem()
    report = characterize_continuity(p, 0.0, VASQUEZ_VALUE_PARAMS)
    assert report["consistent"]
    assert report["lisc"].violated
    assert not report["fptusc"].violated


# ---------------------------------------------------------------------------
# pinned-at-one-point problem (minimizers cluster outside the feasible set)


def test_optimum_gap_cluster_witness():
    p = optimum_gap_problem()
    params = CheckerParams(
        y_grid=UNIT_PARAMS.y_grid, cluster_candidates=(0.5,)
    )
    verdict = check_kn_inf_compact(p, 0.0, params)
    assert verdict.violated
    assert verdict.witness.kind == "kn-cluster"
    for _, yy in verdict.witness.pairs:
        assert abs(yy - 0.5) <= 3.0 / 64 + 1e-12
    ok, margin = replay_witness(p, verdict.witness, params)
    assert ok and margin >= float(verdict.witness.gap) - 1e-12


def test_optimum_gap_value_function_is_continuous():
    p = optimum_gap_problem()
    assert check_lisc(p, 0.0, UNIT_PARAMS).status == NO_VIOLATION
    assert check_fptusc(p, 0.0, UNIT_PARAMS).status == NO_VIOLATION


# ---------------------------------------------------------------------------
# rationality-indicator problem (exact mode, unattained infimum)


def test_rational_indicator_sampled_value():
    p = rational_indicator_problem()
    v = value_at(p, Fraction(1, 2), EXACT_PARAMS.y_grid)
    assert v == ExtReal(ExactScalar(Fraction(0), Fraction(1, 5 * 2**11)))
    assert float(v) <= 1e-3


def test_rational_indicator_value_checks_clean():
    p = rational_indicator_problem()
    assert check_lisc(p, Fraction(1, 2), EXACT_PARAMS).status == NO_VIOLATION
    assert check_fptusc(p, Fraction(1, 2), EXACT_PARAMS).status == NO_VIOLATION


def test_rational_indicator_attainment_fails_against_reference():
    p = rational_indicator_problem()
    params = CheckerParams(
        y_grid=EXACT_PARAMS.y_grid, value_ref=lambda x: Fraction(0)
    )
    verdict = check_lmsc(p, Fraction(1, 2), params)
    assert verdict.violated
    assert verdict.witness.kind == "attainment"
    assert float(verdict.witness.data["sampled_min"]) <= 1e-3


def test_rational_indicator_graph_jump_detected():
    p = rational_indicator_problem()
    verdict = check_kn_inf_compact(p, Fraction(1, 2), EXACT_PARAMS)
    assert verdict.violated
    assert verdict.witness.kind == "kn-graph-lsc"
    assert float(verdict.witness.gap) > 0.4
    ok, margin = replay_witness(p, verdict.witness, EXACT_PARAMS)
    assert ok and margin >= verdict.witness.gap


# ---------------------------------------------------------------------------
# smooth problem: everything clean


def test_toy_distance_no_violations():
    p = toy_distance_problem()
    report = characterize_continuity(p, 0.5, UNIT_PARAMS)
    assert report["consistent"]
    assert not report["fptusc"].violated
    assert not report["lisc"].violated
    assert report["lmsc"].status == NOT_APPLICABLE
    assert check_kn_inf_compact(p, 0.5, UNIT_PARAMS).status == NO_VIOLATION
    verdict = check_k_inf_compact(p, Interval.of(0, 1), 0.25, UNIT_PARAMS)
    assert verdict.status == NO_VIOLATION


def test_lmsc_with_reference_confirms_attainment():
    p = toy_distance_problem()
    params = CheckerParams(y_grid=UNIT_PARAMS.y_grid, value_ref=lambda x: 0.0)
    assert check_lmsc(p, 0.5, params).status == NO_VIOLATION
