"""Arithmetic and grid invariants: exact field, extended reals, grids."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergelab.errors import IndeterminateForm, ValidationError
from bergelab.exact import SQRT2, ExactScalar
from bergelab.expr import add, const, eval_expr, mul, var
from bergelab.extreal import ExtReal, NEG_INF, POS_INF, ext_add, ext_max, ext_min
from bergelab.grid import Grid1D

fractions = st.fractions(
    min_value=Fraction(-4), max_value=Fraction(4), max_denominator=64
)
exacts = st.builds(ExactScalar, fractions, fractions)


def test_exact_order_agrees_with_float_on_random_pairs():
    rng = random.Random(1729)
    for _ in range(1000):
        p = ExactScalar(Fraction(rng.randint(-400, 400), rng.randint(1, 64)),
                        Fraction(rng.randint(-400, 400), rng.randint(1, 64)))
        q = ExactScalar(Fraction(rng.randint(-400, 400), rng.randint(1, 64)),
                        Fraction(rng.randint(-400, 400), rng.randint(1, 64)))
        if abs(float(p) - float(q)) <= 1e-9:
            continue  # below the agreed margin, float order is not trusted
        assert (p < q) == (float(p) < float(q))
        assert (q < p) == (float(q) < float(p))


def test_is_rational_iff_sqrt2_coefficient_vanishes():
    quarters = [Fraction(k, 4) for k in range(-8, 9)]
    for a in quarters:
        for b in quarters:
            assert ExactScalar(a, b).is_rational() == (b == 0)


@given(exacts, exacts, exacts)
def test_exact_field_distributes(x, y, z):
    assert (x + y) * z == x * z + y * z


@given(exacts)
def test_exact_reciprocal_inverts(x):
    if x == ExactScalar(0):
        with pytest.raises(Exception):
            x.reciprocal()
    else:
        assert x * x.reciprocal() == ExactScalar(1)


def test_sqrt2_squares_to_two():
    assert SQRT2 * SQRT2 == ExactScalar(2)
    assert not SQRT2.is_rational()


# ---------------------------------------------------------------------------
# extended reals


def test_empty_extrema_conventions():
    assert ext_min([]) == POS_INF
    assert ext_max([]) == NEG_INF


def test_opposite_infinities_raise():
    with pytest.raises(IndeterminateForm):
        ext_add(POS_INF, NEG_INF)
    assert ext_add(POS_INF, 5) == POS_INF


def test_nan_is_rejected():
    with pytest.raises(ValidationError):
        ExtReal(float("nan"))


@given(st.lists(st.one_of(
    st.floats(allow_nan=False, width=32),
    st.fractions(max_denominator=32),
), min_size=1, max_size=8))
def test_extrema_bracket_every_element(vals):
    lo, hi = ext_min(vals), ext_max(vals)
    for v in vals:
        assert not ExtReal(v) < lo
        assert not hi < ExtReal(v)


@given(fractions, fractions, fractions)
def test_exact_payload_order_is_transitive(a, b, c):
    # rational, pure-sqrt2, and mixed payloads through one total order
    xs = sorted([ExtReal(a), ExtReal(ExactScalar(0, b)), ExtReal(ExactScalar(c, 1))])
    assert not xs[1] < xs[0] and not xs[2] < xs[1] and not xs[2] < xs[0]


# ---------------------------------------------------------------------------
# grids and expression evaluation


@given(
    st.fractions(min_value=Fraction(-2), max_value=Fraction(2), max_denominator=8),
    st.fractions(min_value=Fraction(1, 16), max_value=Fraction(2), max_denominator=16),
    st.integers(min_value=1, max_value=12),
)
def test_refinement_contains_original_points(lo, step, n):
    g = Grid1D(lo, lo + n * step, step)
    fine = set(g.refine().points)
    assert set(g.points) <= fine
    assert g.refine().count == 2 * g.count - 1


@settings(max_examples=50)
@given(
    st.integers(min_value=-3, max_value=3),
    st.integers(min_value=-3, max_value=3),
    st.floats(min_value=-2, max_value=2),
)
def test_eval_expr_is_referentially_transparent(c0, c1, x):
    e = add(const(Fraction(c0)), mul(const(Fraction(c1)), mul(var("x"), var("x"))))
    env = {"x": x}
    first = eval_expr(e, env, "float")
    assert all(eval_expr(e, env, "float") == first for _ in range(3))
