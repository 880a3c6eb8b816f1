"""Every registered fixture verifies end to end at its stated resolution."""

from functools import lru_cache

import pytest

from bergelab.corpus import (
    ORDER,
    corpus_instantiate,
    corpus_list,
    corpus_verify,
)
from bergelab.errors import UnknownFixture
from bergelab.expr import eval_expr


def test_list_is_stable_and_complete():
    names = corpus_list()
    assert names == list(ORDER)
    assert "lisc-not-lmsc" in names
    assert "vasquez" in names
    assert "fptusc-not-epi-usc" in names


def test_unknown_name_raises():
    with pytest.raises(UnknownFixture):
        corpus_instantiate("nonexistent")
    with pytest.raises(UnknownFixture):
        corpus_verify("nonexistent")


@pytest.mark.parametrize("name", ORDER)
def test_fixture_shape(name):
    fx = corpus_instantiate(name)
    assert fx.name == name
    assert fx.subcases
    for sub in fx.subcases:
        # closed form value evaluates everywhere on the parameter grid
        ref = fx.value_ref(sub)
        for x in fx.x_grid:
            ref(x)
        # labels cover all four properties at each base point
        pts = {lab.point for lab in sub.labels}
        for pt in pts:
            props = {lab.prop for lab in sub.labels if lab.point == pt}
            assert props == {"FPTusc", "lisc", "lmsc", "KN"}


def test_exact_fixtures_stay_exact():
    for name in ("lisc-not-lmsc", "lmsc-insufficient", "lsc-lmsc-independence"):
        fx = corpus_instantiate(name)
        for sub in fx.subcases:
            assert sub.problem.mode == "exact"


def test_independence_fixture_has_two_subcases():
    fx = corpus_instantiate("lsc-lmsc-independence")
    assert [s.name for s in fx.subcases] == [
        "pinned-then-free",
        "rational-checkerboard",
    ]


@lru_cache(maxsize=None)
def _report(name):
    return corpus_verify(name)


@pytest.mark.parametrize("name", ORDER)
def test_fixture_verifies(name):
    report = _report(name)
    assert report["ok"], report
    for entry in report["subcases"]:
        assert entry["value"]["ok"], entry["value"]
        assert entry["consistent"]
        for lab in entry["labels"]:
            assert lab["agrees"], lab
            if lab["expected"] == "fails":
                assert lab["replay_ok"], lab


def test_vasquez_value_error_within_slope_bound():
    report = _report("vasquez")
    val = report["subcases"][0]["value"]
    assert val["bound"] == pytest.approx(0.05)
    assert val["max_error"] <= val["bound"]


def test_optimum_counterexample_value_exact_on_grid():
    report = _report("optimum-counterexample")
    assert report["subcases"][0]["value"]["max_error"] == 0.0


def test_kn_fails_everywhere_in_corpus():
    # every example exists to break the compactness condition somewhere
    for name in ORDER:
        report = _report(name)
        for entry in report["subcases"]:
            kn = [l for l in entry["labels"] if l["property"] == "KN"]
            assert kn and all(l["expected"] == "fails" for l in kn)
            assert all(l["status"] == "Violated" for l in kn)
