import itertools
import math
import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from clusteralloc.fitness import (
    Combination,
    Request,
    RequestError,
    ShapeMode,
    capacity_deviation,
    evaluate,
    shape_deviation,
    shape_residual,
    sorted_capacity_profile,
    total_capacity,
)

from conftest import make_fleet


@pytest.mark.parametrize("ids, total", [((1, 2, 3), 270), ((4, 5, 7), 240), ((1, 10, 9), 200)])
def test_table2_totals(lpc10, ids, total):
    assert total_capacity(Combination(ids), lpc10) == total


def test_capacity_deviation(lpc10):
    assert capacity_deviation(Combination.of(1, 2, 3), lpc10, 5) == (170, False)
    fleet = make_fleet([50, 30, 20, 54, 30, 20])
    assert capacity_deviation(Combination.of(1, 2, 3), fleet, 5) == (0, True)
    assert capacity_deviation(Combination.of(2, 3, 4), fleet, 5) == (4, True)
    assert capacity_deviation(Combination.of(3, 4, 5), fleet, 5) == (4, True)


def test_sorted_profile(lpc10):
    assert sorted_capacity_profile(Combination.of(1, 2, 3), lpc10) == [100, 90, 80]
    assert sorted_capacity_profile(Combination.of(7, 9, 10), lpc10) == [70, 50, 50]
    assert sorted_capacity_profile(Combination.of(3, 4), lpc10) == [100, 100]


def test_shape_deviation_modes(lpc10, request_532):
    combo = Combination.of(1, 2, 3)
    assert shape_deviation(combo, lpc10, request_532, ShapeMode.ABSOLUTE)[0] == 10
    assert shape_deviation(combo, lpc10, request_532, ShapeMode.TELESCOPING)[0] == 10


def test_shape_identity():
    fleet = make_fleet([50, 30, 20])
    req = Request(3, (20, 50, 30))
    for mode in ShapeMode:
        assert shape_deviation(Combination.of(1, 2, 3), fleet, req, mode) == (0, True)


def test_shape_tolerance_is_relative():
    # child gaps [20, 10] sum to 30; T=5 allows 1.5 points of shape error
    assert shape_residual([51, 30, 20], [50, 30, 20], 5.0)[1] is True
    assert shape_residual([52, 30, 20], [50, 30, 20], 5.0)[1] is False
    assert shape_residual([70], [100], 5.0) == (0, True)


def test_evaluate_worked_example(lpc10, request_532):
    report = evaluate(Combination.of(1, 2, 3), lpc10, request_532)
    assert report.total_capacity_pct == 270
    assert report.capacity_deviation == 170
    assert report.shape_deviation == 10
    assert report.fitness_deviation == 180
    assert report.match_ratio == 2.7
    assert not report.within_capacity_tolerance
    assert evaluate(Combination.of(1, 2, 3), lpc10, request_532) == report


def test_combination_canonical():
    assert Combination((3, 1, 2)).node_ids == (1, 2, 3)
    assert Combination((3, 1, 2)) == Combination.of(1, 2, 3)
    assert str(Combination.of(10, 2)) == "2+10"
    assert Combination.parse("7+9+10") == Combination.of(7, 9, 10)
    with pytest.raises(ValueError):
        Combination.of(3, 2, 3)


@pytest.mark.parametrize(
    "ratios, tol",
    [((50, 30, 30), 5), ((100,), 5), ((0, 50, 50), 5), ((50, 50), 0), ((50, 50), 101)],
)
def test_request_validation(ratios, tol):
    with pytest.raises(RequestError):
        Request.from_ratios(ratios, tol)


def test_unknown_node(lpc10):
    with pytest.raises(KeyError):
        total_capacity(Combination.of(1, 99), lpc10)


capacities = st.lists(st.integers(1, 100), min_size=2, max_size=12)


@st.composite
def instances(draw):
    caps = draw(capacities)
    n = draw(st.integers(2, min(5, len(caps))))
    cuts = sorted(draw(st.lists(st.integers(1, 99), min_size=n - 1, max_size=n - 1, unique=True)))
    bounds = [0, *cuts, 100]
    ratios = tuple(b - a for a, b in zip(bounds, bounds[1:]))
    ids = draw(st.permutations(range(1, len(caps) + 1)))[:n]
    mode = draw(st.sampled_from(list(ShapeMode)))
    return make_fleet(caps), Request.from_ratios(ratios, draw(st.sampled_from([1, 5, 10, 50]))), list(ids), mode


@given(instances(), st.randoms(use_true_random=False))
def test_permutation_invariance(inst, rnd):
    fleet, req, ids, mode = inst
    shuffled = list(ids)
    rnd.shuffle(shuffled)
    assert evaluate(Combination(tuple(ids)), fleet, req, mode) == evaluate(
        Combination(tuple(shuffled)), fleet, req, mode
    )


@given(instances())
def test_report_invariants(inst):
    fleet, req, ids, mode = inst
    r = evaluate(Combination(tuple(ids)), fleet, req, mode)
    assert r.match_ratio * 100 == pytest.approx(r.total_capacity_pct, rel=1e-12)
    assert r.match_ratio == r.total_capacity_pct / 100
    assert r.fitness_deviation == r.capacity_deviation + r.shape_deviation
    assert min(r.capacity_deviation, r.shape_deviation) >= 0


@given(capacities, st.data())
def test_adding_a_node_never_lowers_total(caps, data):
    fleet = make_fleet(caps)
    k = data.draw(st.integers(1, len(caps) - 1))
    ids = data.draw(st.permutations(range(1, len(caps) + 1)))
    assert total_capacity(Combination(tuple(ids[: k + 1])), fleet) >= total_capacity(
        Combination(tuple(ids[:k])), fleet
    )


@given(st.lists(st.integers(1, 100), min_size=2, max_size=5), st.sampled_from(list(ShapeMode)))
def test_equal_profiles_have_zero_shape(profile, mode):
    profile = sorted(profile, reverse=True)
    assert shape_residual(profile, profile, 5.0, mode)[0] == 0


@given(st.lists(st.integers(1, 100), min_size=3, max_size=5, unique=True), st.data())
def test_telescoping_ignores_interior(caps, data):
    caps = sorted(caps, reverse=True)
    child = sorted(data.draw(st.lists(st.integers(1, 60), min_size=len(caps), max_size=len(caps))), reverse=True)
    k = data.draw(st.integers(1, len(caps) - 2))
    assume(caps[0] - caps[-1] >= 2)
    moved = list(caps)
    moved[k] = data.draw(st.integers(caps[-1], caps[0]))
    moved.sort(reverse=True)
    assert shape_residual(caps, child, 5, ShapeMode.TELESCOPING) == shape_residual(
        moved, child, 5, ShapeMode.TELESCOPING
    )


@settings(max_examples=30)
@given(st.lists(st.integers(1, 100), min_size=6, max_size=9))
def test_mean_ratio_over_all_combinations_grows_with_size(caps):
    fleet = make_fleet(caps)
    means = []
    for n in (2, 3, 4, 5):
        totals = [total_capacity(Combination(c), fleet) for c in itertools.combinations(fleet.ids, n)]
        means.append(sum(totals) / (100 * len(totals)))
    assert all(a < b for a, b in zip(means, means[1:]))
