"""Interval-uncertain cross-holdings: extremes, regions, sandwich bounds."""

import numpy as np
import pytest

from finnet import fixtures
from finnet.netmodel import ShiftedModel
from finnet.robust import (
    IntervalNetwork,
    NoPositiveEquilibriumError,
    constant_lower,
    constant_upper,
    extremal_fixed_points,
    last_hope_membership,
    last_hope_region,
    robust_invariant_set,
    robust_report,
    sandwich_bounds,
    sequence_sampler,
    uniform_sampler,
)


def two_bank_interval(spread=0.10):
    net = fixtures.two_bank()
    model = ShiftedModel.from_network(net)
    return IntervalNetwork.from_nominal(net.C, model.r, spread)


def test_interval_validation():
    C = np.array([[0.0, 0.5], [0.5, 0.0]])
    with pytest.raises(ValueError):
        IntervalNetwork(c_lower=1.1 * C, c_upper=C, r=np.ones(2))   # lower > upper
    with pytest.raises(ValueError):
        IntervalNetwork(c_lower=C, c_upper=2.2 * C, r=np.ones(2))   # col sums > 1
    with pytest.raises(ValueError):
        IntervalNetwork(c_lower=-C, c_upper=C, r=np.ones(2))


def test_from_nominal_keeps_zero_entries_pinned():
    inet = two_bank_interval()
    assert inet.c_lower[0, 0] == 0.0 and inet.c_upper[0, 0] == 0.0
    assert inet.c_lower[0, 1] == pytest.approx(0.45)
    assert inet.c_upper[0, 1] == pytest.approx(0.55)


def test_extremal_fixed_points_hand_values():
    # scalar network: c in [0.2, 0.5], r = 1 gives 1/(1-c) in [1.25, 2.0]
    inet = IntervalNetwork(c_lower=np.array([[0.2]]), c_upper=np.array([[0.5]]),
                           r=np.array([1.0]))
    xl, xu = extremal_fixed_points(inet)
    np.testing.assert_allclose(xl, [1.25], atol=1e-12)
    np.testing.assert_allclose(xu, [2.0], atol=1e-12)

    xl, xu = extremal_fixed_points(two_bank_interval())
    np.testing.assert_allclose(xl, [10 / 11, 10 / 11], atol=1e-9)
    np.testing.assert_allclose(xu, [10 / 9, 10 / 9], atol=1e-9)
    assert np.all(xl <= xu)


def test_collapsed_interval_reduces_to_nominal():
    net = fixtures.two_bank()
    model = ShiftedModel.from_network(net)
    inet = IntervalNetwork(c_lower=net.C, c_upper=net.C, r=model.r)
    xl, xu = extremal_fixed_points(inet)
    np.testing.assert_allclose(xl, xu, atol=1e-12)
    np.testing.assert_allclose(xl, [1.0, 1.0], atol=1e-9)


def test_negative_lower_equilibrium_is_rejected():
    inet = IntervalNetwork(c_lower=np.array([[0.1]]), c_upper=np.array([[0.2]]),
                           r=np.array([-1.0]))
    with pytest.raises(NoPositiveEquilibriumError):
        robust_invariant_set(inet)


def test_regions_nest_lower_inside_upper():
    inet = two_bank_interval()
    robust = robust_invariant_set(inet)
    hope = last_hope_region(inet)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.0, 3.0, size=(300, 2))
    for x in pts:
        if robust.contains(x):
            assert hope.contains(x)


def test_sandwich_ordering_and_limits():
    inet = two_bank_interval()
    xl, xu = extremal_fixed_points(inet)
    x0 = np.array([1.0, 1.0])
    res = sandwich_bounds(inet, x0, T=200, sampler=uniform_sampler(inet, seed=5))
    assert np.all(res.lower <= res.sampled + 1e-9)
    assert np.all(res.sampled <= res.upper + 1e-9)
    assert np.all(res.liminf_estimate >= xl - 1e-6)
    assert np.all(res.limsup_estimate <= xu + 1e-6)


def test_constant_samplers_converge_to_their_fixed_points():
    inet = two_bank_interval()
    xl, xu = extremal_fixed_points(inet)
    x0 = np.array([1.0, 1.0])
    low = sandwich_bounds(inet, x0, T=300, sampler=constant_lower(inet))
    high = sandwich_bounds(inet, x0, T=300, sampler=constant_upper(inet))
    np.testing.assert_allclose(low.sampled[-1], xl, atol=1e-10)
    np.testing.assert_allclose(high.sampled[-1], xu, atol=1e-10)


def test_sequence_sampler_cycles_matrices():
    inet = two_bank_interval()
    sampler = sequence_sampler([inet.c_lower, inet.c_upper])
    np.testing.assert_array_equal(sampler(0), inet.c_lower)
    np.testing.assert_array_equal(sampler(1), inet.c_upper)
    np.testing.assert_array_equal(sampler(2), inet.c_lower)


def test_sandwich_rejects_outside_start():
    inet = two_bank_interval()
    with pytest.raises(ValueError):
        sandwich_bounds(inet, np.array([-0.5, 1.0]), T=10)


def test_last_hope_membership_needs_nonneg():
    inet = two_bank_interval()
    assert last_hope_membership(inet, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        last_hope_membership(inet, np.array([-1.0, 1.0]))


def test_report_bundle():
    inet = two_bank_interval()
    rep = robust_report(inet)
    assert rep.invariant.certified and rep.last_hope.certified
    assert np.all(rep.x_lower <= rep.x_upper)
