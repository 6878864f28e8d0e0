"""Periodic orbits: lifted fixed-point form, detection, classification."""

import numpy as np
import pytest

from finnet import fixtures
from finnet.cycles import (
    CycleHit,
    InsufficientLengthError,
    build_lifted,
    classify_limit,
    detect_cycle,
    verify_no_period2,
)
from finnet.netmodel import ShiftedModel, simulate


def ring_model():
    return ShiftedModel.from_network(fixtures.ring4())


def test_lifted_block_structure():
    model = ring_model()
    lift = build_lifted(model, 3)
    n = model.n
    assert lift.C_lift.shape == (3 * n, 3 * n)
    # row block i reads from column block i-1, with block row 0 wrapping
    np.testing.assert_array_equal(lift.C_lift[:n, 2 * n:], model.C)
    np.testing.assert_array_equal(lift.C_lift[n:2 * n, :n], model.C)
    np.testing.assert_array_equal(lift.C_lift[2 * n:, n:2 * n], model.C)
    assert lift.C_lift[:n, :2 * n].sum() == 0.0
    np.testing.assert_array_equal(lift.B_lift[:n, 2 * n:], np.diag(model.beta))
    np.testing.assert_array_equal(lift.constant, np.tile(model.r, 3))


def test_lifted_residual_vanishes_on_known_orbit():
    # orbit coordinates are pinned to 4 decimals, hence the loose tol
    lift = build_lifted(ring_model(), 8)
    Z = lift.stack_orbit(fixtures.RING4_ORBIT)
    assert np.max(np.abs(lift.residual(Z))) < 1e-3


def test_lifted_residual_vanishes_on_equilibrium():
    model = ring_model()
    lift = build_lifted(model, 1)
    x = np.full(4, -5.0)            # all-failed fixed point of the ring
    assert np.max(np.abs(lift.residual(x))) < 1e-12
    assert np.max(np.abs(lift.residual(x + 0.3))) > 1e-3


def test_stack_orbit_shape_guard():
    lift = build_lifted(ring_model(), 8)
    with pytest.raises(ValueError):
        lift.stack_orbit(np.zeros((7, 4)))


def test_detect_cycle_period8_on_ring():
    model = ring_model()
    traj = simulate(model, fixtures.RING4_ORBIT[0], 300)
    hit = detect_cycle(traj)
    assert hit is not None and hit.period == 8
    assert not hit.is_equilibrium


def test_detect_cycle_period1_is_equilibrium():
    model = ring_model()
    traj = simulate(model, -np.ones(4), 400)
    hit = detect_cycle(traj)
    assert hit == CycleHit(period=1, phase=hit.phase)
    assert hit.is_equilibrium


def test_detect_cycle_needs_enough_states():
    model = ring_model()
    traj = simulate(model, np.ones(4), 10)
    with pytest.raises(InsufficientLengthError):
        detect_cycle(traj)


def test_detect_cycle_none_when_period_exceeds_hmax():
    model = ring_model()
    traj = simulate(model, fixtures.RING4_ORBIT[0], 300)
    assert detect_cycle(traj, h_max=4) is None


def test_no_period2_on_fixtures():
    for make in (fixtures.two_bank, fixtures.ring4, fixtures.complete10):
        model = ShiftedModel.from_network(make())
        rep = verify_no_period2(model, trials=40, seed=3)
        assert rep.ok
        assert sum(rep.period_counts.values()) == 40
        assert not rep.violations


def test_no_period2_random_sweep():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        model = ShiftedModel.from_network(fixtures.random_network(rng, n))
        rep = verify_no_period2(model, trials=5, seed=int(rng.integers(10000)))
        assert rep.ok, f"period-2 violation on a random {n}-node network"


def test_classify_cycle():
    model = ring_model()
    res = classify_limit(model, fixtures.RING4_ORBIT[0])
    assert res.kind == "cycle" and res.period == 8
    assert res.orbit.shape == (8, 4)
    # one more step maps the last orbit row back onto the first
    np.testing.assert_allclose(model.step(res.orbit[-1]), res.orbit[0], atol=1e-6)


def test_classify_equilibrium():
    model = ring_model()
    res = classify_limit(model, -np.ones(4))
    assert res.kind == "equilibrium" and res.period == 1
    np.testing.assert_allclose(res.point, -5.0 * np.ones(4), atol=1e-6)
    assert res.transient > 0


def test_classify_critical_screens_first():
    model = ring_model()
    res = classify_limit(model, np.zeros(4))
    assert res.kind == "critical"
    assert res.first_critical == (0, 0)
    assert res.period is None


def test_classify_undetermined_when_hmax_too_small():
    model = ring_model()
    res = classify_limit(model, fixtures.RING4_ORBIT[0], h_max=4)
    assert res.kind == "undetermined"
