import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellipmpc import oracles
from ellipmpc.geometry import from_semi_axes
from ellipmpc.kinematics import Family, RobotModel, robot_ellipsoid, step
from ellipmpc.ocp import (CostSpec, OcpSpec, constraint_values, default_cost,
                          rollout, shift_warm_start, total_cost)
from ellipmpc.overlap import kappa_star

OMNI = RobotModel(Family.OMNI, (0.35, 0.2))
DD = RobotModel(Family.DIFF_DRIVE, (0.2, 0.1))


def _fd(fun, z, h=1e-6):
    cols = []
    for i in range(z.shape[0]):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        cols.append((np.asarray(fun(zp)) - np.asarray(fun(zm))) / (2 * h))
    return np.array(cols).T


def test_cost_spec_validation():
    with pytest.raises(ValueError):
        CostSpec((1, 1, 0), (1, 1))
    with pytest.raises(ValueError):
        CostSpec((1, 1, 1), (1, 1), (2, 3, 2), (2, 2))
    with pytest.raises(ValueError):
        CostSpec((1, 1), (1, 1), (2, 2), (2, 2))
    with pytest.raises(ValueError):
        CostSpec((1, 1, 1), (1, 1), (2, 2, 2), (2, 2, 2))
    with pytest.raises(ValueError):
        OcpSpec(DD, cost=CostSpec.quadratic())


def test_default_costs():
    assert default_cost(Family.OMNI) == CostSpec((1, 1, 0.1), (0.1, 0.1, 0.01))
    dd = default_cost(Family.DIFF_DRIVE)
    assert dd.state_exponents == (4, 2, 4) and dd.input_exponents == (4, 4)
    assert dd.stage((1, 1, 1), (1, 1)) == pytest.approx(2.03)


def test_ocp_spec_validation():
    with pytest.raises(ValueError):
        OcpSpec(OMNI, horizon=0)
    with pytest.raises(ValueError):
        OcpSpec(OMNI, inflation_margin=-0.1)
    spec = OcpSpec(OMNI, horizon=4)
    assert spec.n_decision == 12 and spec.n_obstacles == 0
    lo, hi = spec.bounds()
    assert lo.shape == (12,) and np.all(hi == np.tile(OMNI.input_upper, 4))


@pytest.mark.parametrize("model", [OMNI, DD])
def test_zero_input_holds_pose(backend, model):
    spec = OcpSpec(model)
    xs = rollout(spec, (0.3, -0.4, 1.2), np.zeros(spec.n_decision))
    assert xs.shape == (11, 3)
    np.testing.assert_allclose(xs, np.tile((0.3, -0.4, 1.2), (11, 1)))


def test_omni_rollout_sum(backend):
    spec = OcpSpec(OMNI)
    xs = rollout(spec, (0, 0, 0), np.tile((0.2, 0, 0), 10))
    np.testing.assert_allclose(xs[-1], (0.4, 0, 0), atol=1e-15)


def test_diff_drive_rollout_against_integrator(backend):
    spec = OcpSpec(DD)
    xs = rollout(spec, (0, 0, 0), np.tile((0.2, math.pi / 4), 10))
    ref = np.zeros(3)
    for _ in range(10):
        ref = oracles.diff_drive_integrate(ref, (0.2, math.pi / 4), 0.2)
    np.testing.assert_allclose(xs[-1], ref, atol=1e-9)


def test_rollout_is_causal(backend, rng):
    spec = OcpSpec(DD)
    z = rng.uniform(np.tile(DD.input_lower, 10), np.tile(DD.input_upper, 10))
    base = rollout(spec, (0, 0, 0), z)
    for k in range(10):
        zp = z.copy()
        zp[2 * k:2 * k + 2] += 0.01
        moved = rollout(spec, (0, 0, 0), zp)
        np.testing.assert_array_equal(moved[:k + 1], base[:k + 1])
        assert np.any(moved[k + 1] != base[k + 1])


def test_cost_examples(backend):
    spec = OcpSpec(OMNI)
    cost, grad = total_cost(spec, (0, 0, 0), np.zeros(30))
    assert cost == 0.0 and np.all(grad == 0)
    unit = OcpSpec(OMNI, horizon=1, cost=CostSpec((1, 1, 1), (1, 1, 1)))
    assert total_cost(unit, (1, 0, 0), np.zeros(3))[0] == pytest.approx(2.0)


@pytest.mark.parametrize("model", [OMNI, DD])
def test_cost_gradient_fd(backend, model, rng):
    spec = OcpSpec(model)
    lo, hi = spec.bounds()
    for _ in range(20):
        x0 = rng.uniform(-1, 1, 3)
        z = rng.uniform(lo, hi)
        c, g = total_cost(spec, x0, z)
        assert c >= 0
        g_fd = _fd(lambda zz: total_cost(spec, x0, zz)[0], z)
        assert np.linalg.norm(g - g_fd) <= 1e-5 * max(np.linalg.norm(g_fd), 1e-10)


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.floats(-3, 3)] * 3),
       st.lists(st.floats(-0.2, 0.2), min_size=20, max_size=20))
def test_cost_nonnegative(x0, z):
    spec = OcpSpec(DD)
    c = total_cost(spec, x0, np.array(z))[0]
    assert c >= 0
    if c == 0:
        assert np.allclose(x0, 0) and np.allclose(z, 0)


def test_constraints_without_obstacles(backend):
    spec = OcpSpec(OMNI)
    vals, jac = constraint_values(spec, (0, 0, 0), np.zeros(30))
    assert vals.shape == (11, 0) and jac.shape == (0, 30)


def test_far_obstacle_negative(backend):
    circ = RobotModel(Family.OMNI, (0.2, 0.2))
    obs = from_semi_axes(1, 1, 0, (5, 0))
    spec = OcpSpec(circ, obstacles=[obs])
    vals, _ = constraint_values(spec, (0, 0, 0), np.zeros(30))
    assert np.all(vals < 0)
    assert not oracles.raster_overlap(robot_ellipsoid(circ, (0, 0, 0)), obs)
    _, kq = oracles.kappa_grid(robot_ellipsoid(circ, (0, 0, 0)), obs, 2001)
    assert vals[0, 0] == pytest.approx(kq, rel=1e-4)


def test_concentric_obstacle_positive(backend):
    spec = OcpSpec(OMNI, obstacles=[from_semi_axes(0.1, 0.3, 0.2, (1, 1))])
    vals, _ = constraint_values(spec, (1, 1, 0), np.zeros(30))
    assert np.all(vals > 0)


def test_constraint_values_use_inflated_footprint(backend):
    obs = from_semi_axes(0.3, 0.2, 0.4, (0.8, 0.3))
    spec = OcpSpec(OMNI, obstacles=[obs], inflation_margin=0.05)
    x0 = (0.1, -0.1, 0.3)
    vals, _ = constraint_values(spec, x0, np.zeros(30), jacobian=False)
    raw, _ = constraint_values(spec, x0, np.zeros(30), False, raw_footprint=True)
    assert vals[0, 0] == pytest.approx(
        kappa_star(robot_ellipsoid(OMNI, x0, 0.05), obs).kappa_star)
    assert raw[0, 0] == pytest.approx(
        kappa_star(robot_ellipsoid(OMNI, x0), obs).kappa_star)
    assert vals[0, 0] > raw[0, 0]


@pytest.mark.parametrize("model", [OMNI, DD])
def test_constraint_jacobian_fd(backend, model, rng):
    checked = 0
    while checked < 10:
        obs = [oracles.random_ellipse(rng, 1.0, (0.1, 0.4)) for _ in range(2)]
        spec = OcpSpec(model, obstacles=obs, inflation_margin=0.02)
        lo, hi = spec.bounds()
        x0 = rng.uniform(-1, 1, 3)
        z = rng.uniform(lo, hi)
        vals, jac = constraint_values(spec, x0, z)
        xs = rollout(spec, x0, z)
        rows = [k * 2 + i for k in range(1, 11) for i in range(2)
                if kappa_star(robot_ellipsoid(model, xs[k], 0.02),
                              obs[i]).branch == "interior-cubic"]
        if not rows:
            continue
        assert np.all(jac[:2] == 0)
        fd = _fd(lambda zz: constraint_values(spec, x0, zz, False)[0].ravel(), z)
        err = np.linalg.norm(jac[rows] - fd[rows])
        assert err <= 1e-4 * max(np.linalg.norm(fd[rows]), 1e-8)
        checked += 1


def test_shift_warm_start():
    a, b = [1.0, 2.0], [3.0, 4.0]
    np.testing.assert_array_equal(shift_warm_start(np.array(a + b), DD), b + b)
    np.testing.assert_array_equal(shift_warm_start(np.zeros(20), DD), np.zeros(20))
    z = np.arange(30.0)
    out = shift_warm_start(z, OMNI)
    assert out.shape == z.shape
    np.testing.assert_array_equal(out[:27], z[3:])
    with pytest.raises(ValueError):
        shift_warm_start(np.zeros(5), DD)


def test_plant_matches_prediction(backend, rng):
    spec = OcpSpec(DD)
    z = rng.uniform(*spec.bounds())
    x0 = np.array([0.2, -0.3, 0.5])
    np.testing.assert_allclose(step(DD, x0, z[:2]), rollout(spec, x0, z)[1],
                               atol=1e-12)
