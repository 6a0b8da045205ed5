import numpy as np
import pytest

from ellipmpc import oracles
from ellipmpc.geometry import from_semi_axes
from ellipmpc.kinematics import Family, RobotModel, robot_ellipsoid
from ellipmpc.ocp import OcpSpec, constraint_values, rollout, total_cost
from ellipmpc.overlap import kappa_star
from ellipmpc.scenario import bundled
from ellipmpc.settings import SolverSettings
from ellipmpc.solver import (STATUSES, _projected_gradient,
                             augmented_lagrangian_value, constraint_scales, solve)

OMNI = RobotModel(Family.OMNI, (0.35, 0.2))
NO_CLOCK = SolverSettings(time_budget=0)


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(max_outer=0)
    with pytest.raises(ValueError):
        SolverSettings(penalty_growth=1.0)
    with pytest.raises(ValueError):
        SolverSettings(shrink=1.0)
    assert SolverSettings().budget_for(0.2) == pytest.approx(0.18)
    assert SolverSettings(time_budget=0).budget_for(0.2) is None
    assert SolverSettings(time_budget=0.05).budget_for(0.2) == 0.05


def test_origin_stays(backend):
    r = solve(OcpSpec(OMNI, settings=NO_CLOCK), (0, 0, 0), np.zeros(30))
    assert r.status == "optimal"
    np.testing.assert_array_equal(r.z_opt, np.zeros(30))


def _grid_oracle_first_block(spec, x0, step=1e-3):
    # omni costs are separable per coordinate, so the exhaustive search over
    # constant inputs splits into one 1-D grid per input channel
    lo, hi = spec.model.input_lower, spec.model.input_upper
    best = []
    for j in range(3):
        cands = np.arange(lo[j], hi[j] + step / 2, step)
        costs = []
        for c in cands:
            u = np.zeros(3)
            u[j] = c
            costs.append(total_cost(spec, x0, np.tile(u, spec.horizon))[0])
        best.append(cands[int(np.argmin(costs))])
    return np.array(best)


def test_saturating_first_block(backend):
    spec = OcpSpec(OMNI, settings=NO_CLOCK)
    r = solve(spec, (1, 0, 0))
    assert r.status == "optimal"
    np.testing.assert_allclose(r.z_opt[:3], (-0.2, 0, 0), atol=1e-6)
    np.testing.assert_allclose(_grid_oracle_first_block(spec, (1, 0, 0)),
                               r.z_opt[:3], atol=1e-3)


def test_obstacle_free_projected_gradient(backend, rng):
    spec = OcpSpec(OMNI, settings=NO_CLOCK)
    for _ in range(5):
        x0 = rng.uniform(-1, 1, 3)
        r = solve(spec, x0)
        lo, hi = spec.bounds()
        assert r.projected_gradient <= spec.settings.gradient_tol
        assert r.status == "optimal"
        assert np.all(r.z_opt >= lo) and np.all(r.z_opt <= hi)


def test_bad_warm_start_falls_back(backend):
    spec = OcpSpec(OMNI, settings=NO_CLOCK)
    r = solve(spec, (1, 0, 0), warm=np.ones(7))
    assert r.status == "optimal"
    r2 = solve(spec, (1, 0, 0), warm=np.full(30, 5.0))
    # quartic costs are flat near zero, so free inputs settle to ~1e-5
    np.testing.assert_allclose(r2.z_opt, r.z_opt, atol=1e-4)


def test_infeasible_start_recovers(backend):
    obs = from_semi_axes(0.3, 0.25, 0.0, (0.0, 0.0))
    spec = OcpSpec(OMNI, obstacles=[obs], settings=NO_CLOCK)
    x0 = np.array([-0.6, 0.05, 0.0])
    assert kappa_star(robot_ellipsoid(OMNI, x0), obs).kappa_star > 0
    r = solve(spec, x0)
    assert r.start_infeasible
    assert r.status in ("infeasible-start-recovered", "acceptable")
    xs = rollout(spec, x0, r.z_opt)
    before = kappa_star(robot_ellipsoid(OMNI, x0), obs).kappa_star
    after = kappa_star(robot_ellipsoid(OMNI, xs[-1]), obs).kappa_star
    assert after < before


def test_al_inactive_penalty(backend):
    obs = from_semi_axes(0.2, 0.2, 0.0, (3.0, 3.0))
    spec = OcpSpec(OMNI, obstacles=[obs])
    z = np.full(30, 0.05)
    val, grad, _ = augmented_lagrangian_value(spec, (0, 0, 0), z,
                                              np.zeros((11, 1)), 10.0)
    cost, cgrad = total_cost(spec, (0, 0, 0), z)
    assert val == pytest.approx(cost)
    np.testing.assert_allclose(grad, cgrad)


def test_al_single_violation_adds_five(backend):
    # a fast unit-circle robot starts concentric with a unit-circle obstacle
    # (kappa = det = 1) and leaves it within one step
    fast = RobotModel(Family.OMNI, (1.0, 1.0), [-20, -20, -1], [20, 20, 1])
    spec = OcpSpec(fast, horizon=1, obstacles=[from_semi_axes(1, 1)])
    z = np.array([20.0, 0.0, 0.0])
    vals = constraint_values(spec, (0, 0, 0), z, jacobian=False)[0]
    assert vals[0, 0] == pytest.approx(1.0) and vals[1, 0] < 0
    val, _, _ = augmented_lagrangian_value(spec, (0, 0, 0), z, np.zeros((2, 1)), 10.0)
    assert val - total_cost(spec, (0, 0, 0), z)[0] == pytest.approx(5.0)


def test_al_gradient_fd(backend, rng):
    for _ in range(10):
        obs = [oracles.random_ellipse(rng, 0.8, (0.1, 0.4)) for _ in range(2)]
        spec = OcpSpec(OMNI, obstacles=obs, inflation_margin=0.02)
        lo, hi = spec.bounds()
        x0 = rng.uniform(-1, 1, 3)
        z = rng.uniform(lo, hi)
        mu = rng.uniform(0, 2, (11, 2))
        scales = constraint_scales(spec)
        f = lambda zz: augmented_lagrangian_value(spec, x0, zz, mu, 3.0, scales)
        _, g, _ = f(z)
        g_fd = np.array([(f(z + h)[0] - f(z - h)[0]) / 2e-6
                         for h in np.eye(30) * 1e-6])
        assert np.linalg.norm(g - g_fd) <= 1e-5 * max(np.linalg.norm(g_fd), 1e-8)


def test_al_rejects_bad_arguments():
    spec = OcpSpec(OMNI, obstacles=[from_semi_axes(1, 1, 0, (3, 0))])
    with pytest.raises(ValueError):
        augmented_lagrangian_value(spec, (0, 0, 0), np.zeros(30), np.zeros((11, 1)), 0)
    with pytest.raises(ValueError):
        augmented_lagrangian_value(spec, (0, 0, 0), np.zeros(30),
                                   -np.ones((11, 1)), 1)


def test_projected_gradient_norm():
    z = np.array([0.0, 1.0])
    g = np.array([1.0, -1.0])
    assert _projected_gradient(z, g, np.zeros(2), np.ones(2)) == 0.0
    assert _projected_gradient(z, -g, np.zeros(2), np.ones(2)) == 1.0


def test_outer_progress_or_penalty_growth(backend):
    s = bundled("omni_three_obstacles")
    spec = s.ocp()
    spec = OcpSpec(spec.model, spec.horizon, spec.cost, spec.obstacles,
                   spec.inflation_margin, 0.0, NO_CLOCK)
    r = solve(spec, s.x0)
    h = r.history
    for prev, cur in zip(h, h[1:]):
        assert cur["scaled_violation"] <= prev["scaled_violation"] or cur["increased"]
    assert r.status in STATUSES
    assert r.max_violation >= 0


def test_determinism(backend):
    s = bundled("omni_three_obstacles")
    spec = s.ocp()
    spec = OcpSpec(spec.model, spec.horizon, spec.cost, spec.obstacles,
                   spec.inflation_margin, 0.0, NO_CLOCK)
    a, b = solve(spec, s.x0), solve(spec, s.x0)
    assert a.status == b.status
    np.testing.assert_array_equal(a.z_opt, b.z_opt)
    assert a.inner_iterations == b.inner_iterations


def test_budget_expiry_reports_max_iterations(backend):
    s = bundled("omni_three_obstacles")
    tiny = SolverSettings(time_budget=1e-6)
    spec = OcpSpec(s.model, 10, s.cost, s.obstacles, 0.02, 0.0, tiny)
    r = solve(spec, s.x0)
    assert r.budget_expired and r.status == "max-iterations"
    lo, hi = spec.bounds()
    assert np.all(r.z_opt >= lo) and np.all(r.z_opt <= hi)


def test_finite_difference_mode_matches(backend):
    # obstacle far enough away that the optimum is unique
    obs = [from_semi_axes(0.2, 0.15, 0.3, (0.5, 1.0))]
    fd = OcpSpec(OMNI, horizon=4, obstacles=obs,
                 settings=SolverSettings(time_budget=0, finite_difference=True))
    exact = OcpSpec(OMNI, horizon=4, obstacles=obs, settings=NO_CLOCK)
    a = solve(exact, (1.0, 0.0, 0.0))
    b = solve(fd, (1.0, 0.0, 0.0))
    assert b.status == "optimal"
    np.testing.assert_allclose(b.z_opt[:3], a.z_opt[:3], atol=1e-4)


def test_trace_rows(backend):
    spec = OcpSpec(OMNI, horizon=3,
                   settings=SolverSettings(time_budget=0, trace=True))
    r = solve(spec, (1, 0, 0))
    assert r.trace and all(len(row) == 5 for row in r.trace)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_nonfinite_raises(backend):
    from ellipmpc.errors import NumericalError
    spec = OcpSpec(OMNI, obstacles=[from_semi_axes(1, 1, 0, (3, 0))],
                   settings=NO_CLOCK)
    with pytest.raises(NumericalError) as exc:
        solve(spec, (np.inf, 0, 0))
    assert "x0" in exc.value.payload
