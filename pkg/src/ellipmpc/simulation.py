"""Closed-loop receding-horizon simulation and its CSV log."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import hashlib
import json

import numpy as np

from ._csv import fmt
from .errors import NumericalError
from .geometry import Ellipsoid, PlanarPose
from .kinematics import RobotModel, step
from .ocp import CostSpec, OcpSpec, constraint_values, shift_warm_start
from .settings import SolverSettings
from .solver import solve


@dataclass(frozen=True, eq=False)
class Scenario:
    model: RobotModel
    x0: PlanarPose
    obstacles: tuple[Ellipsoid, ...] = ()
    cost: CostSpec | None = None
    horizon: int = 10
    inflation_margin: float = 0.0
    constraint_margin: float = 0.0
    settings: SolverSettings = field(default_factory=SolverSettings)
    duration: float = 10.0
    name: str = "scenario"

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not isinstance(self.x0, PlanarPose):
            object.__setattr__(self, "x0", PlanarPose.from_array(self.x0))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.model.dt))

    def ocp(self) -> OcpSpec:
        return OcpSpec(self.model, self.horizon, self.cost, self.obstacles,
                       self.inflation_margin, self.constraint_margin,
                       self.settings)

    def fingerprint(self) -> str:
        """Stable hash of the configuration, used to seed perturbations."""
        cost = self.cost
        payload = {
            "family": self.model.family.value,
            "semi_axes": list(self.model.semi_axes),
            "bounds": [self.model.input_lower.tolist(),
                       self.model.input_upper.tolist()],
            "dt": self.model.dt,
            "x0": self.x0.as_array().tolist(),
            "obstacles": [[*o.matrix.ravel().tolist(), *o.center.tolist()]
                          for o in self.obstacles],
            "cost": None if cost is None else [
                cost.state_weights, cost.input_weights,
                cost.state_exponents, cost.input_exponents],
            "horizon": self.horizon,
            "inflation": self.inflation_margin,
            "margin": self.constraint_margin,
            "duration": self.duration,
        }
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ClosedLoopLog:
    """One row per sample ``t = 0, dt, ..., duration``.

    ``kappa_o`` uses the inflated footprint the controller constrains;
    ``kappa_r`` the raw footprint. Both are evaluated at the true pose.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    kappa_o: np.ndarray
    kappa_r: np.ndarray
    status: list
    solve_time: np.ndarray
    measured: np.ndarray | None = None
    iterations: list = field(default_factory=list)
    error: str | None = None
    trace: list = field(default_factory=list)  # per-step solver traces

    def __len__(self):
        return len(self.t)

    @property
    def collided(self) -> bool:
        return bool(self.kappa_r.size and np.any(self.kappa_r >= 0.0))

    def header(self) -> list[str]:
        nu = self.u.shape[1]
        nobs = self.kappa_o.shape[1]
        cols = ["t", "x1", "x2", "theta"] + [f"u{j + 1}" for j in range(nu)]
        cols += [f"kappa_o_{i + 1}" for i in range(nobs)]
        cols += [f"kappa_r_{i + 1}" for i in range(nobs)]
        cols += ["status", "solve_ms"]
        if self.measured is not None:
            cols += ["meas_x1", "meas_x2", "meas_theta"]
        return cols

    def rows(self):
        for k in range(len(self.t)):
            row = [fmt(self.t[k])] + [fmt(v) for v in self.x[k]]
            row += [fmt(v) for v in self.u[k]]
            row += [fmt(v) for v in self.kappa_o[k]]
            row += [fmt(v) for v in self.kappa_r[k]]
            row += [self.status[k], fmt(1e3 * self.solve_time[k])]
            if self.measured is not None:
                row += [fmt(v) for v in self.measured[k]]
            yield row

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            w.writerows(self.rows())


def _kappas(spec: OcpSpec, x) -> tuple[np.ndarray, np.ndarray]:
    z = np.zeros(spec.n_decision)
    ko = constraint_values(spec, x, z, jacobian=False)[0][0]
    kr = constraint_values(spec, x, z, jacobian=False, raw_footprint=True)[0][0]
    return ko, kr


def _simulate(scenario: Scenario, noise_std: float = 0.0) -> ClosedLoopLog:
    spec = scenario.ocp()
    model = scenario.model
    nu = model.n_inputs
    nobs = len(scenario.obstacles)
    n = scenario.n_steps + 1
    rng = None
    if noise_std > 0:
        seed = int(scenario.fingerprint()[:16], 16)
        rng = np.random.default_rng(seed)
    t = np.arange(n) * model.dt
    xs = np.zeros((n, 3))
    us = np.zeros((n, nu))
    ko = np.zeros((n, nobs))
    kr = np.zeros((n, nobs))
    meas = np.zeros((n, 3)) if rng is not None else None
    status = []
    times = np.zeros(n)
    iters = []
    trace = []
    x = scenario.x0.as_array()
    z = np.zeros(spec.n_decision)
    for k in range(n):
        xs[k] = x
        ko[k], kr[k] = _kappas(spec, x)
        y = x if rng is None else x + rng.normal(0.0, noise_std, 3)
        if meas is not None:
            meas[k] = y
        try:
            rep = solve(spec, y, warm=z)
        except NumericalError as exc:
            m = k + 1
            return ClosedLoopLog(
                t[:m], xs[:m], us[:m], ko[:m], kr[:m], status + ["error"],
                times[:m], None if meas is None else meas[:m], iters,
                error=f"{exc} {exc.payload}", trace=trace)
        u = rep.z_opt[:nu]
        us[k] = u
        status.append(rep.status)
        times[k] = rep.wall_time
        iters.append((rep.outer_iterations, rep.inner_iterations))
        if spec.settings.trace:
            trace.append(rep.trace)
        z = shift_warm_start(rep.z_opt, model)
        x = step(model, x, u)
    return ClosedLoopLog(t, xs, us, ko, kr, status, times, meas, iters,
                         trace=trace)


def run(scenario: Scenario) -> ClosedLoopLog:
    """Nominal closed loop: the plant uses the prediction model's step map."""
    return _simulate(scenario)


def perturbed_run(scenario: Scenario, pose_noise_std: float) -> ClosedLoopLog:
    """Closed loop with Gaussian pose measurement noise.

    The noise stream is seeded from the scenario fingerprint, so repeated
    runs are identical. The log records both true and measured poses.
    """
    if pose_noise_std < 0:
        raise ValueError("noise standard deviation must be nonnegative")
    log = _simulate(scenario, pose_noise_std)
    if log.measured is None:
        log.measured = log.x.copy()
    return log


def _run_one(args):
    scenario, noise = args
    return perturbed_run(scenario, noise) if noise else run(scenario)


def run_batch(scenarios, noise_std: float = 0.0, workers: int | None = None):
    """Run independent scenarios in worker processes; order is preserved."""
    jobs = [(s, noise_std) for s in scenarios]
    if workers == 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
