"""Randomized property suites behind ``ellipmpc verify``.

Every suite draws its cases from a seeded generator, so a fixed seed gives
an identical report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from . import oracles
from .geometry import contains, from_semi_axes, inflate, membership, rigid_transform
from .kinematics import Family, RobotModel, robot_ellipsoid
from .ocp import OcpSpec, constraint_values, rollout, total_cost
from .overlap import cubic_coefficients, kappa_star, lambda_family
from .settings import SolverSettings
from .solver import STATUSES, solve

SUITES = ("geometry", "overlap", "solver")


@dataclass
class SuiteReport:
    name: str
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def record(self, check: str, ok: bool, detail=None):
        passed, total = self.counts.get(check, (0, 0))
        self.counts[check] = (passed + bool(ok), total + 1)
        if not ok and len(self.failures) < 20:
            self.failures.append((check, detail))

    @property
    def ok(self) -> bool:
        return all(p == t for p, t in self.counts.values())

    def lines(self) -> list[str]:
        out = [f"[{self.name}] {'PASS' if self.ok else 'FAIL'}"]
        for check, (p, t) in sorted(self.counts.items()):
            out.append(f"  {check}: {p}/{t}")
        for check, detail in self.failures:
            out.append(f"  failed {check}: {detail}")
        return out


def _rel(a, b, floor=1e-12):
    return abs(a - b) / max(abs(a), abs(b), floor)


def geometry_suite(n: int, rng: np.random.Generator) -> SuiteReport:
    rep = SuiteReport("geometry")
    for _ in range(n):
        a, b = rng.uniform(0.05, 2.0, size=2)
        th = rng.uniform(-math.pi, math.pi)
        c = rng.uniform(-3, 3, size=2)
        e = from_semi_axes(a, b, th, c)
        lengths, _ = e.semi_axes()
        rep.record("semi_axes_roundtrip",
                   np.allclose(lengths, sorted((a, b)), rtol=1e-9))
        p = c + rng.normal(size=2)
        phi = rng.uniform(-math.pi, math.pi)
        t = rng.normal(size=2)
        moved = rigid_transform(e, phi, t)
        r = np.array([[math.cos(phi), -math.sin(phi)],
                      [math.sin(phi), math.cos(phi)]])
        rep.record("rigid_membership",
                   _rel(membership(e, p), membership(moved, r @ p + t)) < 1e-9)
        margin = rng.uniform(0.0, 0.5)
        grown = inflate(e, margin)
        u = rng.normal(size=2)
        boundary = c + u / math.sqrt(float(u @ e.matrix @ u))
        rep.record("inflate_contains", contains(grown, boundary))
    return rep


def overlap_suite(n: int, rng: np.random.Generator) -> SuiteReport:
    rep = SuiteReport("overlap")
    for _ in range(n):
        e1, e2 = oracles.random_pair(rng)
        res = kappa_star(e1, e2)
        if abs(res.kappa_star) > 1e-3:
            truth = oracles.raster_overlap(e1, e2)
            rep.record("sign_vs_raster", (res.kappa_star > 0) == truth,
                       (res.kappa_star, truth))
        k0 = lambda_family(e1, e2, 0.0).k_value
        k1 = lambda_family(e1, e2, 1.0).k_value
        rep.record("endpoint_identity",
                   abs(k0 - 1) <= 1e-12 and abs(k1 - 1) <= 1e-12, (k0, k1))
        c = cubic_coefficients(e1, e2)
        det_a = float(np.linalg.det(e1.matrix))
        det_b = float(np.linalg.det(e2.matrix))
        scale = max(abs(v) for v in c.as_tuple())
        rep.record("cubic_endpoints",
                   abs(c.h0 - det_b) <= 1e-9 * max(det_b, scale)
                   and abs(c.h0 + c.h1 + c.h2 + c.h3 - det_a)
                   <= 1e-9 * max(det_a, scale))
        swapped = kappa_star(e2, e1)
        rep.record("swap_symmetry",
                   _rel(res.kappa_star, swapped.kappa_star) < 1e-9
                   and abs(res.lambda_star - (1 - swapped.lambda_star)) < 1e-9
                   or abs(res.kappa_star - swapped.kappa_star) < 1e-12)
        phi = rng.uniform(-math.pi, math.pi)
        t = rng.normal(size=2)
        moved = kappa_star(rigid_transform(e1, phi, t), rigid_transform(e2, phi, t))
        rep.record("rigid_invariance",
                   _rel(res.kappa_star, moved.kappa_star, 1e-9) < 1e-9,
                   (res.kappa_star, moved.kappa_star))
        if res.branch == "interior-cubic":
            lam_grid = oracles.cubic_grid_argmin(c.as_tuple(), 100_001)
            rep.record("lambda_vs_grid", abs(lam_grid - res.lambda_star) <= 2e-5,
                       (res.lambda_star, lam_grid))
    return rep


def _fd(fun, z, h):
    out = []
    for i in range(z.shape[0]):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        out.append((fun(zp) - fun(zm)) / (2 * h))
    return np.array(out).T


def solver_suite(n: int, rng: np.random.Generator) -> SuiteReport:
    rep = SuiteReport("solver")
    model = RobotModel(Family.OMNI, (0.35, 0.2))
    settings = SolverSettings(time_budget=0)
    for _ in range(n):
        fam = Family.OMNI if rng.random() < 0.5 else Family.DIFF_DRIVE
        model = RobotModel(fam, (0.35, 0.2) if fam is Family.OMNI else (0.2, 0.1))
        obs = [oracles.random_ellipse(rng, 1.5, (0.05, 0.3)) for _ in range(2)]
        x0 = np.array([*rng.uniform(-1.5, 1.5, 2), rng.uniform(-1, 1)])
        spec = OcpSpec(model, 10, obstacles=obs, inflation_margin=0.02,
                       settings=settings)
        lo, hi = spec.bounds()
        z = rng.uniform(lo, hi)
        _, g = total_cost(spec, x0, z)
        g_fd = _fd(lambda zz: total_cost(spec, x0, zz)[0], z, 1e-6)
        rep.record("cost_gradient_fd",
                   np.linalg.norm(g - g_fd) <= 1e-5 * max(np.linalg.norm(g_fd), 1e-8))
        vals, jac = constraint_values(spec, x0, z)
        jac_fd = _fd(lambda zz: constraint_values(spec, x0, zz, False)[0].ravel(),
                     z, 1e-6)
        xs = rollout(spec, x0, z)
        rows = [k * len(obs) + i for k in range(1, spec.horizon + 1)
                for i, o in enumerate(obs)
                if kappa_star(robot_ellipsoid(model, xs[k], 0.02), o).branch
                == "interior-cubic"]
        if rows:
            err = np.linalg.norm(jac[rows] - jac_fd[rows])
            rep.record("jacobian_fd",
                       err <= 1e-4 * max(np.linalg.norm(jac_fd[rows]), 1e-8))
        clear = np.all(vals[0] < 0)
        r = solve(spec, x0)
        rep.record("status_valid", r.status in STATUSES, r.status)
        rep.record("within_bounds",
                   bool(np.all(r.z_opt >= lo) and np.all(r.z_opt <= hi)))
        if clear:
            rep.record("start_flag_consistent", not r.start_infeasible)
    return rep


def run_suites(names, pairs: int, seed: int) -> list[SuiteReport]:
    """Run the named suites; each gets its own stream derived from ``seed``."""
    reports = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        rng = np.random.default_rng([seed, SUITES.index(name)])
        fn = {"geometry": geometry_suite, "overlap": overlap_suite,
              "solver": solver_suite}[name]
        count = pairs if name != "solver" else min(pairs, 50)
        reports.append(fn(count, rng))
    return reports
