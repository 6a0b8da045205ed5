"""Augmented Lagrangian solver for the condensed OCP.

Outer loop: first-order multiplier updates for the overlap constraints
``kappa + eps <= 0``; the penalty grows only when the violation fails to
halve. Inner loop: projected gradient with limited-memory quasi-Newton
scaling and Armijo backtracking along the projection arc, so iterates never
leave the input box.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
import math
import time

import numpy as np

from ._backend import kernels
from .errors import NumericalError
from .ocp import OcpSpec, _vec, total_cost
from .settings import SolverSettings

__all__ = ["SolverSettings", "SolveReport", "solve",
           "augmented_lagrangian_value", "STATUSES"]

STATUSES = ("optimal", "acceptable", "max-iterations",
            "infeasible-start-recovered")


@dataclass
class SolveReport:
    z_opt: np.ndarray
    status: str
    max_violation: float
    outer_iterations: int
    inner_iterations: int
    wall_time: float
    cost: float = 0.0
    projected_gradient: float = 0.0
    start_infeasible: bool = False
    budget_expired: bool = False
    constraint_values: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    history: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def constraint_scales(spec: OcpSpec) -> np.ndarray:
    """Per-obstacle factors ``1 / sqrt(det(robot) det(obstacle))``.

    Raw overlap values grow with both determinants; the scaled values stay
    O(1) near contact, which keeps the penalty Hessian well conditioned.
    """
    a, b = spec.packed["ab"]
    det_r = 1.0 / (a * a * b * b)
    obs = spec.packed["obs"]
    det_o = obs[:, 0] * obs[:, 2] - obs[:, 1] ** 2
    return np.ascontiguousarray(1.0 / np.sqrt(det_r * det_o))


def augmented_lagrangian_value(spec: OcpSpec, x0, z, multipliers, rho,
                               scales=None):
    """AL merit, its gradient w.r.t. ``z`` and the raw constraint matrix.

    ``cost + sum(rho/2 max(0, g + mu/rho)^2 - mu^2 / (2 rho))`` with
    ``g = s_i (kappa + constraint_margin)``; ``scales`` defaults to ones.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    p = spec.packed
    mu = np.ascontiguousarray(multipliers, dtype=float).reshape(
        spec.horizon + 1, spec.n_obstacles)
    if np.any(mu < 0):
        raise ValueError("multipliers must be nonnegative")
    return kernels.al_value_grad(
        p["family"], spec.dt, _vec(x0, 3), _vec(z, spec.n_decision),
        spec.horizon, p["qw"], p["qe"], p["rw"], p["re"], p["ab"], p["obs"],
        float(spec.constraint_margin), mu, float(rho),
        np.ones(spec.n_obstacles) if scales is None
        else np.ascontiguousarray(scales, dtype=float))


def _fd_gradient(fun, z, h=1e-6):
    g = np.empty_like(z)
    for i in range(z.shape[0]):
        zp = z.copy()
        zm = z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (fun(zp) - fun(zm)) / (2.0 * h)
    return g


def _projected_gradient(z, g, lo, hi):
    return float(np.max(np.abs(np.clip(z - g, lo, hi) - z), initial=0.0))


def _two_loop(g, mem_y):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(mem_y):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if mem_y:
        s, y, _ = mem_y[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(mem_y, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


class _Deadline:
    def __init__(self, budget):
        self.end = None if budget is None else time.perf_counter() + budget
        self.expired = False

    def check(self):
        if self.end is not None and time.perf_counter() > self.end:
            self.expired = True
        return self.expired


# scaled overlap values saturate at an endpoint plateau deep inside an
# obstacle, where they carry no gradient; trial points may not push the
# violation above this cap (or above the current one, if larger)
_VIOLATION_CAP = 1e-2


def _inner(fun, z, lo, hi, st: SolverSettings, deadline, trace_cb, sviol_of):
    f, g, gv = fun(z)
    cap = max(sviol_of(gv), _VIOLATION_CAP)
    mem = deque(maxlen=st.memory)
    width = float(np.max(hi - lo))
    iters = 0
    stall = 0
    for it in range(st.max_inner):
        pg = _projected_gradient(z, g, lo, hi)
        if pg <= st.gradient_tol or deadline.check():
            break
        iters += 1
        free = ~(((z <= lo) & (g > 0)) | ((z >= hi) & (g < 0)))
        gf = np.where(free, g, 0.0)
        d = -_two_loop(gf, mem) if mem else -gf
        d = np.where(free, d, 0.0)
        if not mem or gf @ d >= 0:
            mem.clear()
            d = -gf * (0.25 * width / max(float(np.max(np.abs(gf))), 1e-300))
        alpha = 1.0
        accepted = False
        for _ in range(st.max_backtracks):
            zn = np.clip(z + alpha * d, lo, hi)
            fn, gn, gvn = fun(zn)
            if (math.isfinite(fn) and fn <= f + st.armijo * (g @ (zn - z))
                    and sviol_of(gvn) <= cap):
                accepted = True
                break
            alpha *= st.shrink
            if deadline.check():
                break
        if not accepted:
            if mem:
                mem.clear()
                continue
            break
        s = zn - z
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * math.sqrt(float(s @ s) * float(y @ y)) and sy > 0:
            mem.append((s, y, 1.0 / sy))
        decrease = f - fn
        z, f, g, gv = zn, fn, gn, gvn
        cap = max(sviol_of(gv), _VIOLATION_CAP)
        if trace_cb is not None:
            trace_cb(it, z, gv, float(np.linalg.norm(s)))
        if decrease <= 1e-15 * (1.0 + abs(f)):
            stall += 1
            if stall >= 2:
                break
        else:
            stall = 0
    return z, f, g, gv, iters


def solve(spec: OcpSpec, x0, warm=None) -> SolveReport:
    """Solve the OCP from the measured state ``x0``.

    ``warm`` is projected onto the box; a wrong length falls back to zeros.
    """
    t_start = time.perf_counter()
    st = spec.settings
    x0 = _vec(x0, 3)
    lo, hi = spec.bounds()
    n = spec.n_decision
    if warm is None or np.asarray(warm).shape != (n,):
        z = np.zeros(n)
    else:
        z = np.asarray(warm, dtype=float).copy()
    z = np.clip(z, lo, hi)
    nobs = spec.n_obstacles
    eps = float(spec.constraint_margin)
    mu = np.zeros((spec.horizon + 1, nobs))
    rho = st.penalty_init
    scales = constraint_scales(spec) if nobs else np.ones(0)
    deadline = _Deadline(st.budget_for(spec.dt))
    trace = []
    outer_idx = [0]

    def check_finite(val, grad, z_eval):
        if not (math.isfinite(val) and np.all(np.isfinite(grad))):
            raise NumericalError("non-finite cost or constraint value",
                                 {"x0": x0.tolist(), "z": z_eval.tolist(),
                                  "rho": rho, "value": val})

    def fun(z_eval):
        v, grad, gv = augmented_lagrangian_value(spec, x0, z_eval, mu, rho,
                                                  scales)
        if st.finite_difference:
            grad = _fd_gradient(
                lambda zz: augmented_lagrangian_value(spec, x0, zz, mu, rho,
                                                     scales)[0],
                z_eval)
        check_finite(v, grad, z_eval)
        return v, grad, gv

    def viol_of(gv, scaled=False):
        if nobs == 0:
            return 0.0
        g = gv[1:] + eps
        if scaled:
            g = g * scales
        return max(0.0, float(np.max(g)))

    trace_cb = None
    if st.trace:
        def trace_cb(it, z_it, gv, step_len):
            trace.append((outer_idx[0], it, total_cost(spec, x0, z_it)[0],
                          viol_of(gv), step_len))

    history = []
    inner_total = 0
    best = None
    prev_viol = math.inf
    outer_done = 0
    for j in range(st.max_outer if nobs else 1):
        outer_idx[0] = j
        z, f, g, gv, iters = _inner(fun, z, lo, hi, st, deadline, trace_cb,
                                    lambda v: viol_of(v, scaled=True))
        inner_total += iters
        outer_done = j + 1
        viol = viol_of(gv)
        sviol = viol_of(gv, scaled=True)
        pg = _projected_gradient(z, g, lo, hi)
        cost = total_cost(spec, x0, z)[0]
        key = (max(viol, st.constraint_tol), cost)
        if best is None or key < best[0]:
            best = (key, z.copy(), viol, pg, cost, gv.copy(), mu.copy())
        if (viol <= st.constraint_tol and pg <= st.gradient_tol) or deadline.expired:
            history.append({"violation": viol, "scaled_violation": sviol,
                            "rho": rho, "increased": False})
            break
        if nobs:
            mu[1:] = np.maximum(0.0, mu[1:] + rho * scales * (gv[1:] + eps))
        increased = sviol > 0.5 * prev_viol and rho < st.penalty_max
        if increased:
            rho = min(rho * st.penalty_growth, st.penalty_max)
        history.append({"violation": viol, "scaled_violation": sviol,
                        "rho": rho, "increased": increased})
        prev_viol = sviol

    _, z_best, viol, pg, cost, gv, mu_best = best
    start_infeasible = bool(nobs and np.any(gv[0] + eps > st.constraint_tol))
    if deadline.expired:
        status = "max-iterations"
    elif start_infeasible:
        # recovered: the plan strictly reduces the worst overlap by step H
        improved = float(np.max(gv[-1])) < float(np.max(gv[0]))
        if improved:
            status = "infeasible-start-recovered"
        elif viol <= st.acceptable_violation:
            status = "acceptable"
        else:
            status = "max-iterations"
    elif viol <= st.constraint_tol and pg <= st.gradient_tol:
        status = "optimal"
    elif viol <= st.acceptable_violation:
        status = "acceptable"
    else:
        status = "max-iterations"
    return SolveReport(
        z_opt=z_best, status=status, max_violation=viol,
        outer_iterations=outer_done, inner_iterations=inner_total,
        wall_time=time.perf_counter() - t_start, cost=cost,
        projected_gradient=pg, start_infeasible=start_infeasible,
        budget_expired=deadline.expired, constraint_values=gv,
        multipliers=mu_best, history=history, trace=trace)
