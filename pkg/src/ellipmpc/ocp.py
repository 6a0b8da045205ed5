"""Condensed single-shooting optimal control problem.

Inputs over the horizon are the only decision variables; states follow from
recursive substitution of the exact step map. Stage costs cover steps
``0 .. H-1`` and a state-only terminal term is added at step ``H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._backend import kernels
from .geometry import Ellipsoid
from .kinematics import Family, RobotModel
from .settings import SolverSettings


@dataclass(frozen=True)
class CostSpec:
    """``sum_i qw_i x_i^qe_i + sum_j rw_j u_j^re_j`` with even exponents."""

    state_weights: tuple[float, ...]
    input_weights: tuple[float, ...]
    state_exponents: tuple[int, ...] = (2, 2, 2)
    input_exponents: tuple[int, ...] = (2, 2, 2)

    def __post_init__(self):
        for name in ("state_weights", "input_weights"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not all(v > 0 for v in vals):
                raise ValueError(f"{name} must be strictly positive")
            object.__setattr__(self, name, vals)
        for name in ("state_exponents", "input_exponents"):
            vals = tuple(int(v) for v in getattr(self, name))
            if not all(v >= 2 and v % 2 == 0 for v in vals):
                raise ValueError(f"{name} must be even and >= 2")
            object.__setattr__(self, name, vals)
        if len(self.state_weights) != 3 or len(self.state_exponents) != 3:
            raise ValueError("state cost needs three weights and exponents")
        if len(self.input_weights) != len(self.input_exponents):
            raise ValueError("input weights and exponents differ in length")

    @classmethod
    def quadratic(cls, q=(1.0, 1.0, 0.1), r=(0.1, 0.1, 0.01)) -> CostSpec:
        return cls(tuple(q), tuple(r), (2, 2, 2), (2,) * len(r))

    @classmethod
    def mixed_exponent(cls, q=(1.0, 1.0, 0.01), r=(0.01, 0.01)) -> CostSpec:
        """``q1 x1^4 + q2 x2^2 + q3 theta^4 + r1 v^4 + r2 omega^4``."""
        return cls(tuple(q), tuple(r), (4, 2, 4), (4, 4))

    def stage(self, x, u=None) -> float:
        x = np.asarray(x, dtype=float)
        val = float(np.sum(np.asarray(self.state_weights)
                           * x ** np.asarray(self.state_exponents)))
        if u is not None:
            u = np.asarray(u, dtype=float)
            val += float(np.sum(np.asarray(self.input_weights)
                                * u ** np.asarray(self.input_exponents)))
        return val


def default_cost(family: Family) -> CostSpec:
    if Family(family) is Family.OMNI:
        return CostSpec.quadratic()
    return CostSpec.mixed_exponent()


@dataclass(frozen=True, eq=False)
class OcpSpec:
    model: RobotModel
    horizon: int = 10
    cost: CostSpec | None = None
    obstacles: tuple[Ellipsoid, ...] = ()
    inflation_margin: float = 0.0
    constraint_margin: float = 0.0
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.inflation_margin < 0 or self.constraint_margin < 0:
            raise ValueError("margins must be nonnegative")
        if self.cost is None:
            object.__setattr__(self, "cost", default_cost(self.model.family))
        if len(self.cost.input_weights) != self.model.n_inputs:
            raise ValueError("cost input dimension does not match the model")
        obs = tuple(self.obstacles)
        for o in obs:
            if o.dim != 2:
                raise ValueError("obstacles must be planar ellipses")
        object.__setattr__(self, "obstacles", obs)

    @property
    def dt(self) -> float:
        return self.model.dt

    @property
    def n_inputs(self) -> int:
        return self.model.n_inputs

    @property
    def n_decision(self) -> int:
        return self.horizon * self.model.n_inputs

    @property
    def n_obstacles(self) -> int:
        return len(self.obstacles)

    @cached_property
    def packed(self) -> dict:
        """Contiguous arrays handed to the kernels."""
        c = self.cost
        a, b = self.model.semi_axes
        m = self.inflation_margin
        obs = np.array([o.as_row() for o in self.obstacles],
                       dtype=float).reshape(-1, 5)
        return {
            "family": self.model.family.code,
            "qw": np.array(c.state_weights, dtype=float),
            "qe": np.array(c.state_exponents, dtype=np.int64),
            "rw": np.array(c.input_weights, dtype=float),
            "re": np.array(c.input_exponents, dtype=np.int64),
            "ab": (a + m, b + m),
            "ab_raw": (a, b),
            "obs": np.ascontiguousarray(obs),
        }

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.tile(self.model.input_lower, self.horizon),
                np.tile(self.model.input_upper, self.horizon))

    def with_obstacles(self, obstacles) -> OcpSpec:
        return OcpSpec(self.model, self.horizon, self.cost, tuple(obstacles),
                       self.inflation_margin, self.constraint_margin,
                       self.settings)


def _vec(x, n=None) -> np.ndarray:
    if hasattr(x, "as_array"):
        x = x.as_array()
    x = np.ascontiguousarray(x, dtype=float).reshape(-1)
    if n is not None and x.shape[0] != n:
        raise ValueError(f"expected length {n}, got {x.shape[0]}")
    return x


def rollout(spec: OcpSpec, x0, z) -> np.ndarray:
    """Predicted states ``x(0) .. x(H)`` as an ``(H + 1, 3)`` array."""
    p = spec.packed
    return kernels.rollout(p["family"], spec.dt, _vec(x0, 3),
                           _vec(z, spec.n_decision), spec.horizon)


def total_cost(spec: OcpSpec, x0, z) -> tuple[float, np.ndarray]:
    """Cost and its gradient w.r.t. ``z`` (reverse sweep)."""
    p = spec.packed
    return kernels.cost_grad(p["family"], spec.dt, _vec(x0, 3),
                             _vec(z, spec.n_decision), spec.horizon,
                             p["qw"], p["qe"], p["rw"], p["re"])


def constraint_values(spec: OcpSpec, x0, z, jacobian: bool = True,
                      raw_footprint: bool = False):
    """Overlap values ``(H + 1, n_obs)`` and Jacobian ``((H + 1) n_obs, H n_u)``.

    A constraint is satisfied when its value is at most ``-constraint_margin``.
    The first row depends on ``x0`` only, so its Jacobian rows are zero.
    """
    p = spec.packed
    ab = p["ab_raw"] if raw_footprint else p["ab"]
    return kernels.constraints(p["family"], spec.dt, _vec(x0, 3),
                               _vec(z, spec.n_decision), spec.horizon, ab,
                               p["obs"], jacobian)


def shift_warm_start(z, model: RobotModel) -> np.ndarray:
    """Drop the first input block and repeat the last one."""
    z = np.asarray(z, dtype=float)
    nu = model.n_inputs
    if z.shape[0] % nu:
        raise ValueError("warm start length is not a multiple of the input size")
    if z.shape[0] == 0:
        return z.copy()
    return np.concatenate([z[nu:], z[-nu:]])
