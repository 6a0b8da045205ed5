"""Planar robot kinematics with exact zero-order-hold discretisation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from ._backend import kernels
from .geometry import Ellipsoid, PlanarPose, from_semi_axes

V_MAX = 0.2
OMEGA_MAX = math.pi / 4


class Family(str, Enum):
    OMNI = "omnidirectional"
    DIFF_DRIVE = "differential-drive"

    @property
    def code(self) -> int:
        return 0 if self is Family.OMNI else 1

    @property
    def n_inputs(self) -> int:
        return 3 if self is Family.OMNI else 2


def _default_bounds(family: Family):
    if family is Family.OMNI:
        upper = np.array([V_MAX, V_MAX, OMEGA_MAX])
    else:
        upper = np.array([V_MAX, OMEGA_MAX])
    return -upper, upper


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Kinematics family, footprint and box input set.

    Omnidirectional inputs are ``(v_x1, v_x2, omega)``; differential-drive
    inputs are ``(v, omega)``.
    """

    family: Family
    semi_axes: tuple[float, float]
    input_lower: np.ndarray = field(default=None)
    input_upper: np.ndarray = field(default=None)
    sampling_time: float = 0.2

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        lo_def, hi_def = _default_bounds(fam)
        lo = lo_def if self.input_lower is None else np.array(self.input_lower, float)
        hi = hi_def if self.input_upper is None else np.array(self.input_upper, float)
        if lo.shape != (fam.n_inputs,) or hi.shape != (fam.n_inputs,):
            raise ValueError(f"{fam.value} needs {fam.n_inputs} input bounds")
        if not np.all(lo < hi):
            raise ValueError("input bounds need lower < upper componentwise")
        a, b = (float(s) for s in self.semi_axes)
        if not (a > 0 and b > 0):
            raise ValueError("semi-axes must be positive")
        if not self.sampling_time > 0:
            raise ValueError("sampling time must be positive")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "semi_axes", (a, b))
        object.__setattr__(self, "input_lower", lo)
        object.__setattr__(self, "input_upper", hi)
        object.__setattr__(self, "sampling_time", float(self.sampling_time))

    @property
    def n_inputs(self) -> int:
        return self.family.n_inputs

    @property
    def dt(self) -> float:
        return self.sampling_time


def _as_array(x) -> np.ndarray:
    if isinstance(x, PlanarPose):
        return x.as_array()
    return np.asarray(x, dtype=float)


def step(model: RobotModel, x, u, validate: bool = False) -> np.ndarray:
    """Exact successor state after holding ``u`` for one sampling period."""
    u = np.asarray(u, dtype=float)
    if validate and (np.any(u < model.input_lower) or np.any(u > model.input_upper)):
        raise ValueError(f"input {u} outside bounds")
    return kernels.step(model.family.code, model.dt, _as_array(x), u)


def step_jacobians(model: RobotModel, x, u):
    """Successor state and its Jacobians w.r.t. state and input."""
    return kernels.step_jacobians(model.family.code, model.dt, _as_array(x),
                                  np.asarray(u, dtype=float))


def continuous_rhs(model: RobotModel, x, u) -> np.ndarray:
    """``G(x) u`` for the continuous-time kinematics."""
    x = _as_array(x)
    u = np.asarray(u, dtype=float)
    if model.family is Family.OMNI:
        return u.copy()
    return np.array([math.cos(x[2]) * u[0], math.sin(x[2]) * u[0], u[1]])


def robot_ellipsoid(model: RobotModel, x, margin: float = 0.0) -> Ellipsoid:
    x = _as_array(x)
    a, b = model.semi_axes
    return from_semi_axes(a + margin, b + margin, float(x[2]), x[:2])


def clamp_input(model: RobotModel, u) -> np.ndarray:
    return np.clip(np.asarray(u, dtype=float), model.input_lower, model.input_upper)
