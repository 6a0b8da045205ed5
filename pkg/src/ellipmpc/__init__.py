"""Ellipse-overlap collision constraints for nonlinear MPC of planar robots."""

from ._backend import BACKEND
from .errors import NumericalError, UnsupportedDimensionError
from .geometry import (Ellipsoid, PlanarPose, contains, from_semi_axes, inflate,
                       membership, rigid_transform)
from .kinematics import Family, RobotModel, clamp_input, robot_ellipsoid, step
from .ocp import CostSpec, OcpSpec, constraint_values, rollout, total_cost
from .overlap import OverlapResult, cubic_coefficients, kappa_star, kappa_star_nd
from .settings import SolverSettings
from .simulation import ClosedLoopLog, Scenario, perturbed_run, run, run_batch
from .solver import SolveReport, solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ClosedLoopLog", "CostSpec", "Ellipsoid", "Family",
    "NumericalError", "OcpSpec", "OverlapResult", "PlanarPose", "RobotModel",
    "Scenario", "SolveReport", "SolverSettings", "UnsupportedDimensionError",
    "clamp_input", "constraint_values", "contains", "cubic_coefficients",
    "from_semi_axes", "inflate", "kappa_star", "kappa_star_nd", "membership",
    "perturbed_run", "rigid_transform", "robot_ellipsoid", "rollout", "run",
    "run_batch", "solve", "step", "total_cost",
]
