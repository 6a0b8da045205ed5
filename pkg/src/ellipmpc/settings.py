from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SolverSettings:
    """Augmented Lagrangian / projected L-BFGS settings.

    ``time_budget`` of ``None`` means 0.9 of the sampling time; ``0`` or a
    negative value disables the wall-clock guard.
    """

    max_outer: int = 8
    max_inner: int = 60
    penalty_init: float = 10.0
    penalty_growth: float = 5.0
    penalty_max: float = 1e8
    constraint_tol: float = 1e-4
    gradient_tol: float = 1e-6
    acceptable_violation: float = 1e-3
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 30
    memory: int = 10
    time_budget: float | None = None
    finite_difference: bool = False
    trace: bool = False

    def __post_init__(self):
        positive = ("max_outer", "max_inner", "penalty_init", "penalty_max",
                    "constraint_tol", "gradient_tol", "acceptable_violation",
                    "armijo", "shrink", "max_backtracks", "memory")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must exceed 1")
        if not self.shrink < 1:
            raise ValueError("shrink must be below 1")

    def budget_for(self, dt: float) -> float | None:
        if self.time_budget is None:
            return 0.9 * dt
        if self.time_budget <= 0:
            return None
        return self.time_budget
