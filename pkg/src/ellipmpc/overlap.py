"""Overlap metric for pairs of ellipsoids.

For ``E1 = (A, v)`` and ``E2 = (B, w)`` the interpolating family
``E_lam = lam A + (1 - lam) B`` with centre ``m_lam`` and size ``K(lam)``
always contains ``E1 & E2``. A negative ``K`` anywhere on (0, 1) certifies
that the pair is disjoint. In the plane ``K(lam) * det(E_lam)`` is a cubic in
``lam`` whose minimizer on [0, 1] has a closed form; its minimum value
``kappa`` is the constraint value used by the controller:

* ``kappa < 0``: disjoint
* ``kappa == 0``: touching
* ``kappa > 0``: overlapping
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import math

import numpy as np

from ._backend import kernels
from ._csv import fmt
from .errors import NumericalError, UnsupportedDimensionError
from .geometry import Ellipsoid

BRANCHES = ("interior-cubic", "quadratic", "clamped-boundary",
            "degenerate-constant")
NUMERICAL = "numerical"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LambdaFamilyPoint:
    e_lambda_matrix: np.ndarray
    m_lambda: np.ndarray
    k_value: float

    def membership(self, x) -> float:
        """``(x - m)^T E (x - m) - K``; nonpositive inside the family set."""
        d = np.asarray(x, dtype=float) - self.m_lambda
        return float(d @ self.e_lambda_matrix @ d) - self.k_value


@dataclass(frozen=True)
class CubicCoefficients:
    """``h3 lam^3 + h2 lam^2 + h1 lam + h0``."""

    h0: float
    h1: float
    h2: float
    h3: float

    def __call__(self, lam):
        return ((self.h3 * lam + self.h2) * lam + self.h1) * lam + self.h0

    def derivative(self, lam):
        return (3.0 * self.h3 * lam + 2.0 * self.h2) * lam + self.h1

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.h0, self.h1, self.h2, self.h3)


@dataclass(frozen=True)
class OverlapResult:
    lambda_star: float
    kappa_star: float
    branch: str
    gradient: np.ndarray | None = None

    @property
    def disjoint(self) -> bool:
        return self.kappa_star < 0.0


def _check_pair(e1: Ellipsoid, e2: Ellipsoid):
    if e1.dim != e2.dim:
        raise ValueError(f"dimension mismatch: {e1.dim} vs {e2.dim}")


def _check_planar(e1: Ellipsoid, e2: Ellipsoid):
    _check_pair(e1, e2)
    if e1.dim != 2:
        raise UnsupportedDimensionError(
            f"closed-form overlap needs planar ellipses, got dimension {e1.dim}")


def _k_times_det(a, b, d, lam):
    """``K(lam)`` and ``det(E_lam)`` for centre offset ``d = v - w``.

    Uses ``K = 1 - lam (1 - lam) d^T A E^-1 B d``, which equals the defining
    expression and is exactly 1 at both endpoints.
    """
    e = lam * a + (1.0 - lam) * b
    try:
        y = np.linalg.solve(e, b @ d)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular family matrix",
                             {"lambda": lam, "matrix": e.tolist()}) from exc
    k = 1.0 - lam * (1.0 - lam) * float((a @ d) @ y)
    return k, float(np.linalg.det(e))


def lambda_family(e1: Ellipsoid, e2: Ellipsoid, lam: float) -> LambdaFamilyPoint:
    _check_pair(e1, e2)
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    a, b = e1.matrix, e2.matrix
    d = e1.center - e2.center
    e = lam * a + (1.0 - lam) * b
    # centre in coordinates shifted so that w = 0
    m = np.linalg.solve(e, lam * (a @ d))
    k, _ = _k_times_det(a, b, d, lam)
    return LambdaFamilyPoint(e, m + e2.center, k)


def k_value_literal(e1: Ellipsoid, e2: Ellipsoid, lam: float) -> float:
    """``K(lam)`` from its defining expression in absolute coordinates."""
    a, b, v, w = e1.matrix, e2.matrix, e1.center, e2.center
    e = lam * a + (1.0 - lam) * b
    m = np.linalg.solve(e, lam * (a @ v) + (1.0 - lam) * (b @ w))
    return float(1.0 - lam * (v @ a @ v) - (1.0 - lam) * (w @ b @ w) + m @ e @ m)


def cubic_coefficients(e1: Ellipsoid, e2: Ellipsoid) -> CubicCoefficients:
    _check_planar(e1, e2)
    return CubicCoefficients(*kernels.cubic2(*e1.as_row(), *e2.as_row()))


def lambda_star(c: CubicCoefficients) -> tuple[float, str]:
    lam, code = kernels.minimize_cubic(*c.as_tuple())
    return lam, BRANCHES[code]


def _rotation_generator_derivative(m):
    # d/dtheta of R M R^T at theta = 0 is S M - M S with S the 90 deg generator
    s = np.array([[0.0, -1.0], [1.0, 0.0]])
    return s @ m - m @ s


def kappa_star(e1: Ellipsoid, e2: Ellipsoid, want_gradient: bool = False,
               robot_role: int = 1) -> OverlapResult:
    """Closed-form metric for a planar pair.

    With ``want_gradient`` the result carries d kappa / d(x1, x2, theta) of the
    ellipse selected by ``robot_role`` (1 or 2), where theta rotates that
    ellipse about its own centre.
    """
    _check_planar(e1, e2)
    if not want_gradient:
        lam, kap, code = kernels.kappa2(*e1.as_row(), *e2.as_row())
        return OverlapResult(lam, kap, BRANCHES[code])
    if robot_role not in (1, 2):
        raise ValueError("robot_role must be 1 or 2")
    first, second = (e1, e2) if robot_role == 1 else (e2, e1)
    r = kernels.kappa2_partials(*first.as_row(), *second.as_row())
    lam, kap, code, dv0, dv1, da00, da01, da11 = r
    dm = _rotation_generator_derivative(first.matrix)
    dth = da00 * dm[0, 0] + da01 * dm[0, 1] + da11 * dm[1, 1]
    if robot_role == 2:
        lam = 1.0 - lam
    return OverlapResult(lam, kap, BRANCHES[code], np.array([dv0, dv1, dth]))


def kappa_star_nd(e1: Ellipsoid, e2: Ellipsoid,
                  tol: float = 1e-10) -> OverlapResult:
    """Numerical metric for any dimension.

    Samples ``K * det(E)`` on 64 points then refines around the best sample by
    golden-section search down to a lambda bracket of ``tol``.
    """
    _check_pair(e1, e2)
    if not tol > 0:
        raise ValueError("tol must be positive")
    a, b = e1.matrix, e2.matrix
    d = e1.center - e2.center

    def f(lam):
        k, q = _k_times_det(a, b, d, lam)
        return k * q

    grid = np.linspace(0.0, 1.0, 64)
    vals = [f(lam) for lam in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    cands = [(f1, x1), (f2, x2), (vals[i], float(grid[i]))]
    best_val, best_lam = min(cands)
    if not math.isfinite(best_val):
        raise NumericalError("non-finite overlap value", {"lambda": best_lam})
    return OverlapResult(best_lam, best_val, NUMERICAL)


def containment_check(e1: Ellipsoid, e2: Ellipsoid, lam: float,
                      samples: int, seed: int = 0) -> tuple[int, int]:
    """Monte-Carlo check of ``E1 & E2 <= E_lam <= E1 | E2``.

    Returns the violation counts of both inclusions. Points are drawn
    uniformly from the joint bounding box.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    fam = lambda_family(e1, e2, lam)
    if not fam.k_value > 0:
        raise ValueError(f"family set is empty at lambda={lam} (K={fam.k_value})")
    lows, highs = [], []
    for e in (e1, e2):
        half = np.sqrt(np.diag(np.linalg.inv(e.matrix)))
        lows.append(e.center - half)
        highs.append(e.center + half)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(np.min(lows, axis=0), np.max(highs, axis=0),
                      size=(samples, e1.dim))
    tol = 1e-9

    def member(mat, c, k=1.0):
        diff = pts - c
        return np.einsum("ij,jk,ik->i", diff, mat, diff) - k

    in1 = member(e1.matrix, e1.center)
    in2 = member(e2.matrix, e2.center)
    inl = member(fam.e_lambda_matrix, fam.m_lambda, fam.k_value)
    inter = (in1 <= -tol) & (in2 <= -tol)
    v_inter = int(np.count_nonzero(inter & (inl > tol)))
    union = (in1 <= tol) | (in2 <= tol)
    v_union = int(np.count_nonzero((inl <= -tol) & ~union))
    return v_inter, v_union


def kq_curve(e1: Ellipsoid, e2: Ellipsoid, samples: int):
    """``(lam, K, K*q)`` arrays on a uniform grid over [0, 1]."""
    _check_pair(e1, e2)
    if samples < 2:
        raise ValueError("need at least two samples")
    lam = np.linspace(0.0, 1.0, samples)
    a, b = e1.matrix, e2.matrix
    d = e1.center - e2.center
    k = np.empty(samples)
    kq = np.empty(samples)
    for i, x in enumerate(lam):
        k[i], q = _k_times_det(a, b, d, float(x))
        kq[i] = k[i] * q
    return lam, k, kq


def write_curve_csv(path, e1: Ellipsoid, e2: Ellipsoid, samples: int):
    lam, k, kq = kq_curve(e1, e2, samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "K", "Kq"])
        for row in zip(lam, k, kq):
            w.writerow([fmt(x) for x in row])
