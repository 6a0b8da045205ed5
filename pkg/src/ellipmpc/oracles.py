"""Independent reference computations used by the property suites and tests.

None of these share code with the closed-form overlap path; they are slow
and simple on purpose.
"""

from __future__ import annotations

import numpy as np

from .geometry import Ellipsoid, from_semi_axes


def _bbox(e: Ellipsoid):
    half = np.sqrt(np.diag(np.linalg.inv(e.matrix)))
    return e.center - half, e.center + half


def _column_interval(e: Ellipsoid, xs):
    """Vertical chord ``[lo, hi]`` of a planar ellipse at abscissae ``xs``."""
    (m00, m01), (_, m11) = e.matrix
    dx = xs - e.center[0]
    disc = (m01 * dx) ** 2 - m11 * (m00 * dx * dx - 1.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = e.center[1] + (-m01 * dx - root) / m11
    hi = e.center[1] + (-m01 * dx + root) / m11
    return lo, hi, disc >= 0.0


def raster_grid(e1: Ellipsoid, e2: Ellipsoid, resolution: int = 2000):
    """Grid over the intersection of the two bounding boxes, or ``None``."""
    lo1, hi1 = _bbox(e1)
    lo2, hi2 = _bbox(e2)
    lo, hi = np.maximum(lo1, lo2), np.minimum(hi1, hi2)
    if np.any(lo > hi):
        return None
    return (np.linspace(lo[0], hi[0], resolution),
            np.linspace(lo[1], hi[1], resolution))


def raster_overlap(e1: Ellipsoid, e2: Ellipsoid, resolution: int = 2000) -> bool:
    """Whether some node of a ``resolution`` x ``resolution`` grid lies in both.

    Each grid column is reduced to the overlap of the two vertical chords,
    which is exactly equivalent to testing every node of that column.
    """
    grid = raster_grid(e1, e2, resolution)
    if grid is None:
        return False
    xs, ys = grid
    a_lo, a_hi, a_ok = _column_interval(e1, xs)
    b_lo, b_hi, b_ok = _column_interval(e2, xs)
    lo = np.maximum(a_lo, b_lo)
    hi = np.minimum(a_hi, b_hi)
    if ys[-1] == ys[0]:
        hit = (lo <= ys[0]) & (ys[0] <= hi)
    else:
        h = (ys[-1] - ys[0]) / (resolution - 1)
        first = np.ceil((lo - ys[0]) / h - 1e-12)
        last = np.floor((hi - ys[0]) / h + 1e-12)
        hit = (first <= last) & (last >= 0) & (first <= resolution - 1)
    return bool(np.any(hit & a_ok & b_ok & (lo <= hi)))


def raster_overlap_bruteforce(e1: Ellipsoid, e2: Ellipsoid,
                              resolution: int = 2000) -> bool:
    """Node-by-node version of ``raster_overlap``, for cross-checking it."""
    grid = raster_grid(e1, e2, resolution)
    if grid is None:
        return False
    xs, ys = grid
    for start in range(0, resolution, 250):
        gx, gy = np.meshgrid(xs[start:start + 250], ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        inside = np.ones(len(pts), dtype=bool)
        for e in (e1, e2):
            d = pts - e.center
            inside &= np.einsum("ij,jk,ik->i", d, e.matrix, d) <= 1.0
        if inside.any():
            return True
    return False


def kq_literal(e1: Ellipsoid, e2: Ellipsoid, lam: float) -> float:
    """``K(lam) det(E_lam)`` straight from the defining formulas, any dimension."""
    a, b = e1.matrix, e2.matrix
    v, w = e1.center, e2.center
    e = lam * a + (1.0 - lam) * b
    rhs = lam * a @ v + (1.0 - lam) * b @ w
    m = np.linalg.solve(e, rhs)
    k = 1.0 - lam * v @ a @ v - (1.0 - lam) * w @ b @ w + m @ e @ m
    return float(k * np.linalg.det(e))


def kappa_grid(e1: Ellipsoid, e2: Ellipsoid, points: int = 20001):
    """Grid minimum of ``K(lam) det(E_lam)`` on ``[0, 1]``; returns (lam, value)."""
    lams = np.linspace(0.0, 1.0, points)
    vals = np.array([kq_literal(e1, e2, float(l)) for l in lams])
    i = int(np.argmin(vals))
    return float(lams[i]), float(vals[i])


def cubic_grid_argmin(coeffs, points: int = 1_000_001) -> float:
    """Argmin over a uniform grid on [0, 1] of the cubic with ``(h0, h1, h2, h3)``."""
    h0, h1, h2, h3 = coeffs
    lams = np.linspace(0.0, 1.0, points)
    vals = ((h3 * lams + h2) * lams + h1) * lams + h0
    return float(lams[int(np.argmin(vals))])


def diff_drive_integrate(x, u, dt: float, rtol: float = 1e-12) -> np.ndarray:
    """Adaptive integration of the unicycle under constant ``(v, omega)``."""
    from scipy.integrate import solve_ivp

    v, om = float(u[0]), float(u[1])

    def rhs(_t, s):
        return [v * np.cos(s[2]), v * np.sin(s[2]), om]

    sol = solve_ivp(rhs, (0.0, dt), np.asarray(x, dtype=float),
                    method="DOP853", rtol=rtol, atol=1e-14)
    return sol.y[:, -1]


def random_ellipse(rng: np.random.Generator, spread: float = 2.0,
                   axis_range=(0.05, 1.0)) -> Ellipsoid:
    """Random planar ellipse with bounded aspect ratio."""
    a, b = rng.uniform(*axis_range, size=2)
    theta = rng.uniform(0.0, 2.0 * np.pi)
    center = rng.uniform(-spread, spread, size=2)
    return from_semi_axes(a, b, theta, center)


def random_pair(rng: np.random.Generator, spread: float = 2.0):
    return random_ellipse(rng, spread), random_ellipse(rng, spread)
