"""Ellipsoids ``{x : (x - p)^T M (x - p) <= 1}`` and planar poses."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

_SYM_TOL = 1e-12


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Symmetric positive definite shape matrix plus centre.

    Validated once on construction; arrays are stored read-only.
    """

    matrix: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        p = np.array(self.center, dtype=float).reshape(-1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"shape matrix must be square, got {m.shape}")
        if m.shape[0] != p.shape[0]:
            raise ValueError(
                f"center has dimension {p.shape[0]}, matrix {m.shape[0]}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(p))):
            raise ValueError("ellipsoid entries must be finite")
        scale = np.max(np.abs(m))
        if np.max(np.abs(m - m.T)) > _SYM_TOL * max(scale, 1e-300):
            raise ValueError("shape matrix is not symmetric")
        m = 0.5 * (m + m.T)
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValueError("shape matrix is not positive definite") from None
        m.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "center", p)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def semi_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Semi-axis lengths (ascending) and the matching unit axes as columns."""
        w, vecs = np.linalg.eigh(self.matrix)
        lengths = 1.0 / np.sqrt(w)
        order = np.argsort(lengths)
        return lengths[order], vecs[:, order]

    def as_row(self) -> tuple[float, float, float, float, float]:
        """Planar packing ``(m00, m01, m11, c0, c1)`` used by the kernels."""
        if self.dim != 2:
            raise ValueError("packing is defined for planar ellipses only")
        m, p = self.matrix, self.center
        return (float(m[0, 0]), float(m[0, 1]), float(m[1, 1]),
                float(p[0]), float(p[1]))

    def __eq__(self, other):
        if not isinstance(other, Ellipsoid):
            return NotImplemented
        return (np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.center, other.center))

    def __hash__(self):
        return hash((self.matrix.tobytes(), self.center.tobytes()))

    def __repr__(self):
        return (f"Ellipsoid(matrix={self.matrix.tolist()}, "
                f"center={self.center.tolist()})")


@dataclass(frozen=True)
class PlanarPose:
    """Position ``(x1, x2)`` in metres and unwrapped heading ``theta``."""

    x1: float
    x2: float
    theta: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x1, self.x2, self.theta)):
            raise ValueError("pose components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.theta], dtype=float)

    @classmethod
    def from_array(cls, x) -> PlanarPose:
        return cls(float(x[0]), float(x[1]), float(x[2]))


def from_semi_axes(a: float, b: float, theta: float = 0.0,
                   center=(0.0, 0.0)) -> Ellipsoid:
    """Planar ellipse with semi-axis ``a`` along heading ``theta`` and ``b`` across."""
    if not (a > 0 and b > 0):
        raise ValueError(f"semi-axes must be positive, got {a}, {b}")
    r = _rot(theta)
    m = r @ np.diag([1.0 / a**2, 1.0 / b**2]) @ r.T
    m = 0.5 * (m + m.T)
    return Ellipsoid(m, np.asarray(center, dtype=float))


def membership(e: Ellipsoid, x) -> float:
    """``(x - p)^T M (x - p)``; at most 1 inside the ellipsoid."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != e.dim:
        raise ValueError(f"point has dimension {x.shape[0]}, ellipsoid {e.dim}")
    d = x - e.center
    return float(d @ e.matrix @ d)


def contains(e: Ellipsoid, x) -> bool:
    return membership(e, x) <= 1.0


def rigid_transform(e: Ellipsoid, rotation, translation) -> Ellipsoid:
    """Apply ``x -> R x + t``.

    ``rotation`` is an angle for planar ellipses or an orthogonal matrix.
    """
    r = np.asarray(rotation, dtype=float)
    if r.ndim == 0:
        if e.dim != 2:
            raise ValueError("scalar rotation requires a planar ellipse")
        r = _rot(float(r))
    m = r @ e.matrix @ r.T
    m = 0.5 * (m + m.T)
    return Ellipsoid(m, r @ e.center + np.asarray(translation, dtype=float))


def inflate(e: Ellipsoid, margin: float) -> Ellipsoid:
    """Grow every semi-axis by ``margin`` keeping centre and orientation."""
    if margin < 0:
        raise ValueError(f"margin must be nonnegative, got {margin}")
    if margin == 0:
        return e
    w, vecs = np.linalg.eigh(e.matrix)
    lengths = 1.0 / np.sqrt(w) + margin
    m = vecs @ np.diag(1.0 / lengths**2) @ vecs.T
    return Ellipsoid(0.5 * (m + m.T), e.center)
