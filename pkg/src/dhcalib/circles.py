"""Space-circle fitting by reduction to a plane, and fit-quality metrics.

The points are first fitted with a total-least-squares plane.  They are then
expressed in an orthonormal frame on that plane, where a linear (Kasa)
least-squares circle is solved.  The 2-D center is finally lifted back onto
the plane.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError

SINGULAR_GAP_REL = 1e-12
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SpaceCircle:
    plane: np.ndarray  # (A, B, C, D), unit normal
    center: np.ndarray
    radius: float

    @property
    def normal(self) -> np.ndarray:
        return self.plane[:3]


@dataclass(frozen=True)
class FitQuality:
    d_cp: float
    m_p: float
    m_c: float


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DegenerateFitError(f"expected (n, 3) points, got shape {pts.shape}")
    if pts.shape[0] < 3:
        raise DegenerateFitError("at least 3 points are required")
    if not np.all(np.isfinite(pts)):
        raise DegenerateFitError("points must be finite")
    return pts


def _orient(normal: np.ndarray) -> np.ndarray:
    # deterministic sign: largest-magnitude component positive
    k = int(np.argmax(np.abs(normal)))
    return -normal if normal[k] < 0 else normal


def fit_plane(points) -> np.ndarray:
    """Total-least-squares plane (A, B, C, D) with unit normal."""
    pts = _as_points(points)
    centroid = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    if s[0] == 0 or (s[1] - s[2]) <= SINGULAR_GAP_REL * s[0]:
        raise DegenerateFitError("points are collinear or coincident")
    n = _orient(vt[2])
    return np.append(n, -n @ centroid)


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane orthogonal to ``normal``."""
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(normal)))] = 1.0
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return e1, e2


def fit_circle_2d(xy: np.ndarray) -> tuple[np.ndarray, float]:
    """Algebraic least-squares circle through 2-D points: (center, radius)."""
    offset = xy.mean(axis=0)
    scale = np.sqrt(np.mean(np.sum((xy - offset) ** 2, axis=1)))
    if scale == 0:
        raise DegenerateFitError("coincident points")
    u = (xy - offset) / scale
    M = np.column_stack([2 * u[:, 0], 2 * u[:, 1], np.ones(len(u))])
    if np.linalg.cond(M.T @ M) > MAX_CONDITION:
        raise DegenerateFitError("points do not determine a circle")
    rhs = np.sum(u**2, axis=1)
    (cx, cy, c), *_ = np.linalg.lstsq(M, rhs, rcond=None)
    r2 = c + cx**2 + cy**2
    if r2 <= 0:
        raise DegenerateFitError("non-positive squared radius")
    return offset + scale * np.array([cx, cy]), float(scale * np.sqrt(r2))


def fit_space_circle(points) -> SpaceCircle:
    pts = _as_points(points)
    plane = fit_plane(pts)
    n = plane[:3]
    centroid = pts.mean(axis=0)
    e1, e2 = plane_basis(n)
    rel = pts - centroid
    xy = np.column_stack([rel @ e1, rel @ e2])
    c2, r = fit_circle_2d(xy)
    center = centroid + c2[0] * e1 + c2[1] * e2
    # pull the center exactly onto the plane to remove the last rounding
    center = center - (n @ center + plane[3]) * n
    return SpaceCircle(plane=plane, center=center, radius=r)


def fit_quality(circle: SpaceCircle, points) -> FitQuality:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    A = circle.plane
    norm = np.linalg.norm(A[:3])
    d_cp = abs(A[:3] @ circle.center + A[3]) / norm
    d = np.abs(pts @ A[:3] + A[3]) / norm
    v = np.linalg.norm(pts - circle.center, axis=1) - circle.radius
    return FitQuality(
        d_cp=float(d_cp),
        m_p=float(np.sqrt(np.mean(d**2))),
        m_c=float(np.sqrt(np.mean(v**2))),
    )
