"""Pinhole projection and the calibration-plate corner model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, InvalidArgumentError, NearSingularProjectionError

MIN_DEPTH = 1e-6  # mm


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float = 1050.0
    fy: float = 1050.0
    cx: float = 960.0
    cy: float = 540.0
    image_width: int = 1920
    image_height: int = 1080

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidArgumentError("focal lengths must be positive")
        if not (0 <= self.cx <= self.image_width and 0 <= self.cy <= self.image_height):
            raise InvalidArgumentError("principal point outside the image")

    def matrix(self) -> np.ndarray:
        """The 3x4 extended intrinsic matrix [K | 0]."""
        return np.array(
            [[self.fx, 0.0, self.cx, 0.0], [0.0, self.fy, self.cy, 0.0], [0.0, 0.0, 1.0, 0.0]]
        )

    def contains(self, uv) -> np.ndarray:
        uv = np.asarray(uv)
        return (
            (uv[..., 0] >= 0)
            & (uv[..., 0] <= self.image_width)
            & (uv[..., 1] >= 0)
            & (uv[..., 1] <= self.image_height)
        )


@dataclass(frozen=True)
class PlateSpec:
    rows: int = 7
    cols: int = 10
    square_size: float = 25.0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise InvalidArgumentError("plate needs at least 2x2 corners")
        if not self.square_size > 0:
            raise InvalidArgumentError("square_size must be positive")

    @property
    def n_points(self) -> int:
        return self.rows * self.cols


def plate_feature_points(spec: PlateSpec) -> np.ndarray:
    """Corner positions in the tool frame, row-major, shape (rows*cols, 3)."""
    r, c = np.meshgrid(np.arange(spec.rows), np.arange(spec.cols), indexing="ij")
    pts = np.zeros((spec.n_points, 3))
    pts[:, 0] = c.ravel() * spec.square_size
    pts[:, 1] = r.ravel() * spec.square_size
    return pts


def project_points(k: CameraIntrinsics, points) -> np.ndarray:
    """Project camera-frame points (..., 3) in mm to pixels (..., 2)."""
    p = np.asarray(points, dtype=float)
    z = p[..., 2]
    if np.any(z <= 0):
        raise BehindCameraError("point behind camera")
    if np.any(z < MIN_DEPTH):
        raise NearSingularProjectionError("point depth below 1e-6 mm")
    uv = np.empty(p.shape[:-1] + (2,))
    uv[..., 0] = k.fx * p[..., 0] / z + k.cx
    uv[..., 1] = k.fy * p[..., 1] / z + k.cy
    return uv


def project(k: CameraIntrinsics, point_camera) -> np.ndarray:
    p = np.asarray(point_camera, dtype=float)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InvalidArgumentError("point must be a finite 3-vector")
    return project_points(k, p)
