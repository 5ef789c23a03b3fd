"""Rough D-H identification from joint axes and fine identification in pixel space.

Rough stage: every joint sweep moves each plate corner on a circle about that
joint's axis.  The fitted circles give the axis line, and the common normals
of consecutive axes give the twist, length and offset entries of the D-H
table.

Fine stage: starting from the rough table, a 36-entry offset vector is
optimized so that the plate corners, pushed through the camera -> base ->
wrist -> tool chain and projected with the known intrinsics, land on the
observed pixels.  The objective is the mean Euclidean pixel distance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .camera import CameraIntrinsics
from .circles import FitQuality, SpaceCircle, fit_quality, fit_space_circle
from .dataset import SweepDataset, SweepRecord
from .errors import (
    AxisIndeterminateError,
    BehindCameraError,
    CalibrationError,
    DegenerateFitError,
    NearSingularProjectionError,
    ProjectionError,
)
from .kinematics import (
    ANGLE_MASK,
    N_JOINTS,
    N_PARAMS,
    BaseFrameParams,
    DHTable,
    KinematicModel,
    chain_batch,
    wrap_angle,
)
from .optimizer import MinimizeOptions, MinimizeResult, bfgs_minimize

logger = logging.getLogger(__name__)

MIN_AXIS_RADIUS = 5.0  # mm
PARALLEL_EPS = 1e-9

# internal optimizer variable = physical offset * scale
VARIABLE_SCALE = np.where(ANGLE_MASK, 1.0, 0.01)

# The mean of pixel distances has a kink wherever a residual vanishes; on
# noise-free data every residual vanishes at the optimum, and a coarser
# difference step smears the gradient at about step * sensitivity pixels.
FINE_OPTIONS = MinimizeOptions(fd_step_relative=1e-10, objective_floor=0.0)


@dataclass(frozen=True)
class AxisLine:
    point: np.ndarray
    direction: np.ndarray


@dataclass(frozen=True)
class CommonNormal:
    a: float
    alpha: float
    d: float
    foot_i: np.ndarray
    foot_j: np.ndarray
    x_axis: np.ndarray


def tracked_feature(dataset: SweepDataset) -> int:
    """Corner used for circle fitting: the grid corner opposite the tool origin.

    The tool origin sits almost on the last joint axis, so its own trajectory
    degenerates to a point.
    """
    return dataset.plate.n_points - 1


def extract_joint_axis(circle: SpaceCircle, points, angles) -> AxisLine:
    """Axis through the circle center, oriented by the right-hand rule.

    ``points`` are the tracked positions at the commanded ``angles``.
    """
    if circle.radius < MIN_AXIS_RADIUS:
        raise AxisIndeterminateError(
            f"circle radius {circle.radius:.3f} mm below {MIN_AXIS_RADIUS} mm"
        )
    order = np.argsort(angles, kind="stable")
    rel = np.asarray(points, dtype=float)[order] - circle.center
    swept = np.cross(rel[:-1], rel[1:]).sum(axis=0)
    n = circle.normal / np.linalg.norm(circle.normal)
    if swept @ n < 0:
        n = -n
    return AxisLine(point=np.array(circle.center, dtype=float), direction=n)


def _perpendicular(u: np.ndarray) -> np.ndarray:
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(u)))] = 1.0
    v = np.cross(u, helper)
    return v / np.linalg.norm(v)


def common_normal(axis_i: AxisLine, axis_j: AxisLine) -> CommonNormal:
    """Shortest segment between two axis lines.

    ``x_axis`` points from axis_i to axis_j (or along dir_i x dir_j when the
    lines intersect); ``alpha`` is the rotation about ``x_axis`` taking
    dir_i onto dir_j and ``d`` is the foot on axis_i measured from its
    reference point.  Parallel axes anchor the foot at axis_i's point.
    """
    u, v = axis_i.direction, axis_j.direction
    p, q = axis_i.point, axis_j.point
    cross = np.cross(u, v)
    sin_norm = np.linalg.norm(cross)
    w = p - q
    if sin_norm < PARALLEL_EPS:
        foot_i = p.copy()
        foot_j = q + ((p - q) @ v) * v
        gap = foot_j - foot_i
        dist = np.linalg.norm(gap)
        x = gap / dist if dist > 0 else _perpendicular(u)
    else:
        b = u @ v
        dw_u, dw_v = u @ w, v @ w
        denom = 1.0 - b * b
        s = (b * dw_v - dw_u) / denom
        t = (dw_v - b * dw_u) / denom
        foot_i = p + s * u
        foot_j = q + t * v
        x = cross / sin_norm
        if (foot_j - foot_i) @ x < 0:
            x = -x
    a = float((foot_j - foot_i) @ x)
    alpha = float(np.arctan2(np.cross(u, v) @ x, u @ v))
    d = float((foot_i - p) @ u)
    return CommonNormal(a=a, alpha=alpha, d=d, foot_i=foot_i, foot_j=foot_j, x_axis=x)


@dataclass
class RoughResult:
    dh: DHTable
    identified: np.ndarray  # (7, 4) bool: alpha, a, d, theta columns
    circles: list
    quality: list
    axes: list
    base: BaseFrameParams
    normals: list = field(default_factory=list)


def pooled_axis(record: SweepRecord) -> AxisLine:
    """Combine the axes of every corner whose circle is large enough.

    Directions are weighted by radius squared, since the normal of a short
    noisy arc tilts roughly as noise / radius.
    """
    dirs, points, weights = [], [], []
    for f in range(record.measured_points3d.shape[1]):
        pts = record.measured_points3d[:, f]
        try:
            circle = fit_space_circle(pts)
            axis = extract_joint_axis(circle, pts, record.commanded_angles)
        except DegenerateFitError:
            continue
        dirs.append(axis.direction)
        points.append(axis.point)
        weights.append(circle.radius**2)
    if not dirs:
        raise AxisIndeterminateError("no plate corner traces a usable circle")
    w = np.array(weights)
    direction = (w[:, None] * np.array(dirs)).sum(axis=0)
    direction /= np.linalg.norm(direction)
    point = np.average(np.array(points), axis=0, weights=w)
    return AxisLine(point=point, direction=direction)


def fit_joint_circles(dataset: SweepDataset, feature: Optional[int] = None):
    """Per-joint circle of the tracked corner, its quality and the joint axis.

    With ``feature=None`` the axis pools all corners; with an index it comes
    from that corner alone.
    """
    tracked = tracked_feature(dataset) if feature is None else feature
    circles, quality, axes = [], [], []
    for rec in dataset.records:
        pts = rec.measured_points3d[:, tracked]
        try:
            circle = fit_space_circle(pts)
            if feature is None:
                axis = pooled_axis(rec)
            else:
                axis = extract_joint_axis(circle, pts, rec.commanded_angles)
        except DegenerateFitError as exc:
            raise type(exc)(str(exc), joint=rec.joint_index) from exc
        circles.append(circle)
        quality.append(fit_quality(circle, pts))
        axes.append(axis)
    return circles, quality, axes


def rough_identify(dataset: SweepDataset, feature: Optional[int] = None) -> RoughResult:
    """D-H twist/length for rows 1-6 and offsets for rows 2-6 from the joint axes.

    Entries the axes cannot determine (d1, d7, row 7 twist and length, every
    joint-angle offset) are copied from the nominal table and left unflagged
    in ``identified``.  The common normal of two intersecting or skew axes
    fixes the x-axis only up to sign; the sign whose twist is closest to the
    nominal one is kept.
    """
    circles, quality, axes = fit_joint_circles(dataset, feature)
    nominal = dataset.nominal_dh.as_array()
    table = nominal.copy()
    identified = np.zeros((N_JOINTS, 4), dtype=bool)

    normals = [common_normal(axes[i], axes[i + 1]) for i in range(N_JOINTS - 1)]
    for i, cn in enumerate(normals):
        alpha, a = cn.alpha, cn.a
        flipped = wrap_angle(-alpha)
        if abs(wrap_angle(flipped - nominal[i, 0])) < abs(wrap_angle(alpha - nominal[i, 0])):
            alpha, a = flipped, -a
        table[i, 0], table[i, 1] = alpha, a
        identified[i, :2] = True

    for r in range(1, N_JOINTS - 1):
        u = axes[r].direction
        table[r, 2] = float((normals[r].foot_i - normals[r - 1].foot_j) @ u)
        identified[r, 2] = True

    # Base origin: foot of the first common normal on axis 1, moved back along
    # the axis by the nominal first link offset.
    origin = normals[0].foot_i - nominal[0, 2] * axes[0].direction
    base = BaseFrameParams(*origin, *dataset.base_rotation_prior)
    return RoughResult(
        dh=DHTable.from_array(table),
        identified=identified,
        circles=circles,
        quality=quality,
        axes=axes,
        base=base,
        normals=normals,
    )


def seed_model(dataset: SweepDataset, rough: RoughResult) -> KinematicModel:
    return KinematicModel(rough.dh, rough.base, dataset.tool_prior)


class PixelObjective:
    """Mean pixel distance between observed corners and those predicted by seed + delta."""

    def __init__(self, dataset: SweepDataset, seed: KinematicModel):
        self.intrinsics: CameraIntrinsics = dataset.intrinsics
        self.seed = seed
        self.seed_vector = seed.pack()
        self.joint_angles = dataset.joint_angles()
        self.observed = dataset.observed()
        f = dataset.feature_points()
        self.features_h = np.column_stack([f, np.ones(len(f))])
        self.labels = dataset.pose_labels()
        self.n_evaluations = 0

    def pixels_for(self, params: np.ndarray) -> np.ndarray:
        T = chain_batch(params, self.joint_angles)
        pts = np.einsum("pij,fj->pfi", T[:, :3, :], self.features_h)
        z = pts[..., 2]
        if np.any(z < 1e-6):
            pose = int(np.argmax(np.any(z < 1e-6, axis=1)))
            cls = BehindCameraError if np.any(z[pose] <= 0) else NearSingularProjectionError
            raise cls("predicted feature not in front of camera", pose=self.labels[pose])
        k = self.intrinsics
        uv = np.empty(pts.shape[:2] + (2,))
        uv[..., 0] = k.fx * pts[..., 0] / z + k.cx
        uv[..., 1] = k.fy * pts[..., 1] / z + k.cy
        return uv

    def predicted_pixels(self, delta) -> np.ndarray:
        return self.pixels_for(self.seed_vector + np.asarray(delta, dtype=float))

    def distances(self, delta) -> np.ndarray:
        """(P, F) Euclidean pixel errors."""
        diff = self.observed - self.predicted_pixels(delta)
        return np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)

    def __call__(self, delta) -> float:
        self.n_evaluations += 1
        return float(np.mean(self.distances(delta)))


def predicted_pixels(delta, seed: KinematicModel, dataset: SweepDataset) -> np.ndarray:
    return PixelObjective(dataset, seed).predicted_pixels(delta)


def objective(delta, dataset: SweepDataset, seed: KinematicModel) -> float:
    return PixelObjective(dataset, seed)(delta)


@dataclass
class Evaluation:
    per_pose: np.ndarray  # mean pixel deviation of each pose
    mean: float
    labels: list


def evaluate(model: KinematicModel, dataset: SweepDataset) -> Evaluation:
    dist = PixelObjective(dataset, model).distances(np.zeros(N_PARAMS))
    return Evaluation(per_pose=dist.mean(axis=1), mean=float(dist.mean()), labels=dataset.pose_labels())


@dataclass
class CalibrationResult:
    dh_rough: DHTable
    seed: KinematicModel
    delta: np.ndarray
    compensated: KinematicModel
    objective_value: float
    initial_objective: float
    iterations: int
    converged: bool
    status: str
    trace: list

    @property
    def dh_compensated(self) -> DHTable:
        return self.compensated.dh

    @property
    def base(self) -> BaseFrameParams:
        return self.compensated.base

    @property
    def tool(self):
        return self.compensated.tool


def scaled_objective(obj: PixelObjective):
    """The objective as seen by the optimizer: scaled variables, inf when infeasible."""

    def f_internal(u):
        try:
            return obj(np.asarray(u) / VARIABLE_SCALE)
        except ProjectionError:
            # infeasible trial step; backtracking shrinks it
            return np.inf

    return f_internal


def fine_identify(
    dataset: SweepDataset,
    seed: KinematicModel,
    options: MinimizeOptions = FINE_OPTIONS,
    dh_rough: Optional[DHTable] = None,
) -> CalibrationResult:
    """Minimize the pixel objective over the 36 offsets, starting from zero."""
    f_internal = scaled_objective(PixelObjective(dataset, seed))
    result: MinimizeResult = bfgs_minimize(f_internal, np.zeros(N_PARAMS), options)
    delta = result.x_star / VARIABLE_SCALE
    for a, b in zip(result.trace, result.trace[1:]):
        if b[0] > a[0]:
            raise CalibrationError("objective increased between accepted iterates")
    logger.info(
        "fine identification: %.6g -> %.6g px in %d iterations (%s)",
        result.trace[0][0], result.f_star, result.iterations, result.status,
    )
    return CalibrationResult(
        dh_rough=dh_rough if dh_rough is not None else seed.dh,
        seed=seed,
        delta=delta,
        compensated=seed.apply(delta),
        objective_value=result.f_star,
        initial_objective=result.trace[0][0],
        iterations=result.iterations,
        converged=result.converged,
        status=result.status,
        trace=result.trace,
    )


def calibrate(dataset: SweepDataset, options: MinimizeOptions = FINE_OPTIONS):
    """Circle fits, rough identification and fine identification in sequence."""
    rough = rough_identify(dataset)
    seed = seed_model(dataset, rough)
    return rough, fine_identify(dataset, seed, options, dh_rough=rough.dh)
