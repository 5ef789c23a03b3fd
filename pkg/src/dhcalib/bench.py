"""Simulated arm + monocular camera producing sweep datasets with known answers.

Every joint is swept through equally spaced angles with the other joints at
zero.  The true model is the nominal one plus a random offset whose size
follows the magnitudes reported for a real 7-DoF arm.  Each pose draws noise
from its own RNG stream keyed on (seed, joint, pose), so generation order
never changes the output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .camera import CameraIntrinsics, PlateSpec, plate_feature_points, project_points
from .dataset import NOMINAL_BASE_ROTATION, GroundTruth, SweepDataset, SweepRecord
from .errors import InvalidArgumentError, VisibilityError
from .kinematics import (
    IDEAL_DH,
    N_JOINTS,
    N_PARAMS,
    BaseFrameParams,
    KinematicModel,
    ToolFrameParams,
    chain_batch,
    delta_between,
)

NOMINAL_BASE = BaseFrameParams(120.0, -450.0, 1000.0, *NOMINAL_BASE_ROTATION)
NOMINAL_MODEL = KinematicModel(IDEAL_DH, NOMINAL_BASE, ToolFrameParams())

# Largest offsets per parameter group, packed order (rad / mm).
PERTURBATION_ENVELOPE = np.concatenate(
    [
        np.full(7, 0.2355),
        np.full(7, 0.0303),
        np.full(7, 0.1014),
        np.full(7, np.radians(0.2285)),
        np.full(3, 0.0576),
        np.full(3, np.radians(2.9305)),
        np.full(2, 0.0164),
    ]
)
TOOL_PRIOR_ERROR = 0.05  # mm, caliper-grade


@dataclass(frozen=True)
class BenchConfig:
    seed: int = 0
    perturbation_scale: float = 1.0
    pixel_noise_sigma: float = 0.0
    angles_per_joint: int = 10
    sweep_range: tuple[float, float] = (-np.pi / 4, np.pi / 4)

    def __post_init__(self):
        if self.angles_per_joint < 3:
            raise InvalidArgumentError("angles_per_joint must be >= 3")
        lo, hi = self.sweep_range
        if not -np.pi / 4 - 1e-12 <= lo < hi <= np.pi / 4 + 1e-12:
            raise InvalidArgumentError("sweep_range must lie within +-45 degrees")
        if self.perturbation_scale < 0 or self.pixel_noise_sigma < 0:
            raise InvalidArgumentError("scale and noise must be non-negative")

    def sweep_angles(self) -> np.ndarray:
        return np.linspace(*self.sweep_range, self.angles_per_joint)


def make_ground_truth(config: BenchConfig, nominal: KinematicModel = NOMINAL_MODEL) -> GroundTruth:
    rng = np.random.default_rng([config.seed, 0, 0])
    delta = rng.uniform(-1.0, 1.0, N_PARAMS) * PERTURBATION_ENVELOPE * config.perturbation_scale
    return ground_truth_from_delta(delta, nominal)


def ground_truth_from_delta(delta, nominal: KinematicModel = NOMINAL_MODEL) -> GroundTruth:
    model = nominal.apply(delta)
    return GroundTruth(model=model, delta=delta_between(nominal, model))


def simulate_sweeps(
    truth: GroundTruth,
    intrinsics: Optional[CameraIntrinsics] = None,
    plate: Optional[PlateSpec] = None,
    config: BenchConfig = BenchConfig(),
    nominal: KinematicModel = NOMINAL_MODEL,
) -> SweepDataset:
    intrinsics = intrinsics or CameraIntrinsics()
    plate = plate or PlateSpec()
    features = plate_feature_points(plate)
    features_h = np.column_stack([features, np.ones(len(features))])
    params = truth.model.pack()
    angles = config.sweep_angles()
    sigma = config.pixel_noise_sigma

    records = []
    for joint in range(1, N_JOINTS + 1):
        q = np.zeros((len(angles), N_JOINTS))
        q[:, joint - 1] = angles
        T = chain_batch(params, q)
        pts = np.einsum("pij,fj->pfi", T, features_h)[..., :3]
        uv = np.empty(pts.shape[:2] + (2,))
        for i, angle in enumerate(angles):
            if np.any(pts[i, :, 2] <= 0):
                raise VisibilityError(joint, angle, "feature behind camera")
            uv[i] = project_points(intrinsics, pts[i])
            if not np.all(intrinsics.contains(uv[i])):
                raise VisibilityError(joint, angle)
        observed = uv.copy()
        measured = pts.copy()
        if sigma > 0:
            for i in range(len(angles)):
                rng = np.random.default_rng([config.seed, joint, i + 1])
                observed[i] += rng.normal(0.0, sigma, uv[i].shape)
                depth_sigma = sigma * pts[i, :, 2:3] / intrinsics.fx
                measured[i] += rng.normal(0.0, 1.0, pts[i].shape) * depth_sigma
        records.append(
            SweepRecord(
                joint_index=joint,
                commanded_angles=angles.copy(),
                joint_configs=q,
                observed_pixels=observed,
                measured_points3d=measured,
            )
        )

    prior_rng = np.random.default_rng([config.seed, 0, 1])
    prior_offset = prior_rng.uniform(-1.0, 1.0, 2) * TOOL_PRIOR_ERROR * config.perturbation_scale
    tool_prior = ToolFrameParams(*(truth.model.tool.as_array() + prior_offset))

    return SweepDataset(
        records=tuple(records),
        intrinsics=intrinsics,
        plate=plate,
        nominal_dh=nominal.dh,
        base_rotation_prior=(nominal.base.delta_bx, nominal.base.delta_by, nominal.base.delta_bz),
        tool_prior=tool_prior,
        nominal_base=nominal.base,
        ground_truth=truth,
    )


def make_dataset(config: BenchConfig = BenchConfig(), **kwargs) -> SweepDataset:
    """Ground truth + sweeps in one call."""
    return simulate_sweeps(make_ground_truth(config), config=config, **kwargs)
