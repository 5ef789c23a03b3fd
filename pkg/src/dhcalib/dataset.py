"""Per-joint sweep records and the dataset passed between bench, identification and IO."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .camera import CameraIntrinsics, PlateSpec, plate_feature_points
from .errors import InvalidArgumentError
from .kinematics import (
    IDEAL_DH,
    N_JOINTS,
    BaseFrameParams,
    DHTable,
    KinematicModel,
    ToolFrameParams,
)

SWEEP_LIMIT = np.pi / 4 + 1e-12

# Camera <- base rotation convention: 90 deg about x, then 90 deg about z.
NOMINAL_BASE_ROTATION = (np.pi / 2, 0.0, np.pi / 2)


@dataclass(frozen=True)
class SweepRecord:
    joint_index: int  # 1..7
    commanded_angles: np.ndarray  # (N,)
    joint_configs: np.ndarray  # (N, 7), theta_cap per pose
    observed_pixels: np.ndarray  # (N, F, 2)
    measured_points3d: np.ndarray  # (N, F, 3), camera frame

    def __post_init__(self):
        n = len(self.commanded_angles)
        if not 1 <= self.joint_index <= N_JOINTS:
            raise InvalidArgumentError(f"joint_index out of range: {self.joint_index}")
        if self.joint_configs.shape != (n, N_JOINTS):
            raise InvalidArgumentError("joint_configs must be (N, 7)")
        if self.observed_pixels.ndim != 3 or self.observed_pixels.shape[0] != n:
            raise InvalidArgumentError("observed_pixels must be (N, F, 2)")
        if self.measured_points3d.shape[:2] != self.observed_pixels.shape[:2]:
            raise InvalidArgumentError("measured_points3d must match observed_pixels")
        if np.any(np.abs(self.commanded_angles) > SWEEP_LIMIT):
            raise InvalidArgumentError("sweep angles must lie within +-45 degrees")
        for arr in (self.commanded_angles, self.joint_configs, self.observed_pixels, self.measured_points3d):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError("sweep record contains non-finite values")

    @property
    def n_poses(self) -> int:
        return len(self.commanded_angles)


@dataclass(frozen=True)
class GroundTruth:
    model: KinematicModel
    delta: np.ndarray  # truth - nominal, packed order

    @property
    def dh_true(self) -> DHTable:
        return self.model.dh

    @property
    def base_true(self) -> BaseFrameParams:
        return self.model.base

    @property
    def tool_true(self) -> ToolFrameParams:
        return self.model.tool


@dataclass(frozen=True)
class SweepDataset:
    records: tuple[SweepRecord, ...]
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    plate: PlateSpec = field(default_factory=PlateSpec)
    nominal_dh: DHTable = IDEAL_DH
    base_rotation_prior: tuple[float, float, float] = NOMINAL_BASE_ROTATION
    tool_prior: ToolFrameParams = field(default_factory=ToolFrameParams)
    nominal_base: Optional[BaseFrameParams] = None
    ground_truth: Optional[GroundTruth] = None

    def __post_init__(self):
        records = tuple(self.records)
        if sorted(r.joint_index for r in records) != list(range(1, N_JOINTS + 1)):
            raise InvalidArgumentError("dataset needs exactly one record per joint 1..7")
        records = tuple(sorted(records, key=lambda r: r.joint_index))
        n_features = self.plate.n_points
        for r in records:
            if r.observed_pixels.shape[1] != n_features:
                raise InvalidArgumentError(
                    f"joint {r.joint_index}: expected {n_features} features per pose"
                )
        object.__setattr__(self, "records", records)

    @property
    def n_poses(self) -> int:
        return sum(r.n_poses for r in self.records)

    def joint_angles(self) -> np.ndarray:
        """All theta_cap, stacked in record order: (P, 7)."""
        return np.concatenate([r.joint_configs for r in self.records])

    def observed(self) -> np.ndarray:
        return np.concatenate([r.observed_pixels for r in self.records])

    def feature_points(self) -> np.ndarray:
        return plate_feature_points(self.plate)

    def pose_labels(self) -> list[tuple[int, float]]:
        return [(r.joint_index, float(a)) for r in self.records for a in r.commanded_angles]

    def nominal_model(self) -> Optional[KinematicModel]:
        """Design-table model, when the nominal base pose is known."""
        if self.nominal_base is None:
            return None
        return KinematicModel(self.nominal_dh, self.nominal_base, self.tool_prior)
