"""Standard D-H link transforms and the camera -> base -> wrist -> tool chain.

Lengths are millimetres, angles radians.  The chain is a function of 36
scalars: 28 D-H entries, 6 base-frame pose values and 2 tool offsets.  The
packed order (see :data:`PARAM_NAMES`) is shared by the optimizer, the file
formats and the bench.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

N_JOINTS = 7
N_PARAMS = 36


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class DHRow:
    alpha: float
    a: float
    d: float
    theta_offset: float = 0.0

    def __post_init__(self):
        _finite("DHRow", self.alpha, self.a, self.d, self.theta_offset)
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))
        object.__setattr__(self, "theta_offset", wrap_angle(self.theta_offset))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "d", float(self.d))


@dataclass(frozen=True)
class DHTable:
    rows: tuple[DHRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        if len(rows) != N_JOINTS:
            raise InvalidArgumentError(f"DHTable needs {N_JOINTS} rows, got {len(rows)}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_array(cls, arr) -> "DHTable":
        """Build from a (7, 4) array with columns alpha, a, d, theta_offset."""
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (N_JOINTS, 4):
            raise InvalidArgumentError(f"expected shape (7, 4), got {arr.shape}")
        return cls(tuple(DHRow(*row) for row in arr))

    def as_array(self) -> np.ndarray:
        return np.array([[r.alpha, r.a, r.d, r.theta_offset] for r in self.rows])


# Nominal twists and link offsets of the 7-DoF arm (a = 0, no angle offsets).
IDEAL_DH = DHTable.from_array(
    [
        [-np.pi / 2, 0.0, 85.0, 0.0],
        [-np.pi / 2, 0.0, 85.0, 0.0],
        [np.pi / 2, 0.0, 350.0, 0.0],
        [-np.pi / 2, 0.0, 100.0, 0.0],
        [-np.pi / 2, 0.0, 300.0, 0.0],
        [np.pi / 2, 0.0, 64.0, 0.0],
        [0.0, 0.0, 42.0, 0.0],
    ]
)


@dataclass(frozen=True)
class BaseFrameParams:
    """Pose of the robot base in the camera frame: Trans(x, y, z) Rot_x Rot_y Rot_z."""

    d_bx: float = 0.0
    d_by: float = 0.0
    d_bz: float = 0.0
    delta_bx: float = 0.0
    delta_by: float = 0.0
    delta_bz: float = 0.0

    def __post_init__(self):
        _finite("BaseFrameParams", *self.as_array())
        for name in ("delta_bx", "delta_by", "delta_bz"):
            object.__setattr__(self, name, wrap_angle(getattr(self, name)))
        for name in ("d_bx", "d_by", "d_bz"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.d_bx, self.d_by, self.d_bz, self.delta_bx, self.delta_by, self.delta_bz],
            dtype=float,
        )


@dataclass(frozen=True)
class ToolFrameParams:
    """Wrist -> tool offset.  Rotation and the z offset are folded into the last D-H row."""

    d_tx: float = 0.0
    d_ty: float = 0.0

    def __post_init__(self):
        _finite("ToolFrameParams", self.d_tx, self.d_ty)
        object.__setattr__(self, "d_tx", float(self.d_tx))
        object.__setattr__(self, "d_ty", float(self.d_ty))

    def as_array(self) -> np.ndarray:
        return np.array([self.d_tx, self.d_ty], dtype=float)


@dataclass(frozen=True)
class JointConfig:
    angles: tuple[float, ...]

    def __post_init__(self):
        angles = tuple(float(x) for x in self.angles)
        if len(angles) != N_JOINTS:
            raise InvalidArgumentError(f"JointConfig needs {N_JOINTS} angles")
        _finite("JointConfig", angles)
        if any(abs(x) > np.pi for x in angles):
            raise InvalidArgumentError("joint angle outside +-pi range")
        object.__setattr__(self, "angles", angles)


# --- elementary homogeneous transforms ---

def rot_x(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1]], dtype=float)


def rot_y(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, 0, s, 0], [0, 1, 0, 0], [-s, 0, c, 0], [0, 0, 0, 1]], dtype=float)


def rot_z(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)


def translation(x: float, y: float, z: float) -> np.ndarray:
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def is_rigid_transform(T, tol: float = 1e-9) -> bool:
    T = np.asarray(T, dtype=float)
    if T.shape != (4, 4) or not np.all(np.isfinite(T)):
        return False
    if not np.array_equal(T[3], [0.0, 0.0, 0.0, 1.0]):
        return False
    R = T[:3, :3]
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        return False
    return abs(np.linalg.det(R) - 1.0) <= tol


# --- batched D-H matrices ---

def dh_matrices(alpha, a, d, theta) -> np.ndarray:
    """Link transforms Rot_z(theta) Trans_z(d) Trans_x(a) Rot_x(alpha), broadcast over inputs."""
    alpha, a, d, theta = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (alpha, a, d, theta))
    )
    ca, sa = np.cos(alpha), np.sin(alpha)
    ct, st = np.cos(theta), np.sin(theta)
    T = np.zeros(alpha.shape + (4, 4))
    T[..., 0, 0] = ct
    T[..., 0, 1] = -st * ca
    T[..., 0, 2] = st * sa
    T[..., 0, 3] = a * ct
    T[..., 1, 0] = st
    T[..., 1, 1] = ct * ca
    T[..., 1, 2] = -ct * sa
    T[..., 1, 3] = a * st
    T[..., 2, 1] = sa
    T[..., 2, 2] = ca
    T[..., 2, 3] = d
    T[..., 3, 3] = 1.0
    return T


def dh_link_transform(row: DHRow, joint_angle: float) -> np.ndarray:
    _finite("joint_angle", joint_angle)
    return dh_matrices(row.alpha, row.a, row.d, joint_angle + row.theta_offset)


def forward_kinematics(table: DHTable, q) -> np.ndarray:
    """Base -> wrist transform for one joint configuration."""
    angles = q.angles if isinstance(q, JointConfig) else JointConfig(tuple(q)).angles
    T = np.eye(4)
    for row, angle in zip(table.rows, angles):
        T = T @ dh_link_transform(row, angle)
    return T


def base_transform_from_array(b: np.ndarray) -> np.ndarray:
    return (
        translation(b[0], b[1], b[2]) @ rot_x(b[3]) @ rot_y(b[4]) @ rot_z(b[5])
    )


def base_to_camera_transform(p: BaseFrameParams) -> np.ndarray:
    return base_transform_from_array(p.as_array())


def wrist_to_tool_transform(p: ToolFrameParams) -> np.ndarray:
    return translation(p.d_tx, p.d_ty, 0.0)


def full_chain(base: BaseFrameParams, table: DHTable, tool: ToolFrameParams, q) -> np.ndarray:
    """Camera -> tool transform."""
    return base_to_camera_transform(base) @ forward_kinematics(table, q) @ wrist_to_tool_transform(tool)


# --- 36-parameter packing ---

PARAM_NAMES: tuple[str, ...] = (
    tuple(f"alpha{i}" for i in range(1, 8))
    + tuple(f"a{i}" for i in range(1, 8))
    + tuple(f"d{i}" for i in range(1, 8))
    + tuple(f"theta{i}" for i in range(1, 8))
    + ("d_bx", "d_by", "d_bz", "delta_bx", "delta_by", "delta_bz", "d_tx", "d_ty")
)

ANGLE_MASK = np.zeros(N_PARAMS, dtype=bool)
ANGLE_MASK[0:7] = True
ANGLE_MASK[21:28] = True
ANGLE_MASK[31:34] = True


def param_index(name: str) -> int:
    return PARAM_NAMES.index(name)


@dataclass(frozen=True)
class KinematicModel:
    """Everything the camera -> tool chain depends on."""

    dh: DHTable = IDEAL_DH
    base: BaseFrameParams = field(default_factory=BaseFrameParams)
    tool: ToolFrameParams = field(default_factory=ToolFrameParams)

    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.dh.as_array().T.ravel(), self.base.as_array(), self.tool.as_array()]
        )

    @classmethod
    def unpack(cls, vec) -> "KinematicModel":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (N_PARAMS,):
            raise InvalidArgumentError(f"parameter vector must have {N_PARAMS} entries")
        _finite("parameter vector", vec)
        return cls(
            DHTable.from_array(vec[:28].reshape(4, N_JOINTS).T),
            BaseFrameParams(*vec[28:34]),
            ToolFrameParams(*vec[34:36]),
        )

    def apply(self, delta) -> "KinematicModel":
        """Entrywise compensation: model + delta in packed order."""
        return KinematicModel.unpack(self.pack() + np.asarray(delta, dtype=float))

    def chain(self, q) -> np.ndarray:
        return full_chain(self.base, self.dh, self.tool, q)


def delta_between(reference: KinematicModel, other: KinematicModel) -> np.ndarray:
    """Packed difference other - reference with angle entries wrapped."""
    diff = other.pack() - reference.pack()
    diff[ANGLE_MASK] = wrap_angle(diff[ANGLE_MASK])
    return diff


def chain_batch(params: np.ndarray, joint_angles: np.ndarray) -> np.ndarray:
    """Camera -> tool transforms for many poses from a raw 36-vector.

    ``joint_angles`` has shape (P, 7); returns (P, 4, 4).  No validation or
    angle wrapping, this is the inner loop of the objective.
    """
    q = np.asarray(joint_angles, dtype=float)
    alpha, a, d, theta = params[0:7], params[7:14], params[14:21], params[21:28]
    links = dh_matrices(alpha, a, d, q + theta)  # (P, 7, 4, 4)
    T = base_transform_from_array(params[28:34])
    T = np.broadcast_to(T, (q.shape[0], 4, 4))
    for j in range(N_JOINTS):
        T = T @ links[:, j]
    tool = translation(params[34], params[35], 0.0)
    return T @ tool


def stack_configs(configs: Sequence[JointConfig]) -> np.ndarray:
    return np.array([c.angles for c in configs], dtype=float).reshape(-1, N_JOINTS)
