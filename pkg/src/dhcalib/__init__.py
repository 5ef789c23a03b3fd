"""Two-stage kinematic calibration of a 7-DoF arm from monocular camera data."""
from .bench import BenchConfig, make_dataset, make_ground_truth, simulate_sweeps
from .camera import CameraIntrinsics, PlateSpec, plate_feature_points, project, project_points
from .circles import FitQuality, SpaceCircle, fit_plane, fit_quality, fit_space_circle
from .dataset import GroundTruth, SweepDataset, SweepRecord
from .identification import (
    CalibrationResult,
    calibrate,
    common_normal,
    evaluate,
    extract_joint_axis,
    fine_identify,
    objective,
    predicted_pixels,
    rough_identify,
)
from .kinematics import (
    IDEAL_DH,
    BaseFrameParams,
    DHRow,
    DHTable,
    JointConfig,
    KinematicModel,
    ToolFrameParams,
    base_to_camera_transform,
    dh_link_transform,
    forward_kinematics,
    full_chain,
    wrist_to_tool_transform,
)
from .optimizer import MinimizeOptions, MinimizeResult, bfgs_minimize, numeric_gradient

__version__ = "0.1.0"
