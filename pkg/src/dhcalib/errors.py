"""Exception hierarchy shared by the calibration modules."""


class CalibrationError(Exception):
    """Base class for all errors raised by dhcalib."""


class InvalidArgumentError(CalibrationError, ValueError):
    """Non-finite or out-of-range input."""


class DegenerateFitError(CalibrationError):
    """Point set cannot determine a plane or circle."""

    def __init__(self, message, joint=None):
        if joint is not None:
            message = f"joint {joint}: {message}"
        super().__init__(message)
        self.joint = joint


class AxisIndeterminateError(DegenerateFitError):
    """Fitted circle too small for a reliable joint axis direction."""


class ProjectionError(CalibrationError):
    """A point cannot be projected into the image."""

    def __init__(self, message, pose=None):
        if pose is not None:
            message = f"pose {pose}: {message}"
        super().__init__(message)
        self.pose = pose


class BehindCameraError(ProjectionError):
    pass


class NearSingularProjectionError(ProjectionError):
    pass


class VisibilityError(CalibrationError):
    """A simulated feature falls outside the image frame."""

    def __init__(self, joint, angle, message="feature outside image"):
        super().__init__(f"joint {joint} at {angle:.6f} rad: {message}")
        self.joint = joint
        self.angle = angle
