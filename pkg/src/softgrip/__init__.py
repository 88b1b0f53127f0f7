"""Kinematics, calibration and grasp planning for a tri-fingered variable-stiffness soft gripper."""

from .calibration import (
    CalibrationGrid,
    PressureCommand,
    StiffnessSample,
    command_from_target,
    estimate_stiffness,
    inverse_command,
    iso_phi_curve,
    load_grid,
    shape_from_pressures,
    stiffness_from_target,
)
from .errors import (
    DegenerateInput,
    InvalidIndex,
    InvalidParams,
    NoClosure,
    NotMonotone,
    OutOfHull,
    OutOfRange,
    ParseError,
    SoftGripError,
    ValidationError,
)
from .grasp import GraspObject, GraspPlan, closure_phi, plan_grasp
from .kinematics import (
    CurveParams,
    FingerParams,
    GripperParams,
    JointState,
    RigidTransform,
    curve_from_joints,
    fingertip_aperture,
    finger_transform,
    gripper_finger_transform,
    joints_from_phi,
    sample_workspace,
)

__version__ = "0.1.0"
