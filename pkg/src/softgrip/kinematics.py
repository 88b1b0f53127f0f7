"""Constant-curvature finger kinematics and tri-finger gripper geometry.

Each finger is an inextensible backbone of arc length ``L`` lined with three
extension-mode muscles.  Muscle 1 sits at radius ``r`` on the finger's +X
side; muscles 2 and 3 are driven together and sit ``r/2`` on the -X side.
Gripping bends the finger into a circular arc in its X-Z plane, described by
the subtended angle ``phi`` and radius ``lambda = L / phi``.

All lengths are in meters and angles in radians.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidIndex, InvalidParams, OutOfRange

# Below this bend angle the arc formulas switch to series expansions.
SERIES_THRESHOLD = 1e-6

# Slack accepted on range checks so that round-off from a round trip does not
# flip a boundary value out of range.
_RANGE_SLACK = 1e-12

DEFAULT_ARC_LENGTH = 0.150
DEFAULT_ACTUATOR_RADIUS = 0.012
DEFAULT_BASE_OFFSET = 0.030
DEFAULT_MOUNT_ANGLE = 3 * math.pi / 4
FINGER_AZIMUTHS = (0.0, 2 * math.pi / 3, 4 * math.pi / 3)


@dataclass(frozen=True)
class FingerParams:
    """Geometric constants of one finger."""

    arc_length: float = DEFAULT_ARC_LENGTH  # L, bending span (m)
    actuator_radius: float = DEFAULT_ACTUATOR_RADIUS  # r, muscle 1 offset (m)
    phi_max: float = math.pi
    pressure_min: float = 0.0  # bar
    pressure_max: float = 7.0  # bar

    def __post_init__(self):
        if not self.arc_length > 0:
            raise InvalidParams(f"arc_length must be > 0, got {self.arc_length}")
        if not self.actuator_radius > 0:
            raise InvalidParams(f"actuator_radius must be > 0, got {self.actuator_radius}")
        if not self.actuator_radius < self.arc_length:
            raise InvalidParams("actuator_radius must be smaller than arc_length")
        if not 0 < self.phi_max <= math.pi:
            raise InvalidParams(f"phi_max must lie in (0, pi], got {self.phi_max}")
        if not self.pressure_min < self.pressure_max:
            raise InvalidParams("pressure_min must be below pressure_max")


@dataclass(frozen=True)
class JointState:
    """Length changes of muscle 1 (``l1``) and of the bundled pair (``l2``)."""

    l1: float
    l2: float


@dataclass(frozen=True)
class CurveParams:
    """Bending-arc state of a finger.

    ``radius`` is ``arc_length / phi``; it is ``math.inf`` for the straight
    finger.  Build instances with :meth:`from_phi` so the inextensibility
    constraint holds by construction.
    """

    radius: float
    phi: float
    arc_length: float

    @classmethod
    def from_phi(cls, phi: float, arc_length: float = DEFAULT_ARC_LENGTH) -> "CurveParams":
        if phi < 0 or not math.isfinite(phi):
            raise OutOfRange(f"phi={phi} must be finite and non-negative")
        radius = arc_length / phi if phi > 0 else math.inf
        return cls(radius=radius, phi=phi, arc_length=arc_length)

    @property
    def is_straight(self) -> bool:
        return self.phi < SERIES_THRESHOLD


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation plus translation; composes with ``@`` like a 4x4 HTM."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _readonly(self.rotation).reshape(3, 3))
        object.__setattr__(self, "position", _readonly(self.position).reshape(3))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.position
        return m

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.position + self.position,
        )

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.position

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.position)

    def allclose(self, other: "RigidTransform", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
            and np.allclose(self.position, other.position, rtol=0, atol=atol)
        )

    def __repr__(self):
        return f"RigidTransform(position={self.position.tolist()}, rotation={self.rotation.tolist()})"


def rot_y(angle: float) -> RigidTransform:
    c, s = math.cos(angle), math.sin(angle)
    return RigidTransform([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> RigidTransform:
    c, s = math.cos(angle), math.sin(angle)
    return RigidTransform([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def trans_x(d: float) -> RigidTransform:
    return RigidTransform(np.eye(3), [d, 0.0, 0.0])


def trans_z(d: float) -> RigidTransform:
    return RigidTransform(np.eye(3), [0.0, 0.0, d])


@dataclass(frozen=True)
class GripperParams:
    """Mounting of the three fingers on the base unit.

    Finger 1 is ``Pz(offset_sign * base_offset) @ Ry(mount_angle) @ T(finger)``;
    fingers 2 and 3 are that transform rotated about Z by 2pi/3 and 4pi/3.
    """

    base_offset: float = DEFAULT_BASE_OFFSET  # sigma (m)
    mount_angle: float = DEFAULT_MOUNT_ANGLE
    offset_sign: float = 1.0

    def __post_init__(self):
        if not math.pi / 2 < self.mount_angle < math.pi:
            raise InvalidParams(f"mount_angle must lie in (pi/2, pi), got {self.mount_angle}")
        if self.offset_sign not in (1.0, -1.0):
            raise InvalidParams("offset_sign must be +1 or -1")

    @property
    def azimuths(self) -> tuple:
        return FINGER_AZIMUTHS


def curve_from_joints(q: JointState, params: FingerParams) -> CurveParams:
    """Bend state from muscle length changes.

    Uses ``phi = -l1/r`` when ``l1 > l2`` and ``phi = 2*l2/r`` otherwise.
    Back-bending (negative phi) is outside the model and raises.
    """
    r = params.actuator_radius
    if not r > 0:
        raise InvalidParams(f"actuator_radius must be > 0, got {r}")
    phi = -q.l1 / r if q.l1 > q.l2 else 2.0 * q.l2 / r
    phi = check_phi(phi, params)
    return CurveParams.from_phi(phi, params.arc_length)


def joints_from_phi(phi: float, params: FingerParams) -> JointState:
    phi = check_phi(phi, params)
    l2 = 0.5 * params.actuator_radius * phi
    # Doubling is exact in binary, so l1 + 2*l2 == 0 holds without round-off.
    return JointState(l1=-2.0 * l2, l2=l2)


def check_phi(phi: float, params: FingerParams) -> float:
    if not math.isfinite(phi):
        raise OutOfRange(f"phi={phi} is not finite")
    lo_slack = _RANGE_SLACK
    hi_slack = _RANGE_SLACK * max(1.0, params.phi_max)
    if phi < -lo_slack or phi > params.phi_max + hi_slack:
        raise OutOfRange(
            f"phi={phi:.9g} rad outside admissible range [0, {params.phi_max:.9g}] "
            "(model admits phi in (0, pi))"
        )
    return min(max(phi, 0.0), params.phi_max)


def arc_point(arc_length: float, theta: float):
    """Planar (x, z) of a point a distance ``arc_length`` along an arc bent by ``theta``."""
    if abs(theta) < SERIES_THRESHOLD:
        t2 = theta * theta
        # (1 - cos t)/t and sin(t)/t to O(t^4)
        return arc_length * theta * (0.5 - t2 / 24.0), arc_length * (1.0 - t2 / 6.0)
    return (
        arc_length * 2.0 * math.sin(theta / 2.0) ** 2 / theta,
        arc_length * math.sin(theta) / theta,
    )


def finger_transform(curve: CurveParams, xi: float) -> RigidTransform:
    """Pose of backbone point ``xi`` (0 = base, 1 = tip) in the finger frame.

    Equal to ``Px(lambda) @ Ry(xi*phi) @ Px(-lambda)`` but evaluated without
    forming ``lambda`` so the straight finger is handled smoothly.
    """
    if not 0.0 <= xi <= 1.0:
        raise OutOfRange(f"xi={xi} outside [0, 1]")
    theta = xi * curve.phi
    x, z = arc_point(xi * curve.arc_length, theta)
    return RigidTransform(rot_y(theta).rotation, [x, 0.0, z])


def gripper_finger_transform(
    finger_index: int,
    curve: CurveParams,
    xi: float,
    gparams: GripperParams = GripperParams(),
) -> RigidTransform:
    if finger_index not in (1, 2, 3):
        raise InvalidIndex(f"finger_index must be 1, 2 or 3, got {finger_index!r}")
    t1 = (
        trans_z(gparams.offset_sign * gparams.base_offset)
        @ rot_y(gparams.mount_angle)
        @ finger_transform(curve, xi)
    )
    if finger_index == 1:
        return t1
    return rot_z(gparams.azimuths[finger_index - 1]) @ t1


def fingertip_positions(curve: CurveParams, gparams: GripperParams = GripperParams()) -> np.ndarray:
    """3x3 array, row ``i`` is the tip of finger ``i + 1``."""
    return np.array([gripper_finger_transform(i, curve, 1.0, gparams).position for i in (1, 2, 3)])


@dataclass(frozen=True)
class Aperture:
    radial_distance: float
    height: float


def fingertip_aperture(curve: CurveParams, gparams: GripperParams = GripperParams()) -> Aperture:
    """Distance of the fingertips from the gripper's central axis, and their height."""
    x, y, z = gripper_finger_transform(1, curve, 1.0, gparams).position
    return Aperture(radial_distance=math.hypot(x, y), height=float(z))


@functools.lru_cache(maxsize=64)
def monotone_aperture_limit(
    params: FingerParams = FingerParams(),
    gparams: GripperParams = GripperParams(),
    samples: int = 4001,
) -> float:
    """Largest sampled phi up to which the aperture keeps shrinking.

    The fingertips close toward the axis, cross it, then open out again on
    the far side; only the closing stretch is usable for grasp closure.
    """
    phis = np.linspace(0.0, params.phi_max, samples)
    radial = np.array(
        [fingertip_aperture(CurveParams.from_phi(p, params.arc_length), gparams).radial_distance for p in phis]
    )
    rising = np.nonzero(np.diff(radial) >= 0)[0]
    if rising.size == 0:
        return float(params.phi_max)
    return float(phis[rising[0]])


@dataclass(frozen=True)
class WorkspaceSample:
    phi: float
    fingertips: np.ndarray  # 3x3, row per finger


def sample_workspace(
    params: FingerParams = FingerParams(),
    gparams: GripperParams = GripperParams(),
    n: int = 50,
) -> list:
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    out = []
    for phi in np.linspace(0.0, params.phi_max, n):
        curve = CurveParams.from_phi(float(phi), params.arc_length)
        out.append(WorkspaceSample(float(phi), fingertip_positions(curve, gparams)))
    return out


def backbone_points(
    curve: CurveParams,
    finger_index: int,
    gparams: GripperParams = GripperParams(),
    n: int = 25,
) -> np.ndarray:
    """``n`` points along one finger's backbone in the gripper frame."""
    return np.array(
        [gripper_finger_transform(finger_index, curve, float(xi), gparams).position for xi in np.linspace(0, 1, n)]
    )
