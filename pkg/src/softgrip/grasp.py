"""Grasp closure on simple test objects and pressure planning for the grasp.

Contact is modelled as fingertip-only: the fingers close until their tips
touch the object's circumscribed cylinder, whose axis is the gripper's
central axis.  Box and pyramid reduce to the circumradius of their square
cross-section.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .calibration import CalibrationGrid, PressureCommand, command_from_target, inverse_command, stiffness_from_target
from .errors import InvalidParams, NoClosure, NotMonotone, OutOfHull, ParseError
from .kinematics import (
    CurveParams,
    FingerParams,
    GripperParams,
    fingertip_aperture,
    monotone_aperture_limit,
)

SHAPES = ("sphere", "box", "pyramid")
CLOSURE_PHI_TOL = 1e-10
CLOSURE_RADIUS_TOL = 1e-6
PRECHECK_SAMPLES = 2001


@dataclass(frozen=True)
class GraspObject:
    shape: str
    characteristic_radius: float  # m
    center_height: Optional[float] = None  # m, informational
    mass: float = 0.1  # kg, informational

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidParams(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.characteristic_radius > 0:
            raise InvalidParams(f"characteristic_radius must be > 0, got {self.characteristic_radius}")

    @classmethod
    def sphere(cls, radius: float, mass: float = 0.1) -> "GraspObject":
        return cls("sphere", radius, mass=mass)

    @classmethod
    def from_edge(cls, shape: str, edge: float, mass: float = 0.1) -> "GraspObject":
        """Box or square pyramid; the grasped cross-section is a square of side ``edge``."""
        if shape not in ("box", "pyramid"):
            raise InvalidParams(f"edge-defined objects are box or pyramid, got {shape!r}")
        return cls(shape, edge * math.sqrt(2) / 2, mass=mass)

    @classmethod
    def from_dict(cls, spec: dict) -> "GraspObject":
        try:
            shape = spec["shape"]
            mass = float(spec.get("mass_kg", 0.1))
            if shape == "sphere":
                obj = cls.sphere(float(spec["radius_m"]), mass=mass)
            else:
                obj = cls.from_edge(shape, float(spec["edge_m"]), mass=mass)
        except KeyError as exc:
            raise ParseError(f"object spec missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidParams):
                raise
            raise ParseError(f"bad object spec: {exc}") from None
        if "center_height_m" in spec:
            obj = cls(obj.shape, obj.characteristic_radius, float(spec["center_height_m"]), obj.mass)
        return obj

    @classmethod
    def from_json(cls, text: str) -> "GraspObject":
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"object JSON: {exc}") from None
        if not isinstance(spec, dict):
            raise ParseError("object JSON must be an object")
        return cls.from_dict(spec)

    @classmethod
    def load(cls, source: str) -> "GraspObject":
        """Parse ``source`` as inline JSON, or as a path to a JSON file."""
        if source.lstrip().startswith("{"):
            return cls.from_json(source)
        try:
            return cls.from_json(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from None


@dataclass(frozen=True)
class GraspPlan:
    phi: float
    stiffness: float
    command: PressureCommand
    aperture: float

    @property
    def security_key(self) -> tuple:
        """Ordinal grip-security key: bend first, then stiffness.

        Tighter closure and stiffer fingers both mean a firmer grip; this is
        an ordering only and predicts no force.
        """
        return (self.phi, self.stiffness)


def security_ranks(plans) -> list:
    """Rank of each plan by :attr:`GraspPlan.security_key`, 1 being least secure.

    Ties share a rank.
    """
    keys = sorted({p.security_key for p in plans})
    rank = {k: i + 1 for i, k in enumerate(keys)}
    return [rank[p.security_key] for p in plans]


def _radial(phi: float, params: FingerParams, gparams: GripperParams) -> float:
    return fingertip_aperture(CurveParams.from_phi(phi, params.arc_length), gparams).radial_distance


def closure_phi(
    obj: GraspObject,
    params: FingerParams = FingerParams(),
    gparams: GripperParams = GripperParams(),
    phi_upper: Optional[float] = None,
) -> float:
    """Bend angle at which the fingertips touch ``obj``.

    The search runs over [0, phi_upper]; by default that is the stretch
    where the aperture shrinks monotonically.  An explicit ``phi_upper`` is
    verified by dense sampling and rejected with :class:`NotMonotone` if the
    aperture does not shrink throughout.
    """
    if phi_upper is None:
        phi_upper = monotone_aperture_limit(params, gparams)
    else:
        if not 0 < phi_upper <= params.phi_max:
            raise InvalidParams(f"phi_upper must lie in (0, {params.phi_max}], got {phi_upper}")
        radial = np.array([_radial(p, params, gparams) for p in np.linspace(0, phi_upper, PRECHECK_SAMPLES)])
        if np.any(np.diff(radial) >= 0):
            raise NotMonotone(f"fingertip aperture is not strictly decreasing on [0, {phi_upper:.9g}] rad")

    radius = obj.characteristic_radius
    open_r = _radial(0.0, params, gparams)
    closed_r = _radial(phi_upper, params, gparams)
    if radius > open_r:
        raise NoClosure(f"object radius {radius:.9g} m exceeds open aperture {open_r:.9g} m")
    if radius < closed_r:
        raise NoClosure(
            f"object radius {radius:.9g} m below tightest aperture {closed_r:.9g} m reached at phi={phi_upper:.9g}"
        )
    lo, hi = 0.0, phi_upper
    while hi - lo > CLOSURE_PHI_TOL:
        mid = 0.5 * (lo + hi)
        if _radial(mid, params, gparams) > radius:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def plan_grasp(
    grid: CalibrationGrid,
    obj: GraspObject,
    stiffness: Optional[float] = None,
    p1: Optional[float] = None,
    params: FingerParams = FingerParams(),
    gparams: GripperParams = GripperParams(),
    clamp: bool = False,
) -> GraspPlan:
    """Close on ``obj`` and pick pressures for either a stiffness or a P1 target."""
    if (stiffness is None) == (p1 is None):
        raise InvalidParams("give exactly one of stiffness or p1")
    phi = closure_phi(obj, params, gparams)
    try:
        if stiffness is not None:
            command = inverse_command(grid, phi, stiffness, clamp=clamp)
            k = stiffness_from_target(grid, phi, command.p1)
        else:
            command = PressureCommand(p1=p1, p2=command_from_target(grid, phi, p1, clamp=clamp))
            k = stiffness_from_target(grid, phi, p1, clamp=clamp)
    except OutOfHull as exc:
        raise OutOfHull(f"{obj.shape} closes at phi={phi:.9g} rad: {exc}", band=exc.band) from None
    return GraspPlan(
        phi=phi,
        stiffness=k,
        command=command,
        aperture=_radial(phi, params, gparams),
    )
