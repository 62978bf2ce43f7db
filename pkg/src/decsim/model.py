"""Anthropometric body model and derived control gains.

The body is a planar chain of three segments (shank, thigh, trunk, bottom-up)
actuated at three joints (ankle, knee, hip). Each segment is treated as a
point mass located at its center-of-mass offset on a massless link. All
quantities are SI.
"""

from __future__ import annotations

from dataclasses import dataclass

SEGMENT_NAMES = ("shank", "thigh", "trunk")
JOINT_NAMES = ("ankle", "knee", "hip")

STANDARD_GRAVITY = 9.81


class UnknownJointError(KeyError):
    """Raised when a joint id is not one of ankle/knee/hip."""


def joint_index(joint: str) -> int:
    try:
        return JOINT_NAMES.index(joint)
    except ValueError:
        raise UnknownJointError(joint) from None


@dataclass(frozen=True)
class SegmentParams:
    """One body segment: a point mass at the CoM offset on a massless link,
    plus a rotational inertia about the CoM.

    ``inertia = 0`` gives the pure point-mass chain, which is analytically
    convenient but leaves some differential joint motions almost
    inertia-free; a physical body needs a nonzero value for the delayed
    control loops to be well posed.
    """

    name: str
    mass: float        # kg
    length: float      # m
    com_offset: float  # m, distance from the lower joint to the segment CoM
    inertia: float = 0.0  # kg*m^2, about the segment CoM

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"segment {self.name}: mass must be > 0")
        if self.length <= 0:
            raise ValueError(f"segment {self.name}: length must be > 0")
        if not (0.0 <= self.com_offset <= self.length):
            raise ValueError(f"segment {self.name}: com_offset outside [0, length]")
        if self.inertia < 0:
            raise ValueError(f"segment {self.name}: inertia must be >= 0")

    @property
    def rod_inertia(self) -> float:
        """Uniform thin-rod inertia about the CoM for this mass and length."""
        return self.mass * self.length**2 / 12.0


@dataclass(frozen=True)
class JointParams:
    """Control gains and loop properties of one joint's controller."""

    name: str
    Kp: float                      # N*m/rad
    Kd: float                      # N*m*s/rad
    Ki: float = 0.0                # N*m/(rad*s), servo integral gain
    passive_stiffness: float = 0.0  # N*m/rad
    passive_damping: float = 0.0    # N*m*s/rad
    G_servo: float = 1.0
    G_g: float = 1.0
    lumped_delay: float = 0.0      # s, transport delay on the command path

    def __post_init__(self):
        if self.Kp <= 0:
            raise ValueError(f"joint {self.name}: Kp must be > 0")
        for attr in ("Kd", "Ki", "passive_stiffness", "passive_damping", "lumped_delay"):
            if getattr(self, attr) < 0:
                raise ValueError(f"joint {self.name}: {attr} must be >= 0")


@dataclass(frozen=True)
class BodyModel:
    """Full sagittal-plane body: 3 segments, 3 joints, gravity."""

    segments: tuple[SegmentParams, SegmentParams, SegmentParams]
    joints: tuple[JointParams, JointParams, JointParams]
    gravity: float = STANDARD_GRAVITY

    def __post_init__(self):
        if len(self.segments) != 3 or len(self.joints) != 3:
            raise ValueError("BodyModel requires exactly 3 segments and 3 joints")
        names_s = tuple(s.name for s in self.segments)
        names_j = tuple(j.name for j in self.joints)
        if names_s != SEGMENT_NAMES or names_j != JOINT_NAMES:
            raise ValueError(
                f"expected segments {SEGMENT_NAMES} and joints {JOINT_NAMES}, "
                f"got {names_s} / {names_j}"
            )
        if self.gravity <= 0:
            raise ValueError("gravity must be > 0")

    def segment(self, name: str) -> SegmentParams:
        return self.segments[SEGMENT_NAMES.index(name)]

    def joint(self, name: str) -> JointParams:
        return self.joints[joint_index(name)]


def default_body_model() -> BodyModel:
    """Reference anthropometrics and gains for the 3-DoF balancing scenario.

    Segment rotational inertia defaults to the uniform thin-rod value
    m*L^2/12; without it the 10 ms command delay destabilizes the
    near-inertia-free differential knee/hip motion of the chain.
    """
    segments = (
        SegmentParams("shank", mass=10.0, length=0.5, com_offset=0.25,
                      inertia=10.0 * 0.5**2 / 12.0),
        SegmentParams("thigh", mass=10.0, length=0.5, com_offset=0.25,
                      inertia=10.0 * 0.5**2 / 12.0),
        SegmentParams("trunk", mass=30.0, length=0.5, com_offset=0.25,
                      inertia=30.0 * 0.5**2 / 12.0),
    )
    joints = (
        JointParams("ankle", Kp=465.98, Kd=116.49, lumped_delay=0.010),
        JointParams("knee", Kp=220.72, Kd=16.55, lumped_delay=0.010),
        JointParams("hip", Kp=73.57, Kd=18.394, lumped_delay=0.010),
    )
    return BodyModel(segments=segments, joints=joints, gravity=STANDARD_GRAVITY)


def supported_mass(model: BodyModel, joint: str) -> float:
    """Total mass carried by a joint (its own segment's chain and everything above)."""
    j = joint_index(joint)
    return sum(s.mass for s in model.segments[j:])


def upright_com_height(model: BodyModel, joint: str) -> float:
    """Mass-weighted CoM height of the supported chain above the joint, upright pose."""
    j = joint_index(joint)
    total = 0.0
    weighted = 0.0
    rise = 0.0  # height of segment i's lower joint above joint j
    for i in range(j, 3):
        seg = model.segments[i]
        total += seg.mass
        weighted += seg.mass * (rise + seg.com_offset)
        rise += seg.length
    return weighted / total


def mgh(model: BodyModel, joint: str) -> float:
    """Gravity-normalizing gain: supported mass * g * upright CoM height."""
    return supported_mass(model, joint) * model.gravity * upright_com_height(model, joint)
