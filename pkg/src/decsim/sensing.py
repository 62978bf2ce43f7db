"""Simulated local sensors and down-channel CoM aggregation.

Each control module owns only local information: its joint encoder, its
segment's parameters, and (hip only) the trunk IMU. Whole-chain quantities
such as the body-in-space sway BS are reconstructed bottom of the chain by
recursively merging CoM aggregates passed down hip -> knee -> ankle.

Sensors are noiseless: segment positions and velocities are known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import PlantState
from .model import BodyModel, UnknownJointError, joint_index

MODULE_IDS = ("ankle", "knee", "hip")


@dataclass(frozen=True)
class SegmentAngles:
    """Segment orientations in space relative to the gravitational vertical."""

    SS: float   # shank
    THS: float  # thigh
    TS: float   # trunk


def segment_angles(plant: PlantState) -> SegmentAngles:
    q = plant.q
    return SegmentAngles(SS=float(q[0]), THS=float(q[0] + q[1]), TS=float(q[0] + q[1] + q[2]))


@dataclass(frozen=True)
class DownChannelMsg:
    """CoM aggregate a module passes to the module below it.

    ``com_position`` is the aggregate CoM of the sender's supported chain,
    relative to the sender's joint, in the gravity-aligned world frame.
    ``link_orientation`` is the orientation in space of the body segment
    joining the sender's joint to the receiver's joint, which the sender
    derives from its own link orientation and joint encoder.
    """

    sender: str
    aggregate_mass: float          # kg
    com_position: np.ndarray       # m, (x, y) relative to sender's joint
    link_orientation: float        # rad

    def __post_init__(self):
        object.__setattr__(self, "com_position", np.asarray(self.com_position, dtype=float))
        if self.aggregate_mass <= 0:
            raise ValueError("aggregate_mass must be > 0")
        if not (np.all(np.isfinite(self.com_position)) and math.isfinite(self.link_orientation)):
            raise ValueError("non-finite down-channel message")


@dataclass(frozen=True)
class ControlledVariables:
    """A module's controlled variable and the CoM sway angle about its joint."""

    alpha: float      # rad: BS for ankle, knee angle for knee, TS for hip
    alpha_com: float  # rad: sway of all supported mass about the module's joint


class MissingUpstreamMessage(RuntimeError):
    """Knee/ankle modules require the message from the module above."""


def read_encoder(plant: PlantState, joint: str) -> float:
    """Exact joint angle from the module's own encoder."""
    return float(plant.q[joint_index(joint)])


def read_imu_trunk(plant: PlantState) -> float:
    """Exact trunk-in-space orientation from the trunk IMU."""
    return float(plant.q[0] + plant.q[1] + plant.q[2])


def _unit(angle: float) -> np.ndarray:
    return np.array([math.sin(angle), math.cos(angle)])


def build_down_channel(
    plant: PlantState,
    model: BodyModel,
    module: str,
    received: DownChannelMsg | None = None,
) -> DownChannelMsg:
    """Recursive CoM aggregation step for one module.

    The hip seeds the recursion from the trunk IMU; knee and ankle merge
    their own segment's point mass with the re-expressed upstream aggregate.
    Only local sensors and local segment parameters are used.
    """
    if module == "hip":
        ts = read_imu_trunk(plant)
        trunk = model.segment("trunk")
        com = trunk.com_offset * _unit(ts)
        return DownChannelMsg(
            sender="hip",
            aggregate_mass=trunk.mass,
            com_position=com,
            link_orientation=ts - read_encoder(plant, "hip"),
        )
    if module not in ("knee", "ankle"):
        raise UnknownJointError(module)
    if received is None:
        raise MissingUpstreamMessage(f"{module} module expects a message from above")
    seg_name = "thigh" if module == "knee" else "shank"
    seg = model.segment(seg_name)
    link_angle = received.link_orientation  # this module's supported link, in space
    upper_joint = seg.length * _unit(link_angle)
    own_com = seg.com_offset * _unit(link_angle)
    mass = seg.mass + received.aggregate_mass
    com = (
        seg.mass * own_com
        + received.aggregate_mass * (upper_joint + received.com_position)
    ) / mass
    return DownChannelMsg(
        sender=module,
        aggregate_mass=mass,
        com_position=com,
        link_orientation=link_angle - read_encoder(plant, module),
    )


def com_sway_angle(msg: DownChannelMsg) -> float:
    """Sway of an aggregate CoM about the owning joint, from the vertical."""
    x, y = msg.com_position
    return math.atan2(x, y)


def controlled_variables(
    module: str,
    plant: PlantState,
    model: BodyModel,
    received: DownChannelMsg | None = None,
) -> ControlledVariables:
    """Reconstruct a module's controlled variable alpha and its CoM sway.

    ``received`` is the down-channel message from the module above (ignored
    for the hip, which tops the chain).
    """
    own = build_down_channel(plant, model, module, received)
    alpha_com = com_sway_angle(own)
    if module == "ankle":
        alpha = alpha_com  # BS: whole-body CoM sway about the ankle
    elif module == "knee":
        alpha = read_encoder(plant, "knee")
    else:
        alpha = read_imu_trunk(plant)
    return ControlledVariables(alpha=alpha, alpha_com=alpha_com)
