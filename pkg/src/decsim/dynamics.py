"""Rigid-body dynamics of the planar triple inverted pendulum.

Equations of motion come from the Lagrangian of three point masses on
massless links, each optionally carrying a rotational inertia about its
CoM (see ``kernels._core_py`` for the closed form). The plant is
advanced with a fixed-step classical RK4 integrator; the applied joint
torque is held constant over each step.

Sign convention: positive joint angle = forward lean of the distal segment
relative to the proximal one; upright is q = 0 and is an unstable
equilibrium (gravity destabilizes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import backend_name, core
from .model import BodyModel

MAX_ANGLE = np.pi / 2  # rad; beyond this the linear-control regime is void


class SimulationDiverged(RuntimeError):
    """Raised when a joint angle leaves the valid |q| < pi/2 range."""


@dataclass(frozen=True)
class PlantState:
    """Joint-space state of the pendulum plus the simulation clock."""

    q: np.ndarray     # rad, (ankle, knee, hip)
    qdot: np.ndarray  # rad/s
    t: float = 0.0    # s

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "qdot", np.asarray(self.qdot, dtype=float))
        if self.q.shape != (3,) or self.qdot.shape != (3,):
            raise ValueError("q and qdot must be 3-vectors")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qdot))):
            raise ValueError("non-finite plant state")


@dataclass(frozen=True)
class JointTorques:
    """Applied joint torques (ankle, knee, hip)."""

    tau: np.ndarray  # N*m

    def __post_init__(self):
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        if self.tau.shape != (3,):
            raise ValueError("tau must be a 3-vector")
        if not np.all(np.isfinite(self.tau)):
            raise ValueError("non-finite torque")


class KernelParams:
    """Precomputed chain coefficients consumed by the dynamics kernels.

    ``a[j,k] = sum_i m_i r_ij r_ik`` and ``mu[j] = sum_i m_i r_ij`` where
    r_ij is the lever of absolute segment angle j in the position of point
    mass i (full link length below the mass's segment, CoM offset on it).
    """

    def __init__(self, model: BodyModel):
        r = np.zeros((3, 3))
        m = np.array([s.mass for s in model.segments])
        for i, seg in enumerate(model.segments):
            for j in range(i):
                r[i, j] = model.segments[j].length
            r[i, i] = seg.com_offset
        # segment rotational inertia rides on the absolute segment angle
        J = np.diag([s.inertia for s in model.segments])
        self.a = np.ascontiguousarray((r.T * m) @ r + J)
        self.mu = np.ascontiguousarray(m @ r)
        self.g = float(model.gravity)
        self.kp_pass = np.ascontiguousarray(
            [j.passive_stiffness for j in model.joints], dtype=float
        )
        self.kd_pass = np.ascontiguousarray(
            [j.passive_damping for j in model.joints], dtype=float
        )
        self.total_mass = float(m.sum())


_cache: dict[BodyModel, KernelParams] = {}


def kernel_params(model: BodyModel) -> KernelParams:
    kp = _cache.get(model)
    if kp is None:
        kp = _cache[model] = KernelParams(model)
    return kp


def _arr(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=float)


def mass_matrix(model: BodyModel, q) -> np.ndarray:
    """Joint-space inertia matrix (kg*m^2), symmetric positive definite."""
    p = kernel_params(model)
    return core.mass_matrix(p.a, _arr(q))


def gravity_torque(model: BodyModel, q) -> np.ndarray:
    """Generalized torque exerted by gravity per joint (N*m)."""
    p = kernel_params(model)
    return core.gravity_vec(p.mu, p.g, _arr(q))


def bias_torque(model: BodyModel, q, qdot) -> np.ndarray:
    """Velocity-dependent generalized forces (N*m); zero at rest."""
    p = kernel_params(model)
    return core.bias_vec(p.a, _arr(q), _arr(qdot))


def passive_torque(model: BodyModel, q, qdot) -> np.ndarray:
    """Passive joint stiffness/damping torque: -kp*q - kd*qdot per joint."""
    p = kernel_params(model)
    return -p.kp_pass * _arr(q) - p.kd_pass * _arr(qdot)


def total_energy(model: BodyModel, state: PlantState) -> float:
    """Kinetic + gravitational potential energy (J), potential 0 at upright."""
    p = kernel_params(model)
    return core.energy(p.a, p.mu, p.g, _arr(state.q), _arr(state.qdot))


def com_position(model: BodyModel, q) -> np.ndarray:
    """Whole-body CoM in the sagittal plane relative to the ankle (x, y), m.

    Computed by explicit forward kinematics over the segments (kept
    independent of the kernel coefficient arrays for cross-checking).
    """
    q = _arr(q)
    th = np.cumsum(q)
    joint = np.zeros(2)
    weighted = np.zeros(2)
    total = 0.0
    for i, seg in enumerate(model.segments):
        u = np.array([np.sin(th[i]), np.cos(th[i])])
        weighted += seg.mass * (joint + seg.com_offset * u)
        total += seg.mass
        joint = joint + seg.length * u
    return weighted / total


def step(model: BodyModel, state: PlantState, tau: JointTorques, dt: float) -> PlantState:
    """Advance the plant by one RK4 step of length dt under constant torque."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    p = kernel_params(model)
    q_new, v_new = core.rk4_step(
        p.a, p.mu, p.g, p.kp_pass, p.kd_pass,
        _arr(state.q), _arr(state.qdot), _arr(tau.tau), dt,
    )
    if not np.all(np.abs(q_new) < MAX_ANGLE):
        raise SimulationDiverged(
            f"joint angle left |q| < pi/2 at t = {state.t + dt:.4f} s: q = {q_new}"
        )
    return PlantState(q=q_new, qdot=v_new, t=state.t + dt)


__all__ = [
    "PlantState",
    "JointTorques",
    "SimulationDiverged",
    "backend_name",
    "mass_matrix",
    "gravity_torque",
    "bias_torque",
    "passive_torque",
    "total_energy",
    "com_position",
    "step",
    "kernel_params",
]
