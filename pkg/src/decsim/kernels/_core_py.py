"""Pure-numpy dynamics kernels for the planar 3-link point-mass chain.

Coordinates: joint angles q (ankle, knee, hip), 0 = upright, positive =
forward lean of the distal segment relative to the proximal one. Absolute
segment angles are theta = cumsum(q).

The chain is parameterized by two precomputed arrays (see
``dynamics.KernelParams``):

- ``a``: 3x3 symmetric, a[j,k] = sum_i m_i * r_ij * r_ik, where r_ij is the
  lever of absolute angle j in the position of point mass i;
- ``mu``: mu[j] = sum_i m_i * r_ij (first moment per absolute angle).

With those, in absolute angles the inertia matrix is
A[j,k] = a[j,k]*cos(theta_j - theta_k), the centrifugal vector is
b[j] = sum_k a[j,k]*sin(theta_j - theta_k)*thetadot_k**2, and gravity
exerts g*mu[j]*sin(theta_j). Joint-coordinate quantities follow through
theta = T q with T lower-triangular ones.
"""

from __future__ import annotations

import numpy as np

_T = np.tril(np.ones((3, 3)))


def mass_matrix(a, q):
    """Joint-space inertia matrix, 3x3 symmetric positive definite."""
    th = np.cumsum(q)
    A = a * np.cos(th[:, None] - th[None, :])
    return _T.T @ A @ _T


def gravity_vec(mu, g, q):
    """Generalized torque exerted by gravity per joint (destabilizing)."""
    th = np.cumsum(q)
    return _T.T @ (g * mu * np.sin(th))


def bias_vec(a, q, qdot):
    """Velocity-dependent (centrifugal/Coriolis) generalized forces."""
    th = np.cumsum(q)
    thd = np.cumsum(qdot)
    b = (a * np.sin(th[:, None] - th[None, :])) @ (thd * thd)
    return _T.T @ b


def energy(a, mu, g, q, qdot):
    """Kinetic plus gravitational potential energy; potential 0 at upright."""
    th = np.cumsum(q)
    thd = np.cumsum(qdot)
    A = a * np.cos(th[:, None] - th[None, :])
    kin = 0.5 * thd @ A @ thd
    pot = g * float(mu @ (np.cos(th) - 1.0))
    return float(kin + pot)


def accel(a, mu, g, kp_pass, kd_pass, q, qdot, tau):
    """Joint accelerations under applied torque, passive terms, gravity."""
    rhs = tau - kp_pass * q - kd_pass * qdot + gravity_vec(mu, g, q) - bias_vec(a, q, qdot)
    return np.linalg.solve(mass_matrix(a, q), rhs)


def rk4_step(a, mu, g, kp_pass, kd_pass, q, qdot, tau, dt):
    """One classical RK4 step with zero-order-hold torque. Returns (q, qdot)."""
    k1q = qdot
    k1v = accel(a, mu, g, kp_pass, kd_pass, q, qdot, tau)
    k2q = qdot + 0.5 * dt * k1v
    k2v = accel(a, mu, g, kp_pass, kd_pass, q + 0.5 * dt * k1q, k2q, tau)
    k3q = qdot + 0.5 * dt * k2v
    k3v = accel(a, mu, g, kp_pass, kd_pass, q + 0.5 * dt * k2q, k3q, tau)
    k4q = qdot + dt * k3v
    k4v = accel(a, mu, g, kp_pass, kd_pass, q + dt * k3q, k4q, tau)
    q_new = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    v_new = qdot + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return q_new, v_new
