# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamics kernels for the planar 3-link point-mass chain.

Same semantics as ``_core_py``; see that module for the derivation and
parameter layout. Hand-unrolled for the fixed chain length of 3.
"""

from libc.math cimport sin, cos

import numpy as np


cdef void _theta(double[::1] q, double* th) noexcept:
    th[0] = q[0]
    th[1] = q[0] + q[1]
    th[2] = q[0] + q[1] + q[2]


cdef void _mass_matrix(double[:, ::1] a, double* th, double M[3][3]) noexcept:
    # A[j,k] = a[j,k]*cos(th_j - th_k); M = T^T A T with T lower-tri ones,
    # i.e. M[p,r] = sum over j>=p, k>=r of A[j,k].
    cdef double A[3][3]
    cdef int j, k, p, r
    cdef double s
    for j in range(3):
        for k in range(3):
            A[j][k] = a[j, k] * cos(th[j] - th[k])
    for p in range(3):
        for r in range(3):
            s = 0.0
            for j in range(p, 3):
                for k in range(r, 3):
                    s += A[j][k]
            M[p][r] = s


cdef void _gravity(double[::1] mu, double g, double* th, double* out) noexcept:
    cdef double gth[3]
    cdef int j
    for j in range(3):
        gth[j] = g * mu[j] * sin(th[j])
    out[2] = gth[2]
    out[1] = gth[1] + gth[2]
    out[0] = gth[0] + gth[1] + gth[2]


cdef void _bias(double[:, ::1] a, double* th, double* thd, double* out) noexcept:
    cdef double b[3]
    cdef int j, k
    for j in range(3):
        b[j] = 0.0
        for k in range(3):
            b[j] += a[j, k] * sin(th[j] - th[k]) * thd[k] * thd[k]
    out[2] = b[2]
    out[1] = b[1] + b[2]
    out[0] = b[0] + b[1] + b[2]


cdef int _solve3(double M[3][3], double* rhs, double* x) except -1:
    # Gaussian elimination with partial pivoting on a copy of M.
    cdef double A[3][4]
    cdef int i, j, p, piv
    cdef double mx, f, t
    for i in range(3):
        for j in range(3):
            A[i][j] = M[i][j]
        A[i][3] = rhs[i]
    for p in range(3):
        piv = p
        mx = A[p][p] if A[p][p] >= 0 else -A[p][p]
        for i in range(p + 1, 3):
            f = A[i][p] if A[i][p] >= 0 else -A[i][p]
            if f > mx:
                mx = f
                piv = i
        if mx == 0.0:
            raise ZeroDivisionError("singular mass matrix")
        if piv != p:
            for j in range(4):
                t = A[p][j]
                A[p][j] = A[piv][j]
                A[piv][j] = t
        for i in range(p + 1, 3):
            f = A[i][p] / A[p][p]
            for j in range(p, 4):
                A[i][j] -= f * A[p][j]
    for i in range(2, -1, -1):
        t = A[i][3]
        for j in range(i + 1, 3):
            t -= A[i][j] * x[j]
        x[i] = t / A[i][i]
    return 0


cdef void _accel(double[:, ::1] a, double[::1] mu, double g,
                 double[::1] kp_pass, double[::1] kd_pass,
                 double* q, double* qdot, double[::1] tau, double* qdd):
    cdef double th[3]
    cdef double thd[3]
    cdef double grav[3]
    cdef double bias[3]
    cdef double M[3][3]
    cdef double rhs[3]
    cdef int i
    th[0] = q[0]; th[1] = q[0] + q[1]; th[2] = q[0] + q[1] + q[2]
    thd[0] = qdot[0]; thd[1] = qdot[0] + qdot[1]; thd[2] = qdot[0] + qdot[1] + qdot[2]
    _mass_matrix(a, th, M)
    _gravity(mu, g, th, grav)
    _bias(a, th, thd, bias)
    for i in range(3):
        rhs[i] = tau[i] - kp_pass[i] * q[i] - kd_pass[i] * qdot[i] + grav[i] - bias[i]
    _solve3(M, rhs, qdd)


def mass_matrix(double[:, ::1] a, double[::1] q):
    """Joint-space inertia matrix, 3x3 symmetric positive definite."""
    cdef double th[3]
    cdef double M[3][3]
    _theta(q, th)
    _mass_matrix(a, th, M)
    out = np.empty((3, 3))
    cdef double[:, ::1] ov = out
    cdef int i, j
    for i in range(3):
        for j in range(3):
            ov[i, j] = M[i][j]
    return out


def gravity_vec(double[::1] mu, double g, double[::1] q):
    """Generalized torque exerted by gravity per joint (destabilizing)."""
    cdef double th[3]
    cdef double gq[3]
    _theta(q, th)
    _gravity(mu, g, th, gq)
    return np.array([gq[0], gq[1], gq[2]])


def bias_vec(double[:, ::1] a, double[::1] q, double[::1] qdot):
    """Velocity-dependent (centrifugal/Coriolis) generalized forces."""
    cdef double th[3]
    cdef double thd[3]
    cdef double b[3]
    _theta(q, th)
    _theta(qdot, thd)
    _bias(a, th, thd, b)
    return np.array([b[0], b[1], b[2]])


def energy(double[:, ::1] a, double[::1] mu, double g,
           double[::1] q, double[::1] qdot):
    """Kinetic plus gravitational potential energy; potential 0 at upright."""
    cdef double th[3]
    cdef double thd[3]
    cdef int j, k
    cdef double kin = 0.0
    cdef double pot = 0.0
    _theta(q, th)
    _theta(qdot, thd)
    # kinetic energy in absolute angles: 0.5 * thd^T A thd
    cdef double A[3][3]
    for j in range(3):
        for k in range(3):
            A[j][k] = a[j, k] * cos(th[j] - th[k])
    for j in range(3):
        for k in range(3):
            kin += 0.5 * thd[j] * A[j][k] * thd[k]
    for j in range(3):
        pot += g * mu[j] * (cos(th[j]) - 1.0)
    return kin + pot


def accel(double[:, ::1] a, double[::1] mu, double g,
          double[::1] kp_pass, double[::1] kd_pass,
          double[::1] q, double[::1] qdot, double[::1] tau):
    """Joint accelerations under applied torque, passive terms, gravity."""
    cdef double qq[3]
    cdef double vv[3]
    cdef double qdd[3]
    cdef int i
    for i in range(3):
        qq[i] = q[i]
        vv[i] = qdot[i]
    _accel(a, mu, g, kp_pass, kd_pass, qq, vv, tau, qdd)
    return np.array([qdd[0], qdd[1], qdd[2]])


def rk4_step(double[:, ::1] a, double[::1] mu, double g,
             double[::1] kp_pass, double[::1] kd_pass,
             double[::1] q, double[::1] qdot, double[::1] tau, double dt):
    """One classical RK4 step with zero-order-hold torque. Returns (q, qdot)."""
    cdef double q0[3]
    cdef double v0[3]
    cdef double qt[3]
    cdef double vt[3]
    cdef double k1v[3]
    cdef double k2v[3]
    cdef double k3v[3]
    cdef double k4v[3]
    cdef double k1q[3]
    cdef double k2q[3]
    cdef double k3q[3]
    cdef double k4q[3]
    cdef int i
    for i in range(3):
        q0[i] = q[i]
        v0[i] = qdot[i]
    # k1
    for i in range(3):
        k1q[i] = v0[i]
    _accel(a, mu, g, kp_pass, kd_pass, q0, v0, tau, k1v)
    # k2
    for i in range(3):
        qt[i] = q0[i] + 0.5 * dt * k1q[i]
        vt[i] = v0[i] + 0.5 * dt * k1v[i]
        k2q[i] = vt[i]
    _accel(a, mu, g, kp_pass, kd_pass, qt, vt, tau, k2v)
    # k3
    for i in range(3):
        qt[i] = q0[i] + 0.5 * dt * k2q[i]
        vt[i] = v0[i] + 0.5 * dt * k2v[i]
        k3q[i] = vt[i]
    _accel(a, mu, g, kp_pass, kd_pass, qt, vt, tau, k3v)
    # k4
    for i in range(3):
        qt[i] = q0[i] + dt * k3q[i]
        vt[i] = v0[i] + dt * k3v[i]
        k4q[i] = vt[i]
    _accel(a, mu, g, kp_pass, kd_pass, qt, vt, tau, k4v)
    q_new = np.empty(3)
    v_new = np.empty(3)
    cdef double[::1] qn = q_new
    cdef double[::1] vn = v_new
    for i in range(3):
        qn[i] = q0[i] + (dt / 6.0) * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i])
        vn[i] = v0[i] + (dt / 6.0) * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])
    return q_new, v_new
