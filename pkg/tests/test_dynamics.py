import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decsim import dynamics
from decsim.dynamics import (
    JointTorques,
    PlantState,
    SimulationDiverged,
    bias_torque,
    com_position,
    gravity_torque,
    kernel_params,
    mass_matrix,
    passive_torque,
    step,
    total_energy,
)
from decsim.model import JointParams

ANGLES = st.floats(min_value=-1.2, max_value=1.2, allow_nan=False)
RATES = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
VEC3 = st.tuples(ANGLES, ANGLES, ANGLES)
RATE3 = st.tuples(RATES, RATES, RATES)


def _potential(model, q):
    """Independent oracle: -g * sum_i m_i * (y_i(q) - y_i(0)) via kinematics."""
    th = np.cumsum(np.asarray(q, dtype=float))
    y = 0.0
    joint_y = 0.0
    for i, seg in enumerate(model.segments):
        y += seg.mass * (joint_y + seg.com_offset * np.cos(th[i]))
        joint_y += seg.length * np.cos(th[i])
    upright = sum(
        s.mass * (sum(t.length for t in model.segments[:i]) + s.com_offset)
        for i, s in enumerate(model.segments)
    )
    return model.gravity * (y - upright)


class TestMassMatrix:
    def test_upright_point_mass_value(self, point_mass_body):
        M = mass_matrix(point_mass_body, np.zeros(3))
        # masses at 0.25 / 0.75 / 1.25 m from the ankle:
        # 10*0.25^2 + 10*0.75^2 + 30*1.25^2 = 53.125
        assert M[0, 0] == pytest.approx(53.125, abs=1e-12)

    def test_upright_with_rod_inertia(self, body):
        M = mass_matrix(body, np.zeros(3))
        extra = sum(s.inertia for s in body.segments)
        assert M[0, 0] == pytest.approx(53.125 + extra, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(q=VEC3)
    def test_symmetric_positive_definite(self, body, q):
        M = mass_matrix(body, np.array(q))
        assert np.allclose(M, M.T, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(M) > 0)

    def test_configuration_dependent(self, body):
        M0 = mass_matrix(body, np.zeros(3))
        M1 = mass_matrix(body, np.array([0.0, 1.0, -0.5]))
        assert not np.allclose(M0, M1)


class TestGravity:
    def test_upright_zero(self, body):
        assert np.allclose(gravity_torque(body, np.zeros(3)), 0.0, atol=1e-14)

    def test_small_angle_ankle_matches_mgh(self, body):
        from decsim.model import mgh

        eps = 1e-6
        g = gravity_torque(body, np.array([eps, 0.0, 0.0]))
        assert g[0] / eps == pytest.approx(mgh(body, "ankle"), rel=1e-6)
        assert g[0] / eps == pytest.approx(465.975, rel=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(q=VEC3)
    def test_matches_potential_gradient(self, body, q):
        q = np.array(q)
        g = gravity_torque(body, q)
        h = 1e-6
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = -(_potential(body, q + e) - _potential(body, q - e)) / (2 * h)
            assert g[j] == pytest.approx(fd, abs=1e-6)

    def test_gradient_tight_tolerance_random_states(self, body, rng):
        # central differences at an h tuned for ~1e-9 truncation error
        h = 1e-5
        for _ in range(1000):
            q = rng.uniform(-1.0, 1.0, 3)
            g = gravity_torque(body, q)
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fd = -(_potential(body, q + e) - _potential(body, q - e)) / (2 * h)
                assert abs(g[j] - fd) <= 1e-8 * max(1.0, abs(g[j]))


class TestBias:
    def test_zero_at_rest(self, body, rng):
        for _ in range(20):
            q = rng.uniform(-1.0, 1.0, 3)
            assert np.allclose(bias_torque(body, q, np.zeros(3)), 0.0, atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(q=VEC3, qd=RATE3)
    def test_quadratic_in_velocity(self, body, q, qd):
        q = np.array(q)
        qd = np.array(qd)
        b1 = bias_torque(body, q, qd)
        b2 = bias_torque(body, q, 2.0 * qd)
        assert np.allclose(b2, 4.0 * b1, atol=1e-9, rtol=1e-9)

    def test_matches_lagrangian_finite_difference(self, body, rng):
        # bias = d/dt(M qdot) - M qddot - (d/dq of kinetic energy), checked as
        # M(q) qddot + b(q, qdot) - g(q) = tau along a torque-consistent path:
        # integrate freely and verify the residual of the EoM by differencing
        # the velocity history.
        dt = 1e-6
        state = PlantState(q=rng.uniform(-0.3, 0.3, 3), qdot=rng.uniform(-1, 1, 3))
        tau = JointTorques(rng.uniform(-5, 5, 3))
        before = step(body, state, tau, dt)
        after = step(body, before, tau, dt)
        qdd = (after.qdot - state.qdot) / (2 * dt)
        M = mass_matrix(body, before.q)
        resid = (
            M @ qdd
            + bias_torque(body, before.q, before.qdot)
            - gravity_torque(body, before.q)
            - tau.tau
        )
        assert np.allclose(resid, 0.0, atol=1e-5)


class TestPassive:
    def test_default_body_has_none(self, body, rng):
        q = rng.uniform(-1, 1, 3)
        qd = rng.uniform(-1, 1, 3)
        assert np.allclose(passive_torque(body, q, qd), 0.0)

    def test_spring_damper_signs(self, body):
        joints = tuple(
            dataclasses.replace(j, passive_stiffness=2.0, passive_damping=0.5)
            for j in body.joints
        )
        m = dataclasses.replace(body, joints=joints)
        tau = passive_torque(m, np.array([0.1, -0.2, 0.0]), np.array([1.0, 0.0, -2.0]))
        assert tau[0] == pytest.approx(-2.0 * 0.1 - 0.5 * 1.0)
        assert tau[1] == pytest.approx(2.0 * 0.2)
        assert tau[2] == pytest.approx(0.5 * 2.0)


class TestEnergy:
    def test_upright_rest_zero(self, body):
        assert total_energy(body, PlantState(np.zeros(3), np.zeros(3))) == pytest.approx(0.0, abs=1e-14)

    def test_kinetic_upright_point_mass(self, point_mass_body):
        # E = 0.5 * qdot^T M qdot with qdot = (1, 0, 0): half of M[0,0]
        s = PlantState(np.zeros(3), np.array([1.0, 0.0, 0.0]))
        assert total_energy(point_mass_body, s) == pytest.approx(0.5 * 53.125, abs=1e-12)

    def test_potential_drop_when_leaning(self, body):
        e = total_energy(body, PlantState(np.array([0.3, 0.0, 0.0]), np.zeros(3)))
        # rigid lean: whole CoM at 0.95 m drops by 0.95*(1-cos 0.3)
        assert e == pytest.approx(-50 * 9.81 * 0.95 * (1 - np.cos(0.3)), rel=1e-12)

    def test_conservation_torque_free(self, body):
        # free swing without the control-regime |q| < pi/2 guard: the chain
        # falls and tumbles, so run the kernel directly for a full second
        from decsim.kernels import core

        p = kernel_params(body)
        q = np.array([0.05, -0.03, 0.04])
        qd = np.zeros(3)
        tau = np.zeros(3)
        e0 = core.energy(p.a, p.mu, p.g, q, qd)
        for _ in range(10000):  # 1 s at dt = 1e-4
            q, qd = core.rk4_step(p.a, p.mu, p.g, p.kp_pass, p.kd_pass, q, qd, tau, 1e-4)
        e1 = core.energy(p.a, p.mu, p.g, q, qd)
        assert abs(e1 - e0) / max(1.0, abs(e0), abs(e1)) <= 1e-6


class TestIntegration:
    def test_equilibrium_is_fixed_point(self, body):
        state = PlantState(np.zeros(3), np.zeros(3))
        out = step(body, state, JointTorques(np.zeros(3)), 1e-3)
        assert np.allclose(out.q, 0.0, atol=1e-15)
        assert np.allclose(out.qdot, 0.0, atol=1e-15)
        assert out.t == pytest.approx(1e-3)

    def test_rk4_order(self, body):
        # integrate 0.02 s at three resolutions; RK4 halving the step should
        # shrink the error by ~16x
        def run(dt):
            state = PlantState(q=np.array([0.1, -0.05, 0.08]), qdot=np.array([0.2, 0.1, -0.3]))
            tau = JointTorques(np.array([1.0, -0.5, 0.25]))
            n = int(round(0.02 / dt))
            for _ in range(n):
                state = step(body, state, tau, dt)
            return np.concatenate([state.q, state.qdot])

        ref = run(1e-5)
        err_coarse = np.linalg.norm(run(4e-3) - ref)
        err_fine = np.linalg.norm(run(2e-3) - ref)
        ratio = err_coarse / err_fine
        assert 10.0 < ratio < 25.0

    def test_deterministic_bitwise(self, body):
        def run():
            state = PlantState(q=np.array([0.05, -0.1, 0.08]), qdot=np.zeros(3))
            tau = JointTorques(np.array([0.5, 0.2, -0.2]))
            for _ in range(200):
                state = step(body, state, tau, 1e-3)
            return state

        a, b = run(), run()
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.qdot, b.qdot)

    def test_divergence_raises(self, body):
        state = PlantState(q=np.array([1.5, 0.0, 0.0]), qdot=np.array([3.0, 0.0, 0.0]))
        with pytest.raises(SimulationDiverged):
            for _ in range(200):
                state = step(body, state, JointTorques(np.zeros(3)), 1e-2)

    def test_bad_dt(self, body):
        with pytest.raises(ValueError):
            step(body, PlantState(np.zeros(3), np.zeros(3)), JointTorques(np.zeros(3)), 0.0)


class TestComPosition:
    def test_upright(self, body):
        com = com_position(body, np.zeros(3))
        assert com[0] == pytest.approx(0.0, abs=1e-15)
        assert com[1] == pytest.approx(0.95)

    def test_rigid_lean(self, body):
        com = com_position(body, np.array([0.2, 0.0, 0.0]))
        assert com[0] == pytest.approx(0.95 * np.sin(0.2))
        assert com[1] == pytest.approx(0.95 * np.cos(0.2))

    def test_matches_mu_coefficients(self, body, rng):
        # kernel gravity coefficients and forward kinematics must agree:
        # com_x = (mu . sin(theta)) / total mass
        p = kernel_params(body)
        for _ in range(50):
            q = rng.uniform(-1.0, 1.0, 3)
            th = np.cumsum(q)
            com = com_position(body, q)
            assert com[0] == pytest.approx(float(p.mu @ np.sin(th)) / p.total_mass, abs=1e-12)
            assert com[1] == pytest.approx(float(p.mu @ np.cos(th)) / p.total_mass, abs=1e-12)


class TestStateValidation:
    def test_bad_shapes(self):
        with pytest.raises(ValueError):
            PlantState(np.zeros(2), np.zeros(3))
        with pytest.raises(ValueError):
            JointTorques(np.zeros(4))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            PlantState(np.array([np.nan, 0, 0]), np.zeros(3))
        with pytest.raises(ValueError):
            JointTorques(np.array([np.inf, 0, 0]))
