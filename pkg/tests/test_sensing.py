import math

import numpy as np
import pytest

from decsim.dynamics import PlantState, com_position
from decsim.model import UnknownJointError
from decsim.sensing import (
    DownChannelMsg,
    MissingUpstreamMessage,
    build_down_channel,
    com_sway_angle,
    controlled_variables,
    read_encoder,
    read_imu_trunk,
    segment_angles,
)


def _state(q):
    return PlantState(q=np.array(q, dtype=float), qdot=np.zeros(3))


def _chain(plant, model):
    hip = build_down_channel(plant, model, "hip")
    knee = build_down_channel(plant, model, "knee", hip)
    ankle = build_down_channel(plant, model, "ankle", knee)
    return hip, knee, ankle


class TestLocalSensors:
    def test_encoders(self):
        p = _state([0.1, -0.2, 0.3])
        assert read_encoder(p, "ankle") == 0.1
        assert read_encoder(p, "knee") == -0.2
        assert read_encoder(p, "hip") == 0.3

    def test_encoder_unknown_joint(self):
        with pytest.raises(UnknownJointError):
            read_encoder(_state([0, 0, 0]), "wrist")

    def test_imu_is_absolute_trunk_angle(self):
        p = _state([0.1, -0.2, 0.3])
        assert read_imu_trunk(p) == pytest.approx(0.2)

    def test_segment_angles_cumulative(self):
        a = segment_angles(_state([0.1, -0.2, 0.3]))
        assert a.SS == pytest.approx(0.1)
        assert a.THS == pytest.approx(-0.1)
        assert a.TS == pytest.approx(0.2)


class TestDownChannel:
    def test_hip_seed_upright(self, body):
        msg = build_down_channel(_state([0, 0, 0]), body, "hip")
        assert msg.sender == "hip"
        assert msg.aggregate_mass == 30.0
        assert np.allclose(msg.com_position, [0.0, 0.25])
        assert msg.link_orientation == 0.0

    def test_hip_uses_trunk_orientation(self, body):
        p = _state([0.1, -0.2, 0.3])
        msg = build_down_channel(p, body, "hip")
        ts = 0.2
        assert np.allclose(msg.com_position, 0.25 * np.array([math.sin(ts), math.cos(ts)]))
        # orientation of the thigh, derived from the IMU and the hip encoder
        assert msg.link_orientation == pytest.approx(ts - 0.3)

    def test_ankle_aggregate_matches_whole_body_com(self, body, rng):
        # the bottom of the recursion must reproduce the global CoM exactly
        for _ in range(200):
            q = rng.uniform(-1.0, 1.0, 3)
            p = _state(q)
            _, _, ankle = _chain(p, body)
            assert ankle.aggregate_mass == pytest.approx(50.0)
            assert np.allclose(ankle.com_position, com_position(body, q), atol=1e-12)

    def test_knee_aggregate_mass(self, body):
        _, knee, _ = _chain(_state([0.1, 0.2, -0.3]), body)
        assert knee.aggregate_mass == pytest.approx(40.0)

    def test_missing_upstream(self, body):
        with pytest.raises(MissingUpstreamMessage):
            build_down_channel(_state([0, 0, 0]), body, "knee")

    def test_unknown_module(self, body):
        with pytest.raises(UnknownJointError):
            build_down_channel(_state([0, 0, 0]), body, "elbow")

    def test_message_validation(self):
        with pytest.raises(ValueError):
            DownChannelMsg("hip", aggregate_mass=0.0, com_position=[0, 0.2], link_orientation=0.0)
        with pytest.raises(ValueError):
            DownChannelMsg("hip", aggregate_mass=1.0, com_position=[np.nan, 0.2], link_orientation=0.0)


class TestControlledVariables:
    def test_rigid_lean_bs_equals_lean(self, body):
        # all mass on one line: BS = ankle angle exactly
        cv = controlled_variables("ankle", _state([0.2, 0, 0]), body,
                                  _chain(_state([0.2, 0, 0]), body)[1])
        assert cv.alpha == pytest.approx(0.2, abs=1e-12)
        assert cv.alpha_com == cv.alpha

    def test_upright_all_zero(self, body):
        hip, knee, _ = _chain(_state([0, 0, 0]), body)
        for module, received in (("hip", None), ("knee", hip), ("ankle", knee)):
            cv = controlled_variables(module, _state([0, 0, 0]), body, received)
            assert cv.alpha == 0.0
            assert cv.alpha_com == 0.0

    def test_knee_alpha_is_encoder(self, body):
        p = _state([0.1, -0.25, 0.3])
        hip = build_down_channel(p, body, "hip")
        cv = controlled_variables("knee", p, body, hip)
        assert cv.alpha == pytest.approx(-0.25)

    def test_hip_alpha_is_imu(self, body):
        p = _state([0.1, -0.25, 0.3])
        cv = controlled_variables("hip", p, body)
        assert cv.alpha == pytest.approx(0.15)

    def test_ankle_bs_matches_global_com_sway(self, body, rng):
        for _ in range(100):
            q = rng.uniform(-0.8, 0.8, 3)
            p = _state(q)
            _, knee, _ = _chain(p, body)
            cv = controlled_variables("ankle", p, body, knee)
            com = com_position(body, q)
            assert cv.alpha == pytest.approx(math.atan2(com[0], com[1]), abs=1e-12)

    def test_com_sway_angle_quadrants(self):
        msg = DownChannelMsg("hip", 1.0, [0.1, 0.1], 0.0)
        assert com_sway_angle(msg) == pytest.approx(math.pi / 4)
        msg = DownChannelMsg("hip", 1.0, [-0.1, 0.1], 0.0)
        assert com_sway_angle(msg) == pytest.approx(-math.pi / 4)
