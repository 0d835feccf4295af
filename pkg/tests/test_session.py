import math

import numpy as np
import pytest

from cdprsim.errors import ClutchDisengagedError, OutsideWallError
from cdprsim.geometry import Pose
from cdprsim.haptics import VirtualWall
from cdprsim.session import (
    ActuatorMode,
    GimbalState,
    SessionState,
    disengage_clutch,
    engage_clutch,
    master_command,
    set_actuator_mode,
    set_scale,
    slave_command,
)


class TestGimbalState:
    def test_roll_wraps_continuously(self):
        assert GimbalState(roll=math.radians(190.0)).roll == pytest.approx(math.radians(-170.0))
        assert GimbalState(roll=math.radians(180.0)).roll == pytest.approx(math.pi)
        assert GimbalState(roll=math.radians(-180.0)).roll == pytest.approx(math.pi)
        assert GimbalState(roll=5 * math.pi).roll == pytest.approx(math.pi)

    def test_pitch_yaw_clamp(self):
        state = GimbalState(pitch=math.radians(100.0), yaw=math.radians(-100.0))
        assert state.pitch == pytest.approx(math.radians(85.0))
        assert state.yaw == pytest.approx(math.radians(-85.0))

    def test_trigger_clamps_to_unit_interval(self):
        assert GimbalState(trigger=1.4).trigger == 1.0
        assert GimbalState(trigger=-0.2).trigger == 0.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            GimbalState(roll=float("nan"))

    def test_as_array_order(self):
        state = GimbalState(roll=0.1, pitch=0.2, yaw=0.3, trigger=0.4, knob=0.5)
        assert np.allclose(state.as_array(), [0.1, 0.2, 0.3, 0.4, 0.5])


class TestSessionState:
    def test_defaults(self):
        state = SessionState()
        assert not state.clutch_engaged
        assert state.scale == 1.0
        assert state.mode is ActuatorMode.CURRENT

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            SessionState(scale=0.0)
        with pytest.raises(ValueError):
            SessionState(scale=-1.0)

    def test_mode_setter_accepts_enum_and_value(self):
        state = set_actuator_mode(SessionState(), ActuatorMode.POSITION)
        assert state.mode is ActuatorMode.POSITION
        state = set_actuator_mode(state, "current")
        assert state.mode is ActuatorMode.CURRENT

    def test_set_scale(self):
        assert set_scale(SessionState(), 2.5).scale == 2.5


class TestEngageClutch:
    def test_captures_both_references(self):
        pose = Pose(translation=[0.01, -0.02, 0.03])
        state = engage_clutch(SessionState(), pose, [0.5, 0.6, 0.7])
        assert state.clutch_engaged
        assert np.array_equal(state.master_ref, pose.translation)
        assert np.array_equal(state.slave_ref, [0.5, 0.6, 0.7])

    def test_outside_wall_refused(self):
        wall = VirtualWall(center=np.zeros(3), radii=[0.1, 0.1, 0.1])
        pose = Pose(translation=[0.2, 0.0, 0.0])
        with pytest.raises(OutsideWallError):
            engage_clutch(SessionState(), pose, np.zeros(3), wall=wall)

    def test_outside_wall_with_override(self):
        wall = VirtualWall(center=np.zeros(3), radii=[0.1, 0.1, 0.1])
        pose = Pose(translation=[0.2, 0.0, 0.0])
        state = engage_clutch(SessionState(), pose, np.zeros(3), wall=wall, override=True)
        assert state.clutch_engaged

    def test_disengage_keeps_references(self):
        state = engage_clutch(SessionState(), Pose(translation=[0.01, 0, 0]), np.zeros(3))
        state = disengage_clutch(state)
        assert not state.clutch_engaged
        assert np.array_equal(state.master_ref, [0.01, 0, 0])


class TestMasterCommand:
    def test_zero_at_reference(self):
        pose = Pose(translation=[0.04, 0.05, -0.06])
        state = engage_clutch(SessionState(), pose, np.zeros(3))
        cmd = master_command(state, pose, GimbalState())
        assert np.array_equal(cmd[:3], np.zeros(3))

    def test_translation_is_componentwise_subtraction(self, rng):
        for _ in range(50):
            ref = Pose(translation=rng.uniform(-0.1, 0.1, 3))
            state = engage_clutch(SessionState(), ref, np.zeros(3))
            now = Pose(translation=rng.uniform(-0.1, 0.1, 3))
            cmd = master_command(state, now, GimbalState())
            assert np.array_equal(cmd[:3], now.translation - ref.translation)

    def test_gimbal_passthrough_is_bit_exact(self, rng):
        state = engage_clutch(SessionState(), Pose(), np.zeros(3))
        gimbal = GimbalState(roll=0.123456789, pitch=-0.5, yaw=1.2, trigger=0.77, knob=-2.5)
        cmd = master_command(state, Pose(), gimbal)
        assert np.array_equal(cmd[3:], gimbal.as_array())

    def test_invariant_under_rigid_scene_shift(self):
        shift = np.array([1.0, 2.0, 3.0])
        ref = Pose(translation=[0.02, 0.01, -0.03])
        now = Pose(translation=[0.05, -0.02, 0.04])
        plain = master_command(engage_clutch(SessionState(), ref, np.zeros(3)), now, GimbalState())
        shifted = master_command(
            engage_clutch(SessionState(), Pose(translation=ref.translation + shift), np.zeros(3)),
            Pose(translation=now.translation + shift),
            GimbalState(),
        )
        assert np.allclose(plain, shifted, atol=1e-15)

    def test_disengaged_raises(self):
        with pytest.raises(ClutchDisengagedError):
            master_command(SessionState(), Pose(), GimbalState())


class TestSlaveCommand:
    def test_reference_at_zero_delta(self):
        state = engage_clutch(SessionState(), Pose(), [0.5, 0.5, 0.5])
        cmd = slave_command(state, master_command(state, Pose(), GimbalState()))
        assert np.array_equal(cmd[:3], [0.5, 0.5, 0.5])

    def test_scaling(self):
        state = engage_clutch(SessionState(scale=2.0), Pose(), np.zeros(3))
        moved = Pose(translation=[0.01, 0.0, 0.0])
        cmd = slave_command(state, master_command(state, moved, GimbalState()))
        assert np.allclose(cmd[:3], [0.02, 0.0, 0.0], atol=1e-15)

    def test_angular_passthrough_bit_exact(self):
        state = engage_clutch(SessionState(), Pose(), np.zeros(3))
        gimbal = GimbalState(roll=1.0, pitch=-0.3, yaw=0.9, trigger=0.2, knob=4.0)
        cmd = slave_command(state, master_command(state, Pose(), gimbal))
        assert np.array_equal(cmd[3:], gimbal.as_array())

    def test_disengaged_raises(self):
        with pytest.raises(ClutchDisengagedError):
            slave_command(SessionState(), np.zeros(8))


class TestClutchAlgebra:
    def test_disengaged_motion_never_leaks(self, rng):
        # engage, move d, disengage, wander e, re-engage, move d2: the slave
        # net displacement is n (d + d2) regardless of e
        for _ in range(100):
            n = rng.uniform(0.5, 3.0)
            start = rng.uniform(-0.05, 0.05, 3)
            d = rng.uniform(-0.05, 0.05, 3)
            e = rng.uniform(-0.2, 0.2, 3)
            d2 = rng.uniform(-0.05, 0.05, 3)
            slave0 = rng.uniform(-0.3, 0.3, 3)

            state = SessionState(scale=n)
            state = engage_clutch(state, Pose(translation=start), slave0)
            p1 = Pose(translation=start + d)
            s1 = slave_command(state, master_command(state, p1, GimbalState()))

            state = disengage_clutch(state)
            p2 = Pose(translation=start + d + e)
            state = engage_clutch(state, p2, s1[:3])
            p3 = Pose(translation=start + d + e + d2)
            s2 = slave_command(state, master_command(state, p3, GimbalState()))

            assert np.allclose(s2[:3] - slave0, n * (d + d2), atol=1e-12)

    def test_re_engagement_is_continuous(self, rng):
        # first command after re-engage equals the last command before
        state = engage_clutch(SessionState(), Pose(), np.zeros(3))
        p = Pose(translation=[0.03, -0.01, 0.02])
        last = slave_command(state, master_command(state, p, GimbalState()))
        state = disengage_clutch(state)
        wander = Pose(translation=[0.09, 0.04, -0.07])
        state = engage_clutch(state, wander, last[:3])
        first = slave_command(state, master_command(state, wander, GimbalState()))
        assert np.array_equal(first[:3], last[:3])
