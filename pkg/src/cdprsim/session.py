"""Teleoperation session: gimbal state, clutch logic, master and slave commands.

The master emits an 8-vector command: a clutch-relative translation delta
followed by the five gimbal joints (roll, pitch, yaw, trigger, knob).  The
slave command re-bases the scaled delta onto the slave-side reference
captured at clutch engagement, so motion while disengaged never leaks into
the slave stream.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ClutchDisengagedError, OutsideWallError
from .haptics import wall_value

log = logging.getLogger(__name__)

PITCH_YAW_LIMIT = math.radians(85.0)


def _wrap_half_turn(angle):
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class GimbalState:
    """Five gimbal joints: roll, pitch, yaw (rad), trigger (0..1), knob (rad).

    Roll is continuous and wraps into (-180, 180]; pitch and yaw clamp at
    +-85 degrees; the trigger clamps to [0, 1].  Clamping is logged, not an
    error, mirroring a physical joint hitting its stop.
    """

    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    trigger: float = 0.0
    knob: float = 0.0

    def __post_init__(self):
        values = (self.roll, self.pitch, self.yaw, self.trigger, self.knob)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"gimbal joints must be finite, got {values}")
        object.__setattr__(self, "roll", _wrap_half_turn(float(self.roll)))
        for name, limit in (("pitch", PITCH_YAW_LIMIT), ("yaw", PITCH_YAW_LIMIT)):
            value = float(getattr(self, name))
            clamped = min(max(value, -limit), limit)
            if clamped != value:
                log.info("gimbal %s clamped from %.4f to %.4f rad", name, value, clamped)
            object.__setattr__(self, name, clamped)
        trigger = min(max(float(self.trigger), 0.0), 1.0)
        if trigger != self.trigger:
            log.info("gimbal trigger clamped from %.4f to %.4f", self.trigger, trigger)
        object.__setattr__(self, "trigger", trigger)
        object.__setattr__(self, "knob", float(self.knob))

    def as_array(self):
        return np.array([self.roll, self.pitch, self.yaw, self.trigger, self.knob])


class ActuatorMode(enum.Enum):
    POSITION = "position"
    CURRENT = "current"


@dataclass(frozen=True)
class SessionState:
    """Clutch state, references, translation scale and gimbal of one arm."""

    clutch_engaged: bool = False
    master_ref: np.ndarray = field(default_factory=lambda: np.zeros(3))
    slave_ref: np.ndarray = field(default_factory=lambda: np.zeros(3))
    scale: float = 1.0
    mode: ActuatorMode = ActuatorMode.CURRENT
    gimbal: GimbalState = field(default_factory=GimbalState)

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "master_ref", np.asarray(self.master_ref, dtype=float).reshape(3))
        object.__setattr__(self, "slave_ref", np.asarray(self.slave_ref, dtype=float).reshape(3))


def engage_clutch(state, master_pose, slave_translation, wall=None, override=False):
    """Capture both references at the current instant and engage.

    When a wall is given, engaging outside it requires the override flag;
    otherwise OutsideWallError.
    """
    if wall is not None and not override and wall_value(wall, master_pose.translation) > 1.0:
        raise OutsideWallError(
            f"clutch engage at {master_pose.translation} lies outside the virtual wall"
        )
    return replace(
        state,
        clutch_engaged=True,
        master_ref=master_pose.translation.copy(),
        slave_ref=np.asarray(slave_translation, dtype=float).reshape(3).copy(),
    )


def disengage_clutch(state):
    return replace(state, clutch_engaged=False)


def set_actuator_mode(state, mode):
    return replace(state, mode=ActuatorMode(mode))


def set_scale(state, scale):
    return replace(state, scale=float(scale))


def master_command(state, pose, gimbal):
    """X_m: translation relative to the engage reference, gimbal verbatim."""
    if not state.clutch_engaged:
        raise ClutchDisengagedError("master command requires an engaged clutch")
    return np.concatenate([pose.translation - state.master_ref, gimbal.as_array()])


def slave_command(state, master_cmd):
    """X_s: slave reference plus the scaled delta, gimbal forwarded 1:1."""
    if not state.clutch_engaged:
        raise ClutchDisengagedError("slave command requires an engaged clutch")
    master_cmd = np.asarray(master_cmd, dtype=float).reshape(8)
    return np.concatenate([state.slave_ref + state.scale * master_cmd[:3], master_cmd[3:]])
