"""Virtual fixture haptics: ellipsoid wall, repulsion synthesis, pulse scheduling.

The wall is an axis-aligned ellipsoid around the workspace center.  Outside
it, a constant-magnitude demand pushes the platform back toward the center;
a duty-cycled scheduler turns that demand into a finite train of vibration
pulses so the operator feels distinct bursts rather than a steady shove.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AtCenterError, NoEquilibriumError
from .kinematics import geodesic_angle
from .statics import distribute_tensions, gravity_wrench

_CENTER_EPS = 1e-12


@dataclass(frozen=True)
class VirtualWall:
    """Axis-aligned ellipsoid boundary of the safe operating region."""

    center: np.ndarray
    radii: np.ndarray
    orientation_threshold: float = math.radians(10.0)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(3)
        radii = np.asarray(self.radii, dtype=float).reshape(3)
        if not (np.all(np.isfinite(center)) and np.all(np.isfinite(radii))):
            raise ValueError("wall center and radii must be finite")
        if np.any(radii <= 0.0):
            raise ValueError(f"wall radii must be positive, got {radii}")
        if not 0.0 < self.orientation_threshold < math.pi / 2:
            raise ValueError("orientation threshold must lie in (0, 90) degrees")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radii", radii)


@dataclass(frozen=True)
class HapticConfig:
    """Repulsion gain and vibration pulse parameters."""

    gain: float = 5.0
    pulse_period: float = 0.6
    pulse_duty: float = 0.5
    max_pulses: int = 3

    def __post_init__(self):
        if self.gain <= 0.0:
            raise ValueError("gain must be positive")
        if self.pulse_period <= 0.0:
            raise ValueError("pulse period must be positive")
        if not 0.0 <= self.pulse_duty <= 1.0:
            raise ValueError("pulse duty must lie in [0, 1]")
        if self.max_pulses < 1:
            raise ValueError("max_pulses must be at least 1")


def wall_value(wall, qt):
    """Ellipsoid quadratic form at qt; at most 1 inside the wall."""
    qt = np.asarray(qt, dtype=float).reshape(3)
    scaled = (qt - wall.center) / wall.radii
    return float(np.dot(scaled, scaled))


def is_inside(wall, qt):
    return wall_value(wall, qt) <= 1.0


def repulsion_demand(wall, qt, config):
    """Task-space demand pushing the platform back inside the wall.

    Zero inside the wall; outside, the translational part has magnitude
    config.gain and points from qt toward the wall center.  The rotational
    part is always zero.  Raises AtCenterError when qt coincides with the
    center, where the direction is undefined.
    """
    qt = np.asarray(qt, dtype=float).reshape(3)
    toward_center = wall.center - qt
    distance = np.linalg.norm(toward_center)
    if distance < _CENTER_EPS:
        raise AtCenterError("repulsion direction undefined at the wall center")
    if wall_value(wall, qt) <= 1.0:
        return np.zeros(6)
    demand = np.zeros(6)
    demand[:3] = config.gain * toward_center / distance
    return demand


def haptic_tensions(geometry, pose, demand, inertia, f_min=1.0):
    """Cable tensions realizing the haptic demand on top of gravity support.

    A single tension distribution covers both, so zero demand reproduces the
    gravity compensation output exactly.
    """
    demand = np.asarray(demand, dtype=float).reshape(6)
    desired = demand - gravity_wrench(pose, inertia)
    return distribute_tensions(geometry, pose, desired, f_min=f_min)


class PulseScheduler:
    """Finite-state pulse train generator for the repulsion component.

    While the wall stays breached the factor follows a square wave of the
    configured period and duty, stopping after max_pulses bursts.  Returning
    inside the wall resets the window.  Identical breach signals produce
    identical factor traces.
    """

    def __init__(self, config):
        self._config = config
        self._breach_start = None
        self._last_time = -math.inf

    def update(self, time, breached):
        """Advance to the given time; returns the modulation factor (0 or 1)."""
        if time < self._last_time:
            raise ValueError(f"timestamps must be monotone, got {time} after {self._last_time}")
        self._last_time = time
        if not breached:
            self._breach_start = None
            return 0.0
        if self._breach_start is None:
            self._breach_start = time
        elapsed = time - self._breach_start
        period = self._config.pulse_period
        index = int(elapsed // period)
        if index >= self._config.max_pulses:
            return 0.0
        phase = elapsed - index * period
        return 1.0 if phase < self._config.pulse_duty * period else 0.0

    def reset(self):
        self._breach_start = None
        self._last_time = -math.inf


def zero_orientation_membership(qt, passive_orientation_fn, threshold):
    """True when the passive orientation magnitude at qt stays within threshold.

    passive_orientation_fn maps a translation to the equilibrium orientation
    angles; a NoEquilibriumError counts as non-membership.
    """
    try:
        orientation = passive_orientation_fn(qt)
    except NoEquilibriumError:
        return False
    return geodesic_angle(orientation) <= threshold
