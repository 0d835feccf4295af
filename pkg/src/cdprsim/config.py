"""Run configuration: a YAML file mapped onto typed sections.

Angles cross the file boundary in degrees, times in seconds, forces in
newtons, lengths in meters; the accessors convert to the radian-based
internal types.  Unknown keys are rejected so typos fail loudly instead of
silently falling back to defaults.
"""

import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from .fk import FkConfig
from .haptics import HapticConfig, VirtualWall
from .statics import PlatformInertia

ENV_CONFIG = "CDPRSIM_CONFIG"

KNOB_PASSTHROUGH = "passthrough"
KNOB_SCALE = "scale"


@dataclass(frozen=True)
class SessionSection:
    """Master to slave mapping settings."""

    scale: float = 1.0
    knob_binding: str = KNOB_PASSTHROUGH
    pitch_limit_deg: float = 85.0
    yaw_limit_deg: float = 85.0

    def __post_init__(self):
        if self.scale <= 0.0:
            raise ValueError("session scale must be positive")
        if self.knob_binding not in (KNOB_PASSTHROUGH, KNOB_SCALE):
            raise ValueError(
                f"knob_binding must be {KNOB_PASSTHROUGH!r} or {KNOB_SCALE!r}, "
                f"got {self.knob_binding!r}"
            )
        for name in ("pitch_limit_deg", "yaw_limit_deg"):
            value = getattr(self, name)
            if not 0.0 < value <= 85.0:
                raise ValueError(f"{name} must lie in (0, 85] degrees, got {value}")


@dataclass(frozen=True)
class StaticsSection:
    """Platform inertia and the tension floor."""

    mass: float = 0.328
    center_of_mass: tuple = (0.0, 0.0, 0.0)
    f_min: float = 1.0

    def __post_init__(self):
        if self.mass < 0.0:
            raise ValueError("mass must be nonnegative")
        if self.f_min < 0.0:
            raise ValueError("f_min must be nonnegative")
        com = tuple(float(v) for v in self.center_of_mass)
        if len(com) != 3 or not all(math.isfinite(v) for v in com):
            raise ValueError("center_of_mass must be three finite numbers")
        object.__setattr__(self, "center_of_mass", com)

    def inertia(self):
        return PlatformInertia(mass=self.mass, center_of_mass=np.array(self.center_of_mass))


@dataclass(frozen=True)
class HapticsSection:
    """Virtual wall shape and pulse train parameters."""

    wall_center: tuple = (0.0, 0.0, 0.0)
    wall_radii: tuple = (0.12, 0.12, 0.16)
    orientation_threshold_deg: float = 10.0
    gain: float = 5.0
    pulse_period: float = 0.6
    pulse_duty: float = 0.5
    max_pulses: int = 3

    def __post_init__(self):
        object.__setattr__(self, "wall_center", tuple(float(v) for v in self.wall_center))
        object.__setattr__(self, "wall_radii", tuple(float(v) for v in self.wall_radii))
        # shape checks happen in wall(); fail early on the cheap ones
        self.wall()
        self.haptic_config()

    def wall(self):
        return VirtualWall(
            center=np.array(self.wall_center),
            radii=np.array(self.wall_radii),
            orientation_threshold=math.radians(self.orientation_threshold_deg),
        )

    def haptic_config(self):
        return HapticConfig(
            gain=self.gain,
            pulse_period=self.pulse_period,
            pulse_duty=self.pulse_duty,
            max_pulses=self.max_pulses,
        )


@dataclass(frozen=True)
class FkSection:
    """Forward kinematics solver settings."""

    bounds_margin: float = 0.02
    orientation_limit_deg: float = 45.0
    max_iterations: int = 100
    residual_tol: float = 1e-9
    step_tol: float = 1e-10

    def __post_init__(self):
        if self.bounds_margin < 0.0:
            raise ValueError("bounds_margin must be nonnegative")
        if not 0.0 < self.orientation_limit_deg < 90.0:
            raise ValueError("orientation_limit_deg must lie in (0, 90)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    def fk_config(self, geometry):
        return FkConfig.for_geometry(
            geometry,
            margin=self.bounds_margin,
            orientation_limit=math.radians(self.orientation_limit_deg),
            max_iterations=self.max_iterations,
            residual_tol=self.residual_tol,
            step_tol=self.step_tol,
        )


@dataclass(frozen=True)
class SimSection:
    """Loop timing, plant model, noise, and network settings."""

    dt: float = 0.005
    broadcast_divisor: int = 4
    drag_time_constant: float = 0.08
    noise_sigma: float = 0.0
    seed: int = 0
    latency_min: float = 0.05
    latency_max: float = 0.10
    host: str = "127.0.0.1"
    port: int = 8765

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.broadcast_divisor < 1:
            raise ValueError("broadcast_divisor must be at least 1")
        if self.drag_time_constant <= 0.0:
            raise ValueError("drag_time_constant must be positive")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")
        if not 0.0 <= self.latency_min <= self.latency_max:
            raise ValueError("latency range must satisfy 0 <= min <= max")
        if not 0 <= self.port < 65536:
            raise ValueError("port must lie in [0, 65536); 0 means ephemeral")


@dataclass(frozen=True)
class SimConfig:
    """All run settings, grouped the way the YAML file is."""

    session: SessionSection = field(default_factory=SessionSection)
    statics: StaticsSection = field(default_factory=StaticsSection)
    haptics: HapticsSection = field(default_factory=HapticsSection)
    fk: FkSection = field(default_factory=FkSection)
    sim: SimSection = field(default_factory=SimSection)


_SECTIONS = {
    "session": SessionSection,
    "statics": StaticsSection,
    "haptics": HapticsSection,
    "fk": FkSection,
    "sim": SimSection,
}


def _build_section(cls, data, name):
    if not isinstance(data, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data):
    """Build a SimConfig from a parsed YAML mapping; missing parts default."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    parts = {
        name: _build_section(cls, data.get(name, {}), name)
        for name, cls in _SECTIONS.items()
    }
    return SimConfig(**parts)


def _listify(value):
    if isinstance(value, tuple):
        return [_listify(v) for v in value]
    if isinstance(value, dict):
        return {k: _listify(v) for k, v in value.items()}
    return value


def config_to_dict(config):
    """Plain nested dict form (lists, not tuples) for YAML or JSON dumping."""
    return {name: _listify(asdict(getattr(config, name))) for name in _SECTIONS}


def default_config():
    return SimConfig()


def load_config(path):
    """Read a YAML config file; absent sections fall back to defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return config_from_dict(data)


def resolve_config_path(explicit=None):
    """Config file to use: explicit flag wins, then the environment variable."""
    if explicit:
        return explicit
    return os.environ.get(ENV_CONFIG) or None


def load_or_default(path=None):
    resolved = resolve_config_path(path)
    if resolved is None:
        return default_config()
    return load_config(resolved)
