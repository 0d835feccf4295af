"""cdprsim: desk-scale 8-cable CDPR teleoperation master simulator.

Library layers:

- geometry / kinematics: anchor layout, cable vectors, IK, Jacobian
- fk: bounded Levenberg-Marquardt forward kinematics
- statics: tension distribution, gravity compensation, passive orientation
- session: clutch logic and master/slave task-space commands
- haptics: ellipsoid virtual wall, repulsion, vibration pulses
- workspace: passive-orientation sweeps, wall fitting, volumes
- simulation / service: fixed-timestep loop, record/replay, WebSocket service
"""

__version__ = "0.1.0"

from .config import SimConfig, default_config, load_config, load_or_default
from .fk import FkConfig, FkSolution, WarmStartPolicy, fk_solve, fk_solve_robust
from .geometry import CdprGeometry, Pose, default_geometry, load_geometry
from .haptics import HapticConfig, PulseScheduler, VirtualWall
from .kernels import BACKEND as KERNEL_BACKEND
from .service import SimService
from .simulation import (
    OperatorInput,
    SimState,
    Simulator,
    TrajectoryRecorder,
    read_trajectory,
    replay,
)
from .statics import PlatformInertia, distribute_tensions, gravity_compensation

__all__ = [
    "CdprGeometry",
    "FkConfig",
    "FkSolution",
    "HapticConfig",
    "KERNEL_BACKEND",
    "OperatorInput",
    "PlatformInertia",
    "Pose",
    "PulseScheduler",
    "SimConfig",
    "SimService",
    "SimState",
    "Simulator",
    "TrajectoryRecorder",
    "VirtualWall",
    "WarmStartPolicy",
    "__version__",
    "default_config",
    "default_geometry",
    "distribute_tensions",
    "fk_solve",
    "fk_solve_robust",
    "gravity_compensation",
    "load_config",
    "load_geometry",
    "load_or_default",
    "read_trajectory",
    "replay",
]
