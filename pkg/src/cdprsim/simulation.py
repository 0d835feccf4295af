"""Fixed-timestep quasi-static simulation of one master arm.

The plant is deliberately simple: the platform translation pursues the
operator's drag target with a first-order lag and the orientation is held
level by the operator's grip.  Everything the real device would compute from
measurements (FK pose estimate, haptic tensions, session commands) runs on
the measured cable lengths, so enabling length noise degrades the whole
pipeline the way it would on hardware.  Given the same input stream, seed
and configuration, every run is bit-identical.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .config import KNOB_SCALE, config_from_dict, config_to_dict, default_config
from .errors import (
    AtCenterError,
    InfeasibleWrenchError,
    OutsideWallError,
    TrajectoryParseError,
)
from .fk import WarmStartPolicy, fk_solve, fk_solve_robust
from .geometry import CdprGeometry, Pose
from .haptics import PulseScheduler, haptic_tensions, is_inside, repulsion_demand
from .kinematics import inverse_kinematics
from .session import (
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

# Display-only A-per-N constant: a cable tension acting on a 10 mm spool,
# referred to the XL330's 0.228 N*m stall torque.
SPOOL_RADIUS = 0.010
STALL_TORQUE = 0.228
CURRENT_PER_NEWTON = SPOOL_RADIUS / STALL_TORQUE


def inject_noise(lengths, sigma, seed):
    """Per-cable i.i.d. Gaussian length noise; sigma = 0 is the identity.

    seed may be an integer or a numpy Generator; with a Generator the caller
    controls the stream and repeated calls draw successive samples.
    """
    lengths = np.asarray(lengths, dtype=float)
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return lengths.copy()
    rng = np.random.default_rng(seed)
    return lengths + rng.normal(0.0, sigma, size=lengths.shape)


@dataclass(frozen=True)
class CableState:
    """Reference lengths, accumulated deltas and tensions per cable."""

    reference_lengths: np.ndarray
    deltas: np.ndarray
    tensions: np.ndarray

    @property
    def lengths(self):
        return self.reference_lengths + self.deltas


@dataclass(frozen=True)
class OperatorInput:
    """One operator message: optional targets plus the pedal level."""

    drag_target: np.ndarray = None
    gimbal_targets: GimbalState = None
    pedal: bool = False
    timestamp: float = 0.0

    def __post_init__(self):
        if self.drag_target is not None:
            target = np.asarray(self.drag_target, dtype=float).reshape(3)
            if not np.all(np.isfinite(target)):
                raise ValueError(f"drag target must be finite, got {target}")
            object.__setattr__(self, "drag_target", target)
        if not math.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")


@dataclass(frozen=True)
class SimState:
    """Immutable snapshot of one tick."""

    time: float
    pose: Pose
    estimated_pose: Pose
    cable: CableState
    measured_lengths: np.ndarray
    session: SessionState
    wall_breached: bool
    pulse: float
    repulsion: np.ndarray
    motor_currents: np.ndarray
    master_cmd: np.ndarray
    slave_cmd: np.ndarray
    delayed_slave_cmd: np.ndarray
    fault: str


class Simulator:
    """Owns all mutable state of one arm and advances it tick by tick."""

    def __init__(self, geometry, config=None):
        self.geometry = geometry
        self.config = config if config is not None else default_config()
        self.wall = self.config.haptics.wall()
        self.haptic_config = self.config.haptics.haptic_config()
        self.inertia = self.config.statics.inertia()
        self.fk_config = self.config.fk.fk_config(geometry)
        self.warm_start = WarmStartPolicy(geometry)
        self.scheduler = PulseScheduler(self.haptic_config)

        noise_seq, latency_seq = np.random.SeedSequence(self.config.sim.seed).spawn(2)
        self._noise_rng = np.random.default_rng(noise_seq)
        self._latency_rng = np.random.default_rng(latency_seq)

        self._drag_target = None
        self._gimbal_target = GimbalState()
        self._pedal_level = False
        self._base_scale = self.config.session.scale
        self._pending = deque()
        self._last_deliver = 0.0

        pose = geometry.center_pose()
        lengths = inverse_kinematics(geometry, pose)
        tensions = haptic_tensions(
            geometry, pose, np.zeros(6), self.inertia, f_min=self.config.statics.f_min
        )
        session = SessionState(scale=self.config.session.scale)
        idle_cmd = np.concatenate([session.slave_ref, session.gimbal.as_array()])
        self.state = SimState(
            time=0.0,
            pose=pose,
            estimated_pose=pose,
            cable=CableState(
                reference_lengths=lengths, deltas=np.zeros(8), tensions=tensions
            ),
            measured_lengths=lengths.copy(),
            session=session,
            wall_breached=not is_inside(self.wall, pose.translation),
            pulse=0.0,
            repulsion=np.zeros(6),
            motor_currents=tensions * CURRENT_PER_NEWTON,
            master_cmd=np.zeros(8),
            slave_cmd=idle_cmd,
            delayed_slave_cmd=idle_cmd.copy(),
            fault=None,
        )

    def set_mode(self, mode):
        """Switch the actuator mode without disturbing the emitted commands."""
        self.state = replace(
            self.state, session=set_actuator_mode(self.state.session, mode)
        )

    def set_scale(self, scale):
        """Change the teleoperation ratio, re-referencing to keep X_s continuous."""
        self._base_scale = float(scale)
        session = self.state.session
        if session.clutch_engaged:
            session = self._rescale_session(session, self.state.estimated_pose, float(scale))
        else:
            session = set_scale(session, float(scale))
        self.state = replace(self.state, session=session)

    def _rescale_session(self, session, est_pose, new_scale):
        """Move both references to the current instant, then change the scale."""
        cmd = slave_command(session, master_command(session, est_pose, session.gimbal))
        session = replace(
            session,
            master_ref=est_pose.translation.copy(),
            slave_ref=cmd[:3].copy(),
        )
        return set_scale(session, new_scale)

    def step(self, operator_input=None):
        """Advance one tick; module errors land in the fault field, never raise."""
        cfg = self.config.sim
        faults = []
        time = self.state.time + cfg.dt

        if operator_input is not None:
            if operator_input.drag_target is not None:
                lo, hi = self.fk_config.bounds_lo[:3], self.fk_config.bounds_hi[:3]
                self._drag_target = np.clip(operator_input.drag_target, lo, hi)
            if operator_input.gimbal_targets is not None:
                self._gimbal_target = operator_input.gimbal_targets
            self._pedal_level = bool(operator_input.pedal)

        # plant translation: first-order pursuit of the drag target
        qt = self.state.pose.translation
        if self._drag_target is not None:
            alpha = math.exp(-cfg.dt / cfg.drag_time_constant)
            qt = self._drag_target + (qt - self._drag_target) * alpha
        pose = Pose(translation=qt)

        # gimbal: instant in current mode (backdrivable), first-order in position mode
        session = self.state.session
        target = self._gimbal_target.as_array()
        if session.mode is ActuatorMode.CURRENT:
            joints = target
        else:
            alpha = math.exp(-cfg.dt / cfg.drag_time_constant)
            joints = target + (session.gimbal.as_array() - target) * alpha
        gimbal = GimbalState(*joints)
        session = replace(session, gimbal=gimbal)

        # measurement and estimation; multi-start only on a cold guess, the
        # warm path must stay cheap at the tick rate
        lengths = inverse_kinematics(self.geometry, pose)
        measured = inject_noise(lengths, cfg.noise_sigma, self._noise_rng)
        solver = fk_solve_robust if self.warm_start.is_cold else fk_solve
        solution = solver(self.geometry, measured, self.warm_start.guess(), self.fk_config)
        self.warm_start.observe(solution)
        est_pose = solution.pose
        if not solution.converged:
            faults.append(f"fk: no convergence (residual {solution.residual_norm:.3e})")

        # clutch edges against the estimated pose
        if self._pedal_level and not session.clutch_engaged:
            try:
                session = engage_clutch(
                    session, est_pose, self.state.slave_cmd[:3], wall=self.wall
                )
            except OutsideWallError as exc:
                faults.append(f"clutch: {exc}")
        elif not self._pedal_level and session.clutch_engaged:
            session = disengage_clutch(session)

        # optional live scale from the knob
        if self.config.session.knob_binding == KNOB_SCALE:
            desired = self._base_scale * math.exp(gimbal.knob / (2.0 * math.pi))
            if desired != session.scale:
                if session.clutch_engaged:
                    session = self._rescale_session(session, est_pose, desired)
                else:
                    session = set_scale(session, desired)

        # session commands; the slave holds its last command while disengaged
        if session.clutch_engaged:
            m_cmd = master_command(session, est_pose, gimbal)
            s_cmd = slave_command(session, m_cmd)
            delay = self._latency_rng.uniform(cfg.latency_min, cfg.latency_max)
            self._last_deliver = max(self._last_deliver, time + delay)
            self._pending.append((self._last_deliver, s_cmd))
        else:
            m_cmd = np.zeros(8)
            s_cmd = self.state.slave_cmd

        delayed = self.state.delayed_slave_cmd
        while self._pending and self._pending[0][0] <= time:
            delayed = self._pending.popleft()[1]

        # haptics on the estimated translation
        breached = not is_inside(self.wall, est_pose.translation)
        try:
            demand = repulsion_demand(self.wall, est_pose.translation, self.haptic_config)
        except AtCenterError:
            demand = np.zeros(6)
        pulse = self.scheduler.update(time, breached)
        tensions = self.state.cable.tensions
        try:
            tensions = haptic_tensions(
                self.geometry,
                est_pose,
                pulse * demand,
                self.inertia,
                f_min=self.config.statics.f_min,
            )
        except InfeasibleWrenchError as exc:
            faults.append(f"tensions: {exc}")

        self.state = SimState(
            time=time,
            pose=pose,
            estimated_pose=est_pose,
            cable=CableState(
                reference_lengths=self.state.cable.reference_lengths,
                deltas=lengths - self.state.cable.reference_lengths,
                tensions=tensions,
            ),
            measured_lengths=measured,
            session=session,
            wall_breached=breached,
            pulse=pulse,
            repulsion=demand,
            motor_currents=tensions * CURRENT_PER_NEWTON,
            master_cmd=m_cmd,
            slave_cmd=s_cmd,
            delayed_slave_cmd=delayed,
            fault="; ".join(faults) if faults else None,
        )
        return self.state


# --- trajectory record and replay -----------------------------------------
#
# One whitespace-separated record per tick, floats written with repr so the
# file round-trips bit-exactly.  Each record carries the operator input that
# produced the tick ahead of the resulting outputs, which makes a record
# file a self-contained rerunnable script: the header embeds the geometry
# and configuration as JSON, so replay needs nothing else.

TRAJECTORY_MAGIC = "# cdprsim trajectory v1"

_COLUMNS = (
    "time "
    "has_input has_drag drag_x drag_y drag_z has_gimbal gt_roll gt_pitch gt_yaw "
    "gt_trigger gt_knob pedal timestamp "
    "qt_x qt_y qt_z rx ry rz roll pitch yaw trigger knob engaged "
    "xm_0..7 xs_0..7 f_0..7 breach pulse fault"
)
N_FIELDS = 14 + 6 + 5 + 1 + 8 + 8 + 8 + 3


def _fmt(values):
    return " ".join(repr(float(v)) for v in values)


def trajectory_header(geometry, config):
    """Header lines (without newlines) for a record file."""
    geometry_json = json.dumps(
        {
            "frame_anchors": geometry.frame_anchors.tolist(),
            "body_anchors": geometry.body_anchors.tolist(),
        },
        sort_keys=True,
    )
    config_json = json.dumps(config_to_dict(config), sort_keys=True)
    return [
        TRAJECTORY_MAGIC,
        f"# kernel {kernels.BACKEND}",
        f"# geometry {geometry_json}",
        f"# config {config_json}",
        f"# columns: {_COLUMNS}",
    ]


def format_record(state, operator_input):
    """One record line for a tick and the input that drove it."""
    if operator_input is None:
        inp = f"0 0 {_fmt(np.zeros(3))} 0 {_fmt(np.zeros(5))} 0 {repr(0.0)}"
    else:
        drag = operator_input.drag_target
        gt = operator_input.gimbal_targets
        inp = " ".join(
            [
                "1",
                "1" if drag is not None else "0",
                _fmt(drag if drag is not None else np.zeros(3)),
                "1" if gt is not None else "0",
                _fmt(gt.as_array() if gt is not None else np.zeros(5)),
                "1" if operator_input.pedal else "0",
                repr(float(operator_input.timestamp)),
            ]
        )
    out = " ".join(
        [
            _fmt(state.pose.translation),
            _fmt(state.pose.orientation),
            _fmt(state.session.gimbal.as_array()),
            "1" if state.session.clutch_engaged else "0",
            _fmt(state.master_cmd),
            _fmt(state.slave_cmd),
            _fmt(state.cable.tensions),
            "1" if state.wall_breached else "0",
            repr(float(state.pulse)),
            "1" if state.fault else "0",
        ]
    )
    return f"{repr(float(state.time))} {inp} {out}"


class TrajectoryRecorder:
    """Collects header plus one formatted record per tick."""

    def __init__(self, geometry, config):
        self._lines = trajectory_header(geometry, config)

    def record(self, state, operator_input):
        self._lines.append(format_record(state, operator_input))

    def content(self):
        return "\n".join(self._lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.content())


@dataclass(frozen=True)
class Trajectory:
    """Parsed record file: verbatim header, run setup, and the input stream."""

    header_lines: list
    kernel: str
    geometry: CdprGeometry
    config: object
    inputs: list
    record_lines: list


def _parse_input_fields(fields, line_number):
    if fields[0] == "0":
        return None
    drag = None
    if fields[1] == "1":
        drag = np.array([float(v) for v in fields[2:5]])
    gimbal = None
    if fields[5] == "1":
        gimbal = GimbalState(*[float(v) for v in fields[6:11]])
    pedal = fields[11] == "1"
    try:
        timestamp = float(fields[12])
    except ValueError as exc:
        raise TrajectoryParseError(
            f"line {line_number}: bad timestamp {fields[12]!r}", line_number
        ) from exc
    return OperatorInput(
        drag_target=drag, gimbal_targets=gimbal, pedal=pedal, timestamp=timestamp
    )


def read_trajectory(path):
    """Parse a record file; raises TrajectoryParseError with the line number."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TRAJECTORY_MAGIC:
        raise TrajectoryParseError(f"{path}: not a trajectory file", 1)

    header_lines = [ln for ln in lines if ln.startswith("#")]
    meta = {}
    for ln in header_lines:
        parts = ln[1:].strip().split(" ", 1)
        if len(parts) == 2:
            meta[parts[0]] = parts[1]
    for key in ("kernel", "geometry", "config"):
        if key not in meta:
            raise TrajectoryParseError(f"{path}: header lacks {key!r}", 1)
    try:
        raw_geometry = json.loads(meta["geometry"])
        geometry = CdprGeometry(
            frame_anchors=np.array(raw_geometry["frame_anchors"]),
            body_anchors=np.array(raw_geometry["body_anchors"]),
        )
        config = config_from_dict(json.loads(meta["config"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise TrajectoryParseError(f"{path}: bad header: {exc}", 1) from exc

    inputs = []
    record_lines = []
    for number, ln in enumerate(lines, start=1):
        if ln.startswith("#"):
            continue
        fields = ln.split()
        if len(fields) != N_FIELDS:
            raise TrajectoryParseError(
                f"line {number}: expected {N_FIELDS} fields, got {len(fields)}", number
            )
        try:
            [float(v) for v in fields]
        except ValueError as exc:
            raise TrajectoryParseError(f"line {number}: {exc}", number) from exc
        inputs.append(_parse_input_fields(fields[1:14], number))
        record_lines.append(ln)
    return Trajectory(
        header_lines=header_lines,
        kernel=meta["kernel"],
        geometry=geometry,
        config=config,
        inputs=inputs,
        record_lines=record_lines,
    )


@dataclass(frozen=True)
class ReplayResult:
    content: str
    comparable: bool
    states: list


def replay(path, config=None):
    """Re-run the input stream of a record file headless.

    With no config the run is rebuilt exactly from the header and the output
    is byte-identical to the original file.  Supplying a different config
    (or running under a different kernel backend) still replays, but the
    result is marked non-comparable since seeds, noise or arithmetic differ.
    """
    trajectory = read_trajectory(path)
    comparable = trajectory.kernel == kernels.BACKEND
    run_config = trajectory.config
    if config is not None:
        if config != trajectory.config:
            comparable = False
        run_config = config

    sim = Simulator(trajectory.geometry, run_config)
    lines = (
        list(trajectory.header_lines)
        if config is None
        else trajectory_header(trajectory.geometry, run_config)
    )
    states = []
    for operator_input in trajectory.inputs:
        state = sim.step(operator_input)
        states.append(state)
        lines.append(format_record(state, operator_input))
    return ReplayResult(
        content="\n".join(lines) + "\n", comparable=comparable, states=states
    )
