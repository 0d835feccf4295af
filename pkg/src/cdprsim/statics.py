"""Static force analysis: wrenches, tension distribution, passive orientation.

Wrenches live in the generalized coordinates q = (x, y, z, rx, ry, rz): the
force part is the plain world-frame force, the torque part is the world
torque mapped through the Euler-rate matrix transpose.  With that convention
the wrench produced by cable tensions f is exactly -J^T f.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import kernels
from .errors import DegenerateCableError, InfeasibleWrenchError, NoEquilibriumError
from .geometry import N_CABLES
from .kinematics import geodesic_angle, jacobian

GRAVITY = 9.81

_NULLSPACE_RTOL = 1e-10
_EQUALITY_TOL = 1e-9


@dataclass(frozen=True)
class PlatformInertia:
    """Mass properties of the moving platform (center of mass in body frame)."""

    mass: float = 0.328
    center_of_mass: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.mass < 0.0 or not np.isfinite(self.mass):
            raise ValueError("mass must be finite and non-negative")
        com = np.asarray(self.center_of_mass, dtype=float).reshape(3)
        if not np.all(np.isfinite(com)):
            raise ValueError("center of mass must be finite")
        object.__setattr__(self, "center_of_mass", com)


def wrench_from_tensions(geometry, pose, tensions):
    """Generalized wrench -J^T f applied to the platform by the cables."""
    f = np.asarray(tensions, dtype=float).reshape(N_CABLES)
    return -(jacobian(geometry, pose).T @ f)


def gravity_wrench(pose, inertia):
    """Generalized wrench of gravity on the platform at the given pose."""
    force = np.array([0.0, 0.0, -inertia.mass * GRAVITY])
    rot = kernels.rotation_xyz(*pose.orientation)
    torque_world = np.cross(rot @ inertia.center_of_mass, force)
    rate = kernels.euler_rate_matrix(pose.orientation[0], pose.orientation[1])
    return np.concatenate([force, rate.T @ torque_world])


def _nonneg_lstsq(matrix, rhs):
    """min ||matrix @ x - rhs|| with x >= 0, via bounded-variable least squares."""
    result = scipy.optimize.lsq_linear(
        matrix, rhs, bounds=(0.0, np.inf), method="bvls", tol=1e-14
    )
    return np.clip(result.x, 0.0, None)


def _ldp(normals, offsets):
    """Least-distance program: min ||z|| s.t. normals @ z >= offsets.

    Solved through the dual non-negative least squares problem; returns None
    when the constraints are inconsistent.
    """
    m, n = normals.shape
    stacked = np.vstack([normals.T, offsets[np.newaxis, :]])
    target = np.zeros(n + 1)
    target[-1] = 1.0
    dual = _nonneg_lstsq(stacked, target)
    residual = stacked @ dual - target
    if abs(residual[-1]) < 1e-12:
        return None
    z = -residual[:n] / residual[-1]
    if np.min(normals @ z - offsets) < -1e-8:
        return None
    return z


def _min_norm_nonneg(matrix, rhs):
    """Minimum-norm x with matrix @ x = rhs and x >= 0, or None."""
    u, s, vt = np.linalg.svd(matrix)
    rank = int(np.sum(s > _NULLSPACE_RTOL * s[0])) if s.size else 0
    if rank == 0:
        return None
    pinv_rhs = vt[:rank].T @ ((u[:, :rank].T @ rhs) / s[:rank])
    if np.linalg.norm(matrix @ pinv_rhs - rhs) > _EQUALITY_TOL * max(1.0, np.linalg.norm(rhs)):
        return None
    nullspace = vt[rank:].T
    if nullspace.shape[1] == 0:
        if np.min(pinv_rhs) < -1e-10:
            return None
        return np.clip(pinv_rhs, 0.0, None)
    z = _ldp(nullspace, -pinv_rhs)
    if z is None:
        return None
    return np.clip(pinv_rhs + nullspace @ z, 0.0, None)


def distribute_tensions(geometry, pose, desired_wrench, f_min=1.0, residual_tol=1e-6):
    """Minimum-norm cable tensions producing the desired generalized wrench.

    All tensions respect f >= f_min.  Deterministic.  Raises
    InfeasibleWrenchError when no admissible tension set reproduces the
    wrench to within residual_tol.
    """
    if f_min < 0.0:
        raise ValueError("f_min must be non-negative")
    w = np.asarray(desired_wrench, dtype=float).reshape(6)
    matrix = -jacobian(geometry, pose).T
    shifted = w - matrix @ np.full(N_CABLES, f_min)

    x = _min_norm_nonneg(matrix, shifted)
    if x is None:
        x = _nonneg_lstsq(matrix, shifted)
    tensions = f_min + x
    residual = float(np.linalg.norm(matrix @ tensions - w))
    if residual > residual_tol:
        raise InfeasibleWrenchError(
            f"wrench not achievable: residual {residual:.3e} exceeds {residual_tol:.1e}",
            residual=residual,
        )
    return tensions


def gravity_compensation(geometry, pose, inertia, f_min=1.0, residual_tol=1e-6):
    """Tensions that cancel gravity so the platform floats at the pose."""
    return distribute_tensions(
        geometry, pose, -gravity_wrench(pose, inertia), f_min=f_min, residual_tol=residual_tol
    )


def _net_torque(geometry, translation, orientation, tensions, inertia):
    """Generalized torque on the platform from fixed tensions plus gravity."""
    try:
        return kernels.net_torque(
            geometry.frame_anchors,
            geometry.body_anchors,
            translation,
            orientation,
            tensions,
            inertia.mass * GRAVITY,
            inertia.center_of_mass,
        )
    except ValueError as exc:
        raise DegenerateCableError(str(exc)) from exc


_PITCH_LIMIT = np.pi / 2 - 1e-3


def passive_orientation(
    geometry,
    translation,
    tensions,
    inertia,
    torque_tol=1e-10,
    max_iterations=200,
):
    """Equilibrium orientation of the platform under fixed cable tensions.

    Starting from zero orientation, a damped Newton iteration (finite
    difference torque Jacobian) drives the three torque components to zero.
    Returns the orientation angles.  Raises NoEquilibriumError when the
    iteration stalls or the budget runs out.
    """
    translation = np.asarray(translation, dtype=float).reshape(3)
    f = np.asarray(tensions, dtype=float).reshape(N_CABLES)
    qo = np.zeros(3)
    torque = _net_torque(geometry, translation, qo, f, inertia)
    h = 1e-6

    for _ in range(max_iterations):
        norm = np.linalg.norm(torque)
        if norm < torque_tol:
            return qo
        jac = np.empty((3, 3))
        for k in range(3):
            probe = qo.copy()
            probe[k] += h
            probe[1] = np.clip(probe[1], -_PITCH_LIMIT, _PITCH_LIMIT)
            jac[:, k] = (_net_torque(geometry, translation, probe, f, inertia) - torque) / h
        try:
            delta = np.linalg.solve(jac, -torque)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -torque, rcond=None)[0]
        step = np.linalg.norm(delta)
        if step > 0.5:
            delta *= 0.5 / step

        alpha = 1.0
        improved = False
        for _ in range(30):
            trial = qo + alpha * delta
            trial[1] = np.clip(trial[1], -_PITCH_LIMIT, _PITCH_LIMIT)
            torque_try = _net_torque(geometry, translation, trial, f, inertia)
            if np.linalg.norm(torque_try) < norm:
                qo = trial
                torque = torque_try
                improved = True
                break
            alpha *= 0.5
        if not improved:
            raise NoEquilibriumError(
                f"torque search stalled at residual {norm:.3e} N*m"
            )

    raise NoEquilibriumError(
        f"no equilibrium within {max_iterations} iterations "
        f"(residual {np.linalg.norm(torque):.3e} N*m)"
    )


def passive_orientation_angle(geometry, translation, tensions, inertia, **kwargs):
    """Geodesic rotation angle of the passive equilibrium orientation."""
    return geodesic_angle(passive_orientation(geometry, translation, tensions, inertia, **kwargs))
