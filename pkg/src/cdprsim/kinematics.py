"""Cable kinematics: rotation, cable vectors, inverse kinematics, Jacobian.

All functions are pure and safe for concurrent use.  The heavy lifting is
delegated to the selected kernel backend (cdprsim.kernels).
"""

import numpy as np

from . import kernels
from .errors import DegenerateCableError
from .geometry import N_CABLES

# Below this length a cable direction is numerically meaningless.
DEGENERATE_LENGTH = 1e-9


def rotation_xyz(orientation):
    """Rotation matrix Rx(rx) @ Ry(ry) @ Rz(rz) for XYZ Euler angles (rad)."""
    o = np.asarray(orientation, dtype=float).reshape(3)
    if not np.all(np.isfinite(o)):
        raise ValueError("orientation must be finite")
    return kernels.rotation_xyz(o[0], o[1], o[2])


def euler_rate_matrix(orientation):
    """Matrix E mapping XYZ Euler rates to world-frame angular velocity."""
    o = np.asarray(orientation, dtype=float).reshape(3)
    return kernels.euler_rate_matrix(o[0], o[1])


def cable_vectors(geometry, pose):
    """All cable vectors qt + R(qo) @ B_i - A_i as an (8, 3) array."""
    return kernels.cable_vectors(
        geometry.frame_anchors, geometry.body_anchors, pose.translation, pose.orientation
    )


def cable_vector(geometry, pose, index):
    """Single cable vector for cable index 0..7."""
    if not 0 <= index < N_CABLES:
        raise IndexError(f"cable index {index} out of range 0..{N_CABLES - 1}")
    return cable_vectors(geometry, pose)[index]


def inverse_kinematics(geometry, pose):
    """Cable lengths ||AB_i|| for a pose; raises on a degenerate cable."""
    lengths = kernels.cable_lengths(
        geometry.frame_anchors, geometry.body_anchors, pose.translation, pose.orientation
    )
    _check_lengths(lengths)
    return lengths


def jacobian(geometry, pose):
    """Length Jacobian J (8x6) with l_dot = J q_dot.

    Row i is [u_i, ((R B_i) x u_i) @ E]: the translation block is the unit
    cable direction, the orientation block the moment arm composed with the
    Euler-rate map.
    """
    lengths, jac = kernels.lengths_and_jacobian(
        geometry.frame_anchors, geometry.body_anchors, pose.translation, pose.orientation
    )
    _check_lengths(lengths)
    return jac


def _check_lengths(lengths):
    if np.any(lengths < DEGENERATE_LENGTH):
        bad = int(np.argmin(lengths))
        raise DegenerateCableError(
            f"cable {bad} has length {lengths[bad]:.3e} m (< {DEGENERATE_LENGTH} m)"
        )


def geodesic_angle(orientation):
    """Rotation angle of R(orientation): acos((tr R - 1) / 2), in [0, pi].

    Convention-free magnitude of an orientation, used for workspace
    classification instead of the ambiguous Euler-component norm.
    """
    rot = rotation_xyz(orientation)
    c = (np.trace(rot) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))
