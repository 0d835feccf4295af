"""Pure-numpy kernel implementations.

Same call signatures as the compiled kernels in _native; used as the
fallback backend and as the comparison baseline in the kernel benchmark.
"""

import numpy as np

BACKEND = "python"


def rotation_xyz(rx, ry, rz):
    """Rotation matrix R = Rx(rx) @ Ry(ry) @ Rz(rz)."""
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    return np.array(
        [
            [cy * cz, -cy * sz, sy],
            [cx * sz + sx * sy * cz, cx * cz - sx * sy * sz, -sx * cy],
            [sx * sz - cx * sy * cz, sx * cz + cx * sy * sz, cx * cy],
        ]
    )


def euler_rate_matrix(rx, ry):
    """Map XYZ Euler angle rates to world-frame angular velocity.

    Columns are the instantaneous rotation axes expressed in the world
    frame: x-hat, Rx(rx)*y-hat, Rx(rx)*Ry(ry)*z-hat.
    """
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    return np.array(
        [
            [1.0, 0.0, sy],
            [0.0, cx, -sx * cy],
            [0.0, sx, cx * cy],
        ]
    )


def cable_vectors(frame_anchors, body_anchors, qt, qo):
    """Cable vectors qt + R(qo) @ B_i - A_i, shape (n, 3)."""
    rot = rotation_xyz(qo[0], qo[1], qo[2])
    return qt[None, :] + body_anchors @ rot.T - frame_anchors


def cable_lengths(frame_anchors, body_anchors, qt, qo):
    """Euclidean cable lengths, shape (n,)."""
    vec = cable_vectors(frame_anchors, body_anchors, qt, qo)
    return np.linalg.norm(vec, axis=1)


def lengths_and_jacobian(frame_anchors, body_anchors, qt, qo):
    """Cable lengths and the (n, 6) length Jacobian d l / d q.

    Row i is [u_i, ((R B_i) x u_i) @ E] with u_i the unit cable direction
    and E the Euler-rate map.  Caller is responsible for rejecting
    degenerate (near-zero length) cables before using the Jacobian.
    """
    rot = rotation_xyz(qo[0], qo[1], qo[2])
    arms = body_anchors @ rot.T  # R B_i in world frame
    vec = qt[None, :] + arms - frame_anchors
    lengths = np.linalg.norm(vec, axis=1)
    safe = np.where(lengths > 0.0, lengths, 1.0)
    units = vec / safe[:, None]
    moments = np.cross(arms, units)
    jac = np.empty((frame_anchors.shape[0], 6))
    jac[:, :3] = units
    jac[:, 3:] = moments @ euler_rate_matrix(qo[0], qo[1])
    return lengths, jac


def net_torque(frame_anchors, body_anchors, qt, qo, tensions, mg, com):
    """Generalized torque from fixed cable tensions plus a gravity moment.

    Returns E^T (-sum_i f_i (R B_i) x u_i + (R com) x (0, 0, -mg)).
    Raises ValueError on a degenerate (near-zero length) cable.
    """
    rot = rotation_xyz(qo[0], qo[1], qo[2])
    arms = body_anchors @ rot.T
    vec = qt[None, :] + arms - frame_anchors
    lengths = np.linalg.norm(vec, axis=1)
    if np.any(lengths < 1e-9):
        raise ValueError("degenerate cable in torque evaluation")
    units = vec / lengths[:, None]
    ax, ay, az = arms[:, 0], arms[:, 1], arms[:, 2]
    ux, uy, uz = units[:, 0], units[:, 1], units[:, 2]
    world = -np.array(
        [
            np.dot(tensions, ay * uz - az * uy),
            np.dot(tensions, az * ux - ax * uz),
            np.dot(tensions, ax * uy - ay * ux),
        ]
    )
    if mg != 0.0:
        cw = rot @ com
        world[0] += -cw[1] * mg
        world[1] += cw[0] * mg
    return euler_rate_matrix(qo[0], qo[1]).T @ world
