# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel implementations (hot inner loops of the simulator).

Mirrors the signatures of _reference; plain C loops, no BLAS, so results
stay deterministic and allocation per call is minimal.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

BACKEND = "native"


cdef inline void _rotation(double rx, double ry, double rz, double* r) nogil:
    cdef double cx = cos(rx), sx = sin(rx)
    cdef double cy = cos(ry), sy = sin(ry)
    cdef double cz = cos(rz), sz = sin(rz)
    r[0] = cy * cz
    r[1] = -cy * sz
    r[2] = sy
    r[3] = cx * sz + sx * sy * cz
    r[4] = cx * cz - sx * sy * sz
    r[5] = -sx * cy
    r[6] = sx * sz - cx * sy * cz
    r[7] = sx * cz + cx * sy * sz
    r[8] = cx * cy


cdef inline void _rate_map(double rx, double ry, double* e) nogil:
    cdef double cx = cos(rx), sx = sin(rx)
    cdef double cy = cos(ry), sy = sin(ry)
    e[0] = 1.0
    e[1] = 0.0
    e[2] = sy
    e[3] = 0.0
    e[4] = cx
    e[5] = -sx * cy
    e[6] = 0.0
    e[7] = sx
    e[8] = cx * cy


def rotation_xyz(double rx, double ry, double rz):
    """Rotation matrix R = Rx(rx) @ Ry(ry) @ Rz(rz)."""
    cdef cnp.ndarray[double, ndim=2] out = np.empty((3, 3))
    _rotation(rx, ry, rz, <double*> out.data)
    return out


def euler_rate_matrix(double rx, double ry):
    """Map XYZ Euler angle rates to world-frame angular velocity."""
    cdef cnp.ndarray[double, ndim=2] out = np.empty((3, 3))
    _rate_map(rx, ry, <double*> out.data)
    return out


def cable_vectors(double[:, ::1] frame_anchors, double[:, ::1] body_anchors,
                  double[::1] qt, double[::1] qo):
    """Cable vectors qt + R(qo) @ B_i - A_i, shape (n, 3)."""
    cdef Py_ssize_t n = frame_anchors.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n, 3))
    cdef double[:, ::1] v = out
    cdef double r[9]
    cdef double bx, by, bz
    cdef Py_ssize_t i
    _rotation(qo[0], qo[1], qo[2], r)
    for i in range(n):
        bx = body_anchors[i, 0]
        by = body_anchors[i, 1]
        bz = body_anchors[i, 2]
        v[i, 0] = qt[0] + r[0] * bx + r[1] * by + r[2] * bz - frame_anchors[i, 0]
        v[i, 1] = qt[1] + r[3] * bx + r[4] * by + r[5] * bz - frame_anchors[i, 1]
        v[i, 2] = qt[2] + r[6] * bx + r[7] * by + r[8] * bz - frame_anchors[i, 2]
    return out


def cable_lengths(double[:, ::1] frame_anchors, double[:, ::1] body_anchors,
                  double[::1] qt, double[::1] qo):
    """Euclidean cable lengths, shape (n,)."""
    cdef Py_ssize_t n = frame_anchors.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double[::1] l = out
    cdef double r[9]
    cdef double bx, by, bz, vx, vy, vz
    cdef Py_ssize_t i
    _rotation(qo[0], qo[1], qo[2], r)
    for i in range(n):
        bx = body_anchors[i, 0]
        by = body_anchors[i, 1]
        bz = body_anchors[i, 2]
        vx = qt[0] + r[0] * bx + r[1] * by + r[2] * bz - frame_anchors[i, 0]
        vy = qt[1] + r[3] * bx + r[4] * by + r[5] * bz - frame_anchors[i, 1]
        vz = qt[2] + r[6] * bx + r[7] * by + r[8] * bz - frame_anchors[i, 2]
        l[i] = sqrt(vx * vx + vy * vy + vz * vz)
    return out


def lengths_and_jacobian(double[:, ::1] frame_anchors, double[:, ::1] body_anchors,
                         double[::1] qt, double[::1] qo):
    """Cable lengths and the (n, 6) length Jacobian d l / d q."""
    cdef Py_ssize_t n = frame_anchors.shape[0]
    cdef cnp.ndarray[double, ndim=1] lengths = np.empty(n)
    cdef cnp.ndarray[double, ndim=2] jac = np.empty((n, 6))
    cdef double[::1] l = lengths
    cdef double[:, ::1] j = jac
    cdef double r[9]
    cdef double e[9]
    cdef double bx, by, bz, ax, ay, az, vx, vy, vz
    cdef double ln, inv, ux, uy, uz, mx, my, mz
    cdef Py_ssize_t i
    _rotation(qo[0], qo[1], qo[2], r)
    _rate_map(qo[0], qo[1], e)
    for i in range(n):
        bx = body_anchors[i, 0]
        by = body_anchors[i, 1]
        bz = body_anchors[i, 2]
        # arm = R @ B_i (moment arm from the RCM point, world frame)
        ax = r[0] * bx + r[1] * by + r[2] * bz
        ay = r[3] * bx + r[4] * by + r[5] * bz
        az = r[6] * bx + r[7] * by + r[8] * bz
        vx = qt[0] + ax - frame_anchors[i, 0]
        vy = qt[1] + ay - frame_anchors[i, 1]
        vz = qt[2] + az - frame_anchors[i, 2]
        ln = sqrt(vx * vx + vy * vy + vz * vz)
        l[i] = ln
        inv = 1.0 / ln if ln > 0.0 else 0.0
        ux = vx * inv
        uy = vy * inv
        uz = vz * inv
        j[i, 0] = ux
        j[i, 1] = uy
        j[i, 2] = uz
        mx = ay * uz - az * uy
        my = az * ux - ax * uz
        mz = ax * uy - ay * ux
        j[i, 3] = mx * e[0] + my * e[3] + mz * e[6]
        j[i, 4] = mx * e[1] + my * e[4] + mz * e[7]
        j[i, 5] = mx * e[2] + my * e[5] + mz * e[8]
    return lengths, jac


def net_torque(double[:, ::1] frame_anchors, double[:, ::1] body_anchors,
               double[::1] qt, double[::1] qo, double[::1] tensions,
               double mg, double[::1] com):
    """Generalized torque from fixed cable tensions plus a gravity moment.

    Returns E^T (-sum_i f_i (R B_i) x u_i + (R com) x (0, 0, -mg)).
    Raises ValueError on a degenerate (near-zero length) cable.
    """
    cdef Py_ssize_t n = frame_anchors.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(3)
    cdef double[::1] o = out
    cdef double r[9]
    cdef double e[9]
    cdef double bx, by, bz, ax, ay, az, vx, vy, vz
    cdef double ln, inv, ux, uy, uz, f
    cdef double wx = 0.0, wy = 0.0, wz = 0.0
    cdef double cx, cy
    cdef Py_ssize_t i
    _rotation(qo[0], qo[1], qo[2], r)
    _rate_map(qo[0], qo[1], e)
    for i in range(n):
        bx = body_anchors[i, 0]
        by = body_anchors[i, 1]
        bz = body_anchors[i, 2]
        ax = r[0] * bx + r[1] * by + r[2] * bz
        ay = r[3] * bx + r[4] * by + r[5] * bz
        az = r[6] * bx + r[7] * by + r[8] * bz
        vx = qt[0] + ax - frame_anchors[i, 0]
        vy = qt[1] + ay - frame_anchors[i, 1]
        vz = qt[2] + az - frame_anchors[i, 2]
        ln = sqrt(vx * vx + vy * vy + vz * vz)
        if ln < 1e-9:
            raise ValueError("degenerate cable in torque evaluation")
        inv = 1.0 / ln
        ux = vx * inv
        uy = vy * inv
        uz = vz * inv
        f = tensions[i]
        wx -= f * (ay * uz - az * uy)
        wy -= f * (az * ux - ax * uz)
        wz -= f * (ax * uy - ay * ux)
    if mg != 0.0:
        # (R com) x (0, 0, -mg) has no z component
        cx = r[0] * com[0] + r[1] * com[1] + r[2] * com[2]
        cy = r[3] * com[0] + r[4] * com[1] + r[5] * com[2]
        wx += -cy * mg
        wy += cx * mg
    o[0] = wx * e[0] + wy * e[3] + wz * e[6]
    o[1] = wx * e[1] + wy * e[4] + wz * e[7]
    o[2] = wx * e[2] + wy * e[5] + wz * e[8]
    return out
