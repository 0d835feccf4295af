"""Forward kinematics: recover the pose from measured cable lengths.

Solves min_q ||l - l_q(q)|| subject to box bounds with a damped
Levenberg-Marquardt iteration (8 equations, 6 unknowns).  Only the
translation of the result carries an accuracy contract; the orientation is
reported as-is.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NonPositiveLengthError
from .geometry import N_CABLES, Pose
from .kinematics import DEGENERATE_LENGTH, _check_lengths

DAMPING_MIN = 1e-12
DAMPING_MAX = 1e12


def actual_lengths(l0, delta):
    """Actual cable lengths l_i = l0_i + delta_i; must stay positive."""
    l0 = np.asarray(l0, dtype=float).reshape(N_CABLES)
    delta = np.asarray(delta, dtype=float).reshape(N_CABLES)
    if np.any(l0 <= 0.0):
        raise NonPositiveLengthError("reference lengths must be positive")
    total = l0 + delta
    if np.any(total <= 0.0):
        bad = int(np.argmin(total))
        raise NonPositiveLengthError(
            f"cable {bad}: l0 + delta = {total[bad]:.6f} m is not positive"
        )
    return total


@dataclass(frozen=True)
class FkConfig:
    """Solver settings: box bounds on q plus stopping rules."""

    bounds_lo: np.ndarray
    bounds_hi: np.ndarray
    max_iterations: int = 100
    residual_tol: float = 1e-9
    step_tol: float = 1e-10
    initial_damping: float = 1e-3

    def __post_init__(self):
        lo = np.asarray(self.bounds_lo, dtype=float).reshape(6)
        hi = np.asarray(self.bounds_hi, dtype=float).reshape(6)
        if not np.all(lo < hi):
            raise ValueError("bounds_lo must be strictly below bounds_hi")
        if max(abs(lo[4]), abs(hi[4])) >= np.pi / 2:
            raise ValueError("pitch bounds must stay inside (-pi/2, pi/2)")
        if self.residual_tol <= 0 or self.step_tol <= 0 or self.initial_damping <= 0:
            raise ValueError("tolerances and damping must be positive")
        object.__setattr__(self, "bounds_lo", lo)
        object.__setattr__(self, "bounds_hi", hi)

    @classmethod
    def for_geometry(cls, geometry, margin=0.02, orientation_limit=np.deg2rad(45.0), **kwargs):
        """Translation bounds from the frame box (shrunk by margin), symmetric orientation bounds."""
        lo, hi = geometry.frame_bounds()
        return cls(
            bounds_lo=np.concatenate([lo + margin, -orientation_limit * np.ones(3)]),
            bounds_hi=np.concatenate([hi - margin, orientation_limit * np.ones(3)]),
            **kwargs,
        )


@dataclass(frozen=True)
class FkSolution:
    pose: Pose
    residual_norm: float
    iterations: int
    converged: bool


def fk_solve(geometry, lengths, guess, config):
    """Bounded Levenberg-Marquardt fit of the pose to measured lengths.

    Damping starts at config.initial_damping, x10 on a rejected step, /10 on
    an accepted one; bounds are enforced by clamping after each step.
    Deterministic for fixed inputs.  converged means the iterate reached a
    stationary point: the residual tolerance was met, the step shrank under
    step_tol, or no damping level could decrease the cost any further (the
    normal stop on noisy lengths, where residual_norm ends at the noise
    floor).  converged=False means the iteration budget ran out while steps
    were still improving; the best-so-far pose is returned either way.
    """
    l = np.asarray(lengths, dtype=float).reshape(N_CABLES)
    fa = geometry.frame_anchors
    ba = geometry.body_anchors
    lo, hi = config.bounds_lo, config.bounds_hi

    q = np.clip(guess.as_vector(), lo, hi)
    cost = float(np.linalg.norm(l - kernels.cable_lengths(fa, ba, q[:3], q[3:])))
    lam = config.initial_damping
    iterations = 0
    converged = cost <= config.residual_tol
    eye6 = np.eye(6)

    while not converged and iterations < config.max_iterations:
        lq, jac = kernels.lengths_and_jacobian(fa, ba, q[:3], q[3:])
        _check_lengths(lq)
        r = l - lq
        grad = jac.T @ r
        jtj = jac.T @ jac

        accepted = False
        step_size = 0.0
        while lam <= DAMPING_MAX:
            delta = np.linalg.solve(jtj + lam * eye6, grad)
            q_try = np.clip(q + delta, lo, hi)
            cost_try = float(np.linalg.norm(l - kernels.cable_lengths(fa, ba, q_try[:3], q_try[3:])))
            if cost_try < cost:
                step_size = float(np.linalg.norm(q_try - q))
                q = q_try
                cost = cost_try
                lam = max(lam * 0.1, DAMPING_MIN)
                accepted = True
                break
            lam *= 10.0
        iterations += 1
        if not accepted:
            # no damping level yields a decrease: stationary point of the
            # least-squares cost (typical once noisy lengths hit the noise
            # floor), which is convergence; residual_norm carries the quality
            converged = True
            break
        if cost <= config.residual_tol or step_size <= config.step_tol:
            converged = True

    return FkSolution(
        pose=Pose.from_vector(q),
        residual_norm=cost,
        iterations=iterations,
        converged=converged,
    )


# Orientation tilts (rad) for the multi-start fallback, tried ring by ring.
RESTART_TILTS = (0.35, 0.7)


def fk_solve_robust(geometry, lengths, guess, config):
    """fk_solve with a deterministic multi-start fallback for cold guesses.

    A solve started far from the solution can stall in a wrong-orientation
    local minimum while the translation is already close.  When the first
    attempt misses residual_tol, retry from the best translation so far
    combined with orientation tilts in all eight sign octants, at two tilt
    magnitudes, and keep the lowest-residual result.  On clean lengths the
    first ring recovers nearly every stall; the second catches deep corner
    poses.  Noisy lengths never reach residual_tol, so warm-started callers
    should use fk_solve directly and keep this for cold starts.
    """
    best = fk_solve(geometry, lengths, guess, config)
    if best.residual_norm <= config.residual_tol:
        return best
    lo, hi = config.bounds_lo, config.bounds_hi
    for tilt in RESTART_TILTS:
        translation = best.pose.translation
        for signs in itertools.product((-1.0, 1.0), repeat=3):
            orientation = np.clip(tilt * np.array(signs), lo[3:], hi[3:])
            start = Pose(translation=translation, orientation=orientation)
            solution = fk_solve(geometry, lengths, start, config)
            if solution.residual_norm < best.residual_norm:
                best = solution
            if best.residual_norm <= config.residual_tol:
                return best
    return best


class WarmStartPolicy:
    """Initial-guess policy: previous converged solution, else workspace center.

    The center guess carries zero orientation; a diverged solve resets the
    policy back to the center.
    """

    def __init__(self, geometry):
        self._center = geometry.center_pose()
        self._last = None

    @property
    def is_cold(self):
        """True when no previous converged solution is available."""
        return self._last is None

    def guess(self):
        return self._last if self._last is not None else self._center

    def observe(self, solution):
        self._last = solution.pose if solution.converged else None

    def reset(self):
        self._last = None
