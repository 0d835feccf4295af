"""Workspace characterization: passive-orientation sampling and wall fitting.

Samples the translational workspace on a grid (or Monte Carlo cloud),
records the passive equilibrium orientation at each point, classifies the
zero-orientation region, and fits the largest axis-aligned ellipsoid that
stays essentially pure in members.  All routines are deterministic.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoEquilibriumError, TooFewMembersError
from .haptics import VirtualWall
from .kinematics import geodesic_angle
from .statics import passive_orientation

MIN_MEMBERS = 100


@dataclass(frozen=True)
class WorkspaceSample:
    """Passive-orientation result at one translation sample."""

    qt: np.ndarray
    passive_orientation: np.ndarray
    orientation_magnitude: float
    feasible: bool


@dataclass(frozen=True)
class WorkspaceReport:
    """Summary of a workspace sweep."""

    sample_count: int
    feasible_count: int
    fractions: dict
    fitted_ellipsoid: VirtualWall
    inside_volume: float
    total_volume: float


def _sample_box(geometry, fraction):
    lo, hi = geometry.frame_bounds()
    center = 0.5 * (lo + hi)
    half = 0.5 * fraction * (hi - lo)
    return center - half, center + half


def sample_workspace(
    geometry,
    tensions,
    inertia,
    count=9261,
    fraction=0.8,
    sampler="grid",
    seed=0,
):
    """Evaluate the passive orientation over the inner frame volume.

    Points come from a uniform grid (default, per-axis count chosen to reach
    at least `count` samples) or a seeded Monte Carlo cloud.  Points where
    the torque root-find fails are recorded as infeasible with an infinite
    magnitude.
    """
    if count < 1:
        raise ValueError("count must be positive")
    lo, hi = _sample_box(geometry, fraction)
    if sampler == "grid":
        per_axis = math.ceil(count ** (1.0 / 3.0))
        axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(3)]
        xs, ys, zs = np.meshgrid(*axes, indexing="ij")
        points = np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])
    elif sampler == "monte-carlo":
        rng = np.random.default_rng(seed)
        points = lo + rng.random((count, 3)) * (hi - lo)
    else:
        raise ValueError(f"unknown sampler {sampler!r}, expected 'grid' or 'monte-carlo'")

    samples = []
    for qt in points:
        try:
            qo = passive_orientation(geometry, qt, tensions, inertia)
            samples.append(
                WorkspaceSample(
                    qt=qt.copy(),
                    passive_orientation=qo,
                    orientation_magnitude=geodesic_angle(qo),
                    feasible=True,
                )
            )
        except NoEquilibriumError:
            samples.append(
                WorkspaceSample(
                    qt=qt.copy(),
                    passive_orientation=np.zeros(3),
                    orientation_magnitude=math.inf,
                    feasible=False,
                )
            )
    return samples


def fraction_within(samples, threshold):
    """Fraction of feasible samples whose orientation magnitude is <= threshold."""
    magnitudes = np.array([s.orientation_magnitude for s in samples if s.feasible])
    if magnitudes.size == 0:
        return 0.0
    return float(np.mean(magnitudes <= threshold))


def _purity_ok(points, members, center, radii, min_purity):
    scaled = (points - center) / radii
    enclosed = np.einsum("ij,ij->i", scaled, scaled) <= 1.0
    total = int(np.count_nonzero(enclosed))
    if total == 0:
        return True
    good = int(np.count_nonzero(enclosed & members))
    return good / total >= min_purity


def fit_wall_ellipsoid(samples, threshold, min_purity=0.99, orientation_threshold=None):
    """Largest axis-aligned ellipsoid over the zero-orientation members.

    Members are feasible samples with orientation magnitude at most
    threshold.  The ellipsoid is seeded with the member cloud's aspect ratio
    and grown by a uniform scale search, then refined by cyclic per-axis
    binary searches with recentering, while at least min_purity of the
    enclosed samples remain members and the ellipsoid stays inside the
    sampled bounding box.  Deterministic.  Raises TooFewMembersError below
    100 members.
    """
    points = np.array([s.qt for s in samples])
    members = np.array([s.feasible and s.orientation_magnitude <= threshold for s in samples])
    n_members = int(np.count_nonzero(members))
    if n_members < MIN_MEMBERS:
        raise TooFewMembersError(
            f"wall fit needs at least {MIN_MEMBERS} member samples, got {n_members}"
        )

    box_lo = points.min(axis=0)
    box_hi = points.max(axis=0)
    center = np.median(points[members], axis=0)
    span = box_hi - box_lo
    tol = 1e-4 * float(np.max(span))

    box_pad_lo = box_lo - 1e-12
    box_pad_hi = box_hi + 1e-12

    def admissible(c, r):
        if np.any(c - r < box_pad_lo) or np.any(c + r > box_pad_hi):
            return False
        return _purity_ok(points, members, c, r, min_purity)

    # Grow an aspect-preserving seed first so intermediate ellipsoids always
    # enclose enough samples for the purity test to bite; a lone axis run out
    # to the box cap would pass vacuously through empty space.
    shape = np.maximum(np.std(points[members], axis=0), 1e-3 * float(np.max(span)))
    clearance = np.minimum(center - box_lo, box_hi - center)
    scale_cap = float(np.min(clearance / shape))
    if scale_cap > 0 and admissible(center, scale_cap * shape):
        scale = scale_cap
    else:
        low, high = 0.0, max(scale_cap, 0.0)
        while high - low > tol / float(np.max(shape)):
            mid = 0.5 * (low + high)
            if admissible(center, mid * shape):
                low = mid
            else:
                high = mid
        scale = low
    radii = np.maximum(1e-4, scale * shape)

    def axis_max(c, r, axis):
        # largest admissible radius along this axis, all else fixed
        cap = min(c[axis] - box_lo[axis], box_hi[axis] - c[axis])
        trial = r.copy()
        trial[axis] = cap
        if cap > 0 and admissible(c, trial):
            return cap
        low, high = min(r[axis], cap), cap
        while high - low > tol:
            mid = 0.5 * (low + high)
            trial[axis] = mid
            if admissible(c, trial):
                low = mid
            else:
                high = mid
        return low

    for _ in range(8):
        # damped simultaneous growth keeps the purity slack shared between
        # axes; growing one axis to exhaustion first would let it spend the
        # whole impurity budget on its own poles
        candidates = np.array([axis_max(center, radii, k) for k in range(3)])
        gamma = 0.5
        while gamma > 1e-3:
            grown = radii + gamma * (candidates - radii)
            if admissible(center, grown):
                radii = grown
                break
            gamma *= 0.5
        for axis in range(3):
            # recenter to the midpoint of the admissible slide interval
            slide = np.zeros(3)
            shifts = []
            for sign in (-1.0, 1.0):
                low, high = 0.0, 0.5 * span[axis]
                while high - low > tol:
                    mid = 0.5 * (low + high)
                    slide[axis] = sign * mid
                    if admissible(center + slide, radii):
                        low = mid
                    else:
                        high = mid
                shifts.append(sign * low)
            center = center.copy()
            center[axis] += 0.5 * (shifts[0] + shifts[1])

    # one exact pass so each radius ends maximal given the other two
    for axis in range(3):
        radii[axis] = axis_max(center, radii, axis)

    if orientation_threshold is None:
        orientation_threshold = threshold
    return VirtualWall(center=center, radii=radii, orientation_threshold=orientation_threshold)


def ellipsoid_volume(wall):
    """Volume of the wall ellipsoid, (4/3) pi r_x r_y r_z."""
    radii = np.asarray(wall.radii, dtype=float)
    if np.any(radii <= 0.0):
        raise ValueError("radii must be positive")
    return float(4.0 / 3.0 * math.pi * np.prod(radii))


def build_report(samples, fit_threshold=math.radians(10.0), table_degrees=(5, 10, 15, 20, 30)):
    """Assemble the standard workspace report from a sample sweep."""
    points = np.array([s.qt for s in samples])
    box = points.max(axis=0) - points.min(axis=0)
    wall = fit_wall_ellipsoid(samples, fit_threshold)
    feasible = sum(1 for s in samples if s.feasible)
    fractions = {deg: fraction_within(samples, math.radians(deg)) for deg in table_degrees}
    return WorkspaceReport(
        sample_count=len(samples),
        feasible_count=feasible,
        fractions=fractions,
        fitted_ellipsoid=wall,
        inside_volume=ellipsoid_volume(wall),
        total_volume=float(np.prod(box)) * (feasible / max(len(samples), 1)),
    )


def format_report(report):
    """Human-readable text form of a workspace report."""
    wall = report.fitted_ellipsoid
    lines = [
        "workspace report",
        f"samples: {report.sample_count} ({report.feasible_count} feasible)",
        "fraction of feasible samples within threshold:",
    ]
    for deg, frac in sorted(report.fractions.items()):
        lines.append(f"  {deg:3d} deg: {frac:.4f}")
    lines.extend(
        [
            f"fitted ellipsoid center [m]: {wall.center[0]:.6f} {wall.center[1]:.6f} {wall.center[2]:.6f}",
            f"fitted ellipsoid radii [m]:  {wall.radii[0]:.6f} {wall.radii[1]:.6f} {wall.radii[2]:.6f}",
            f"zero-orientation volume [m^3]: {report.inside_volume:.6e}",
            f"feasible sampled volume [m^3]: {report.total_volume:.6e}",
        ]
    )
    return "\n".join(lines) + "\n"


def write_samples(samples, path):
    """Dump one sample per line: qt, passive orientation, magnitude, feasible."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# qt_x qt_y qt_z rx ry rz magnitude feasible\n")
        for s in samples:
            fields = [repr(float(v)) for v in (*s.qt, *s.passive_orientation, s.orientation_magnitude)]
            fh.write(" ".join(fields) + f" {int(s.feasible)}\n")
