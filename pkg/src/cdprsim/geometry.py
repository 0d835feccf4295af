"""Robot geometry: end-effector pose and cable anchor layout.

Conventions: SI units throughout (meters, radians).  Frame anchors live in
the fixed world frame {0}, body anchors in the platform frame {1}.
Orientation is XYZ Euler (rotate about x, then y, then z), valid for
|pitch| < pi/2.
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

N_CABLES = 8

# Euler XYZ pitch must stay clear of the gimbal-lock singularity at +-pi/2.
MAX_PITCH = np.pi / 2


def _as_vec3(value, name):
    arr = np.asarray(value, dtype=float).reshape(3).copy()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True)
class Pose:
    """End-effector coordinates: translation (m) plus XYZ Euler orientation (rad)."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation, "translation"))
        object.__setattr__(self, "orientation", _as_vec3(self.orientation, "orientation"))
        if abs(self.orientation[1]) >= MAX_PITCH:
            raise ValueError(
                f"orientation pitch {self.orientation[1]:.4f} rad outside the "
                f"supported Euler XYZ region (|pitch| < pi/2)"
            )

    def as_vector(self):
        """Return the 6-vector [x, y, z, rx, ry, rz]."""
        return np.concatenate([self.translation, self.orientation])

    @classmethod
    def from_vector(cls, q):
        q = np.asarray(q, dtype=float).reshape(6)
        return cls(translation=q[:3], orientation=q[3:])


@dataclass(frozen=True)
class CdprGeometry:
    """Anchor layout of the 8-cable robot.

    frame_anchors: (8, 3) cable exit points on the fixed frame, world frame {0}.
    body_anchors:  (8, 3) attachment points on the platform, body frame {1}.
    Cable i runs from frame_anchors[i] to body_anchors[i].
    """

    frame_anchors: np.ndarray
    body_anchors: np.ndarray

    def __post_init__(self):
        fa = np.ascontiguousarray(self.frame_anchors, dtype=float)
        ba = np.ascontiguousarray(self.body_anchors, dtype=float)
        if fa.shape != (N_CABLES, 3) or ba.shape != (N_CABLES, 3):
            raise ValueError(
                f"expected {N_CABLES} frame and body anchors of 3 coordinates, "
                f"got {fa.shape} and {ba.shape}"
            )
        if not (np.all(np.isfinite(fa)) and np.all(np.isfinite(ba))):
            raise ValueError("anchor coordinates must be finite")
        # Coincident frame anchors would make two cables indistinguishable.
        for i in range(N_CABLES):
            for j in range(i + 1, N_CABLES):
                if np.linalg.norm(fa[i] - fa[j]) < 1e-9:
                    raise ValueError(f"frame anchors {i} and {j} coincide")
        object.__setattr__(self, "frame_anchors", fa)
        object.__setattr__(self, "body_anchors", ba)

    @property
    def center(self):
        """Geometric center of the frame anchors (workspace center)."""
        return self.frame_anchors.mean(axis=0)

    def frame_bounds(self):
        """Axis-aligned bounding box of the frame anchors: (lo, hi)."""
        return self.frame_anchors.min(axis=0), self.frame_anchors.max(axis=0)

    def center_pose(self):
        return Pose(translation=self.center)


def default_geometry(frame_size=0.7, body_size=0.06):
    """Default desk-scale rig: cube frame, cuboid platform, crossed cables.

    Frame anchors sit at the corners of a cube centered on the origin.  The
    lower four cables cross in x, the upper four in y, which gives the rig
    torque authority about all three axes while keeping it mirror-symmetric
    in both the x and y planes.
    """
    ha = frame_size / 2.0
    hb = body_size / 2.0
    corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    frame = []
    body = []
    for sx, sy in corners:  # lower level: frame corner -> x-mirrored platform corner
        frame.append((ha * sx, ha * sy, -ha))
        body.append((-hb * sx, hb * sy, -hb))
    for sx, sy in corners:  # upper level: frame corner -> y-mirrored platform corner
        frame.append((ha * sx, ha * sy, ha))
        body.append((hb * sx, -hb * sy, hb))
    return CdprGeometry(frame_anchors=np.array(frame), body_anchors=np.array(body))


def load_geometry(path):
    """Load a geometry file (YAML with frame_anchors/body_anchors, meters)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict) or "frame_anchors" not in raw or "body_anchors" not in raw:
        raise ValueError(f"{path}: expected mapping with frame_anchors and body_anchors")
    geom = CdprGeometry(
        frame_anchors=np.asarray(raw["frame_anchors"], dtype=float),
        body_anchors=np.asarray(raw["body_anchors"], dtype=float),
    )
    # Sanity bound for a desk-scale platform; calibrated files should never trip this.
    norms = np.linalg.norm(geom.body_anchors, axis=1)
    if np.any(norms >= 0.2):
        raise ValueError(f"{path}: body anchor {int(np.argmax(norms))} further than 0.2 m from the platform origin")
    return geom


def save_geometry(geometry, path):
    data = {
        "frame_anchors": [[float(v) for v in row] for row in geometry.frame_anchors],
        "body_anchors": [[float(v) for v in row] for row in geometry.body_anchors],
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
