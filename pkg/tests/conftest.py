import numpy as np
import pytest

from cdprsim import default_geometry


@pytest.fixture
def geometry():
    return default_geometry()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pose_sampler(geometry):
    """Factory for random interior poses with bounded orientation."""
    from cdprsim.geometry import Pose

    lo, hi = geometry.frame_bounds()
    span = hi - lo

    def sample(rng, translation_frac=0.6, orientation_max=0.5):
        center = 0.5 * (lo + hi)
        t = center + (rng.random(3) - 0.5) * translation_frac * span
        o = (rng.random(3) - 0.5) * 2.0 * orientation_max
        return Pose(translation=t, orientation=o)

    return sample
