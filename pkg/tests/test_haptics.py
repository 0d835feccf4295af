import numpy as np
import pytest

from cdprsim.errors import AtCenterError, NoEquilibriumError
from cdprsim.geometry import Pose
from cdprsim.haptics import (
    HapticConfig,
    PulseScheduler,
    VirtualWall,
    haptic_tensions,
    is_inside,
    repulsion_demand,
    wall_value,
    zero_orientation_membership,
)
from cdprsim.statics import PlatformInertia, gravity_compensation, gravity_wrench, wrench_from_tensions


@pytest.fixture
def wall():
    return VirtualWall(center=np.zeros(3), radii=[0.175, 0.175, 0.233])


@pytest.fixture
def config():
    return HapticConfig()


class TestVirtualWall:
    def test_rejects_nonpositive_radii(self):
        with pytest.raises(ValueError):
            VirtualWall(center=np.zeros(3), radii=[0.1, 0.0, 0.1])

    def test_rejects_bad_threshold(self):
        with pytest.raises(ValueError):
            VirtualWall(center=np.zeros(3), radii=np.ones(3), orientation_threshold=np.pi / 2)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            HapticConfig(gain=0.0)
        with pytest.raises(ValueError):
            HapticConfig(pulse_duty=1.5)
        with pytest.raises(ValueError):
            HapticConfig(max_pulses=0)


class TestWallValue:
    def test_center_is_zero(self, wall):
        assert wall_value(wall, wall.center) == 0.0

    def test_boundary_is_one(self, wall):
        assert wall_value(wall, wall.center + [0.175, 0.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
        assert wall_value(wall, wall.center + [0.0, 0.0, 0.233]) == pytest.approx(1.0, abs=1e-12)

    def test_matches_direct_formula(self, wall, rng):
        for _ in range(100):
            qt = rng.uniform(-0.3, 0.3, 3)
            expected = sum((qt[k] - wall.center[k]) ** 2 / wall.radii[k] ** 2 for k in range(3))
            assert wall_value(wall, qt) == pytest.approx(expected, abs=1e-14)

    def test_is_inside(self, wall):
        assert is_inside(wall, [0.1, 0.0, 0.0])
        assert not is_inside(wall, [0.2, 0.0, 0.0])


class TestRepulsionDemand:
    def test_zero_inside(self, wall, config, rng):
        for _ in range(50):
            qt = rng.uniform(-0.08, 0.08, 3)
            assert np.array_equal(repulsion_demand(wall, qt, config), np.zeros(6))

    def test_outside_along_x(self, wall, config):
        demand = repulsion_demand(wall, [0.25, 0.0, 0.0], config)
        assert np.allclose(demand, [-config.gain, 0, 0, 0, 0, 0], atol=1e-12)

    def test_points_toward_center_with_gain_magnitude(self, wall, config, rng):
        for _ in range(100):
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            qt = wall.center + direction * (wall.radii.max() * rng.uniform(1.3, 3.0))
            if wall_value(wall, qt) <= 1.0:
                continue
            demand = repulsion_demand(wall, qt, config)
            assert np.linalg.norm(demand[:3]) == pytest.approx(config.gain, abs=1e-9)
            assert np.dot(demand[:3], qt - wall.center) < 0.0
            assert np.array_equal(demand[3:], np.zeros(3))

    def test_at_center_raises(self, wall, config):
        with pytest.raises(AtCenterError):
            repulsion_demand(wall, wall.center, config)


class TestHapticTensions:
    def test_zero_demand_equals_gravity_compensation(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        pose = geometry.center_pose()
        f = haptic_tensions(geometry, pose, np.zeros(6), inertia)
        assert np.array_equal(f, gravity_compensation(geometry, pose, inertia))

    def test_demand_realized_on_top_of_gravity(self, geometry, wall, config, rng):
        inertia = PlatformInertia(mass=0.328)
        for _ in range(10):
            pose = Pose(translation=rng.uniform(-0.06, 0.06, 3))
            demand = repulsion_demand(wall, wall.center + [0.0, 0.0, 0.3], config)
            f = haptic_tensions(geometry, pose, demand, inertia)
            assert np.all(f >= 1.0 - 1e-12)
            total = wrench_from_tensions(geometry, pose, f) + gravity_wrench(pose, inertia)
            assert np.allclose(total, demand, atol=1e-6)


class TestPulseScheduler:
    def run(self, scheduler, breach_fn, duration, dt=0.005):
        times = np.arange(0.0, duration, dt)
        return times, np.array([scheduler.update(t, breach_fn(t)) for t in times])

    def count_bursts(self, factors):
        rising = np.flatnonzero(np.diff(np.concatenate([[0.0], factors])) > 0.5)
        return len(rising)

    def test_never_breached(self, config):
        _, factors = self.run(PulseScheduler(config), lambda t: False, 2.0)
        assert np.all(factors == 0.0)

    def test_sustained_breach_gives_exactly_three_bursts(self, config):
        times, factors = self.run(PulseScheduler(config), lambda t: True, 2.5)
        assert self.count_bursts(factors) == 3
        # quiet after the cap: 3 periods of 0.6 s
        assert np.all(factors[times >= 1.81] == 0.0)
        # first burst active for the duty fraction of the first period
        assert np.all(factors[times < 0.29] == 1.0)

    def test_short_breach_gives_one_burst(self, config):
        _, factors = self.run(PulseScheduler(config), lambda t: t < 0.4, 1.5)
        assert self.count_bursts(factors) == 1

    def test_reset_starts_a_new_window(self, config):
        breach = lambda t: t < 2.0 or t >= 3.0
        _, factors = self.run(PulseScheduler(config), breach, 6.0)
        assert self.count_bursts(factors) == 6

    def test_deterministic(self, config):
        breach = lambda t: 0.5 <= t < 2.2
        _, a = self.run(PulseScheduler(config), breach, 3.0)
        _, b = self.run(PulseScheduler(config), breach, 3.0)
        assert np.array_equal(a, b)

    def test_rejects_time_reversal(self, config):
        scheduler = PulseScheduler(config)
        scheduler.update(1.0, True)
        with pytest.raises(ValueError):
            scheduler.update(0.5, True)

    def test_reset_allows_rewind(self, config):
        scheduler = PulseScheduler(config)
        scheduler.update(1.0, True)
        scheduler.reset()
        assert scheduler.update(0.0, False) == 0.0


class TestZeroOrientationMembership:
    def test_center_is_member(self, geometry):
        from cdprsim.statics import passive_orientation

        inertia = PlatformInertia(mass=0.328)
        tensions = gravity_compensation(geometry, geometry.center_pose(), inertia)
        fn = lambda qt: passive_orientation(geometry, qt, tensions, inertia)
        assert zero_orientation_membership(geometry.center, fn, np.radians(10.0))

    def test_large_tilt_is_not_member(self):
        fn = lambda qt: np.array([np.radians(12.0), 0.0, 0.0])
        assert not zero_orientation_membership(np.zeros(3), fn, np.radians(10.0))
        assert zero_orientation_membership(np.zeros(3), fn, np.radians(15.0))

    def test_no_equilibrium_is_not_member(self):
        def fn(qt):
            raise NoEquilibriumError("stalled")

        assert not zero_orientation_membership(np.zeros(3), fn, np.radians(10.0))
