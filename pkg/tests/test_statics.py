import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cdprsim.errors import InfeasibleWrenchError, NoEquilibriumError
from cdprsim.geometry import Pose
from cdprsim.kinematics import cable_vectors, geodesic_angle
from cdprsim.statics import (
    GRAVITY,
    PlatformInertia,
    distribute_tensions,
    gravity_compensation,
    gravity_wrench,
    passive_orientation,
    passive_orientation_angle,
    wrench_from_tensions,
)


def euler_rate(o):
    sx, cx = np.sin(o[0]), np.cos(o[0])
    sy, cy = np.sin(o[1]), np.cos(o[1])
    return np.array([[1.0, 0.0, sy], [0.0, cx, -sx * cy], [0.0, sx, cx * cy]])


class TestWrenchFromTensions:
    def test_matches_per_cable_summation(self, geometry, pose_sampler, rng):
        # oracle: sum pulls of -f_i u_i and their moments cable by cable
        for _ in range(50):
            pose = pose_sampler(rng)
            f = rng.uniform(0.5, 5.0, 8)
            rot = Rotation.from_euler("XYZ", pose.orientation).as_matrix()
            vectors = cable_vectors(geometry, pose)
            force = np.zeros(3)
            torque_world = np.zeros(3)
            for i in range(8):
                unit = vectors[i] / np.linalg.norm(vectors[i])
                force += -f[i] * unit
                torque_world += np.cross(rot @ geometry.body_anchors[i], -f[i] * unit)
            expected = np.concatenate([force, euler_rate(pose.orientation).T @ torque_world])
            assert np.allclose(wrench_from_tensions(geometry, pose, f), expected, atol=1e-10)

    def test_uniform_tension_at_center_cancels(self, geometry):
        # the symmetric rig balances equal tensions exactly
        w = wrench_from_tensions(geometry, geometry.center_pose(), np.full(8, 3.0))
        assert np.allclose(w, 0.0, atol=1e-13)


class TestGravityWrench:
    def test_point_mass(self):
        w = gravity_wrench(Pose(), PlatformInertia(mass=0.328))
        assert np.allclose(w, [0.0, 0.0, -0.328 * GRAVITY, 0.0, 0.0, 0.0], atol=1e-15)

    def test_offset_center_of_mass_torque(self):
        inertia = PlatformInertia(mass=0.5, center_of_mass=[0.02, 0.0, 0.0])
        w = gravity_wrench(Pose(), inertia)
        # at zero orientation the generalized torque equals com x F
        assert np.allclose(w[3:], np.cross([0.02, 0.0, 0.0], [0.0, 0.0, -0.5 * GRAVITY]), atol=1e-15)

    def test_mass_validation(self):
        with pytest.raises(ValueError):
            PlatformInertia(mass=-1.0)


def kkt_min_norm(geometry, pose, f, f_min, tol=1e-6):
    """First-order optimality of min ||f - f_min|| s.t. -J^T f = w, f >= f_min."""
    from cdprsim.kinematics import jacobian

    matrix = -jacobian(geometry, pose).T
    x = f - f_min
    active = x <= 1e-9
    free = ~active
    if not np.any(free):
        return True
    # stationarity on the free set pins down the multiplier of the equality
    lam, *_ = np.linalg.lstsq(matrix.T[free], x[free], rcond=None)
    if np.linalg.norm(matrix.T[free] @ lam - x[free]) > tol:
        return False
    # bound multipliers -(M^T lam) must be non-negative on the active set
    return bool(np.all((matrix.T @ lam)[active] <= tol))


class TestDistributeTensions:
    def test_round_trip_random_feasible(self, geometry, pose_sampler, rng):
        for _ in range(50):
            pose = pose_sampler(rng, translation_frac=0.5, orientation_max=0.3)
            f_true = 1.0 + rng.uniform(0.0, 4.0, 8)
            w = wrench_from_tensions(geometry, pose, f_true)
            f = distribute_tensions(geometry, pose, w, f_min=1.0)
            assert np.all(f >= 1.0 - 1e-12)
            assert np.linalg.norm(wrench_from_tensions(geometry, pose, f) - w) < 1e-6
            # minimum norm above the floor: never worse than the generating set
            assert np.linalg.norm(f - 1.0) <= np.linalg.norm(f_true - 1.0) + 1e-9

    def test_first_order_optimality(self, geometry, pose_sampler, rng):
        for _ in range(25):
            pose = pose_sampler(rng, translation_frac=0.4, orientation_max=0.25)
            w = wrench_from_tensions(geometry, pose, 1.0 + rng.uniform(0.0, 3.0, 8))
            f = distribute_tensions(geometry, pose, w, f_min=1.0)
            assert kkt_min_norm(geometry, pose, f, 1.0)

    def test_beats_local_perturbations(self, geometry, pose_sampler, rng):
        # probe the feasible set near the reported optimum for anything shorter
        from cdprsim.kinematics import jacobian

        pose = pose_sampler(rng, translation_frac=0.4, orientation_max=0.2)
        w = wrench_from_tensions(geometry, pose, 1.0 + rng.uniform(0.0, 3.0, 8))
        f = distribute_tensions(geometry, pose, w, f_min=1.0)
        matrix = -jacobian(geometry, pose).T
        _, _, vt = np.linalg.svd(matrix)
        nullspace = vt[6:].T
        for _ in range(200):
            candidate = f + nullspace @ rng.normal(0.0, 0.3, nullspace.shape[1])
            if np.all(candidate >= 1.0 - 1e-12):
                assert np.linalg.norm(candidate - 1.0) >= np.linalg.norm(f - 1.0) - 1e-9

    def test_zero_wrench_at_center_gives_uniform_minimum(self, geometry):
        f = distribute_tensions(geometry, geometry.center_pose(), np.zeros(6), f_min=1.0)
        assert np.allclose(f, 1.0, atol=1e-9)

    def test_respects_shifted_floor(self, geometry, pose_sampler, rng):
        pose = pose_sampler(rng, translation_frac=0.3, orientation_max=0.2)
        w = wrench_from_tensions(geometry, pose, 2.0 + rng.uniform(0.0, 2.0, 8))
        f = distribute_tensions(geometry, pose, w, f_min=2.0)
        assert np.all(f >= 2.0 - 1e-12)
        assert np.linalg.norm(wrench_from_tensions(geometry, pose, f) - w) < 1e-6

    def test_deterministic(self, geometry, pose_sampler, rng):
        pose = pose_sampler(rng)
        w = wrench_from_tensions(geometry, pose, 1.0 + rng.uniform(0.0, 3.0, 8))
        f1 = distribute_tensions(geometry, pose, w)
        f2 = distribute_tensions(geometry, pose, w)
        assert np.array_equal(f1, f2)

    def test_outward_pull_outside_frame_is_infeasible(self, geometry):
        # beyond the +x anchor plane every cable pulls back toward -x
        pose = Pose(translation=[0.45, 0.0, 0.0])
        with pytest.raises(InfeasibleWrenchError) as info:
            distribute_tensions(geometry, pose, np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))
        assert info.value.residual > 1e-6

    def test_rejects_negative_floor(self, geometry):
        with pytest.raises(ValueError):
            distribute_tensions(geometry, geometry.center_pose(), np.zeros(6), f_min=-0.5)


class TestGravityCompensation:
    def test_center_balance(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        pose = geometry.center_pose()
        f = gravity_compensation(geometry, pose, inertia)
        total = wrench_from_tensions(geometry, pose, f) + gravity_wrench(pose, inertia)
        assert np.linalg.norm(total) < 1e-9
        assert np.all(f >= 1.0 - 1e-12)

    def test_center_symmetry(self, geometry):
        # upper cables share the load equally; lower cables sit at the floor
        f = gravity_compensation(geometry, geometry.center_pose(), PlatformInertia(mass=0.328))
        assert np.ptp(f[4:]) < 1e-9
        assert np.allclose(f[:4], 1.0, atol=1e-9)

    def test_massless_platform_uses_floor_only(self, geometry):
        f = gravity_compensation(geometry, geometry.center_pose(), PlatformInertia(mass=0.0))
        assert np.allclose(f, 1.0, atol=1e-9)

    def test_off_center_balance(self, geometry, rng):
        inertia = PlatformInertia(mass=0.328)
        for _ in range(20):
            pose = Pose(translation=rng.uniform(-0.10, 0.10, 3))
            f = gravity_compensation(geometry, pose, inertia)
            total = wrench_from_tensions(geometry, pose, f) + gravity_wrench(pose, inertia)
            assert np.linalg.norm(total) < 1e-6

    def test_near_top_face_is_infeasible(self, geometry):
        # close to the upper anchor plane the floor tension cannot be balanced
        with pytest.raises(InfeasibleWrenchError):
            gravity_compensation(
                geometry, Pose(translation=[0.0, 0.0, 0.33]), PlatformInertia(mass=0.328)
            )


class TestPassiveOrientation:
    def test_center_equilibrium_is_level(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        pose = geometry.center_pose()
        f = gravity_compensation(geometry, pose, inertia)
        qo = passive_orientation(geometry, pose.translation, f, inertia)
        assert geodesic_angle(qo) < 1e-9

    def test_equilibrium_torque_vanishes(self, geometry, rng):
        inertia = PlatformInertia(mass=0.328)
        center = geometry.center_pose()
        f_base = gravity_compensation(geometry, center, inertia)
        for _ in range(10):
            translation = rng.uniform(-0.12, 0.12, 3)
            qo = passive_orientation(geometry, translation, f_base, inertia, torque_tol=1e-10)
            pose = Pose(translation=translation, orientation=qo)
            torque = wrench_from_tensions(geometry, pose, f_base)[3:] + gravity_wrench(pose, inertia)[3:]
            assert np.linalg.norm(torque) < 1e-9

    def test_asymmetric_tension_tilts_platform(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        f = gravity_compensation(geometry, geometry.center_pose(), inertia)
        f = f.copy()
        f[0] += 2.0
        qo = passive_orientation(geometry, geometry.center, f, inertia)
        assert geodesic_angle(qo) > 1e-4

    def test_deterministic(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        f = gravity_compensation(geometry, geometry.center_pose(), inertia)
        t = np.array([0.09, -0.05, 0.07])
        a = passive_orientation(geometry, t, f, inertia)
        b = passive_orientation(geometry, t, f, inertia)
        assert np.array_equal(a, b)

    def test_angle_grows_toward_corner(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        f = gravity_compensation(geometry, geometry.center_pose(), inertia)
        corner = np.array([0.28, 0.28, 0.28])
        near = passive_orientation_angle(geometry, 0.2 * corner, f, inertia)
        far = passive_orientation_angle(geometry, 0.6 * corner, f, inertia)
        assert far > near

    def test_budget_exhaustion_raises(self, geometry):
        inertia = PlatformInertia(mass=0.328)
        f = gravity_compensation(geometry, geometry.center_pose(), inertia)
        f = f.copy()
        f[0] += 3.0
        with pytest.raises(NoEquilibriumError):
            passive_orientation(geometry, geometry.center, f, inertia, max_iterations=1)
