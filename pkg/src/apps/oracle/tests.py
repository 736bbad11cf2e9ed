import itertools
import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from apps.arrangement.genome import DesignSpace
from apps.arrangement.wires import CONSTANT, VARIABLE, WireArrangement, muscle_jacobian
from apps.feasibility.spaces import ActuatorLimits, Scenario, TargetSpec
from apps.robot.kinematics import JointState, RobotModel, joint_jacobian

from .checks import compare_state, random_state, run_oracle
from .polygons import (
    UNBOUNDED, ConvexPolygon, SingularJacobian, force_polytope_exact, ray_h, velocity_polytope_exact,
    zonotope,
)

MODEL = RobotModel(link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0))
LIMITS = ActuatorLimits(f_min=10.0, f_max=200.0, ldot_min=-0.4, ldot_max=0.4)
TARGET = TargetSpec(force_radii=(50.0, 50.0), velocity_radii=(1.0, 1.0), n_directions=8)
STATES = tuple(JointState.from_degrees(q) for q in [(-30, 60), (-15, 60), (-30, 75), (-15, 75)])
SQUARE = ConvexPolygon([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0], [1.0, 0.0]])


def corner_images(G, J, limits):
    G = np.asarray(G)
    inverse_t = np.linalg.inv(J).T
    return [
        inverse_t @ (-G.T @ np.array(f))
        for f in itertools.product((limits.f_min, limits.f_max), repeat=G.shape[0])
    ]


class ConvexPolygonTests(SimpleTestCase):
    def test_starts_at_lowest_vertex(self):
        assert_allclose(SQUARE.vertices, [[0, 0], [1, 0], [1, 1], [0, 1]])
        self.assertAlmostEqual(SQUARE.area, 1.0)
        self.assertTrue(SQUARE.is_convex())

    def test_from_points_keeps_the_hull(self):
        polygon = ConvexPolygon.from_points([[0, 0], [2, 0], [2, 2], [0, 2], [1, 1], [1, 0]])
        assert_allclose(polygon.vertices, [[0, 0], [2, 0], [2, 2], [0, 2]])

    def test_collinear_points_become_a_segment(self):
        polygon = ConvexPolygon.from_points([[0, 0], [1, 1], [3, 3], [2, 2]])
        self.assertEqual(len(polygon.vertices), 2)
        self.assertTrue(polygon.contains([1.5, 1.5]))
        self.assertFalse(polygon.contains([1.5, 1.0]))

    def test_ray_from_the_center(self):
        self.assertAlmostEqual(ray_h(SQUARE, [0.5, 0.5], [1.0, 0.0]), 0.5)
        self.assertAlmostEqual(ray_h(SQUARE, [0.5, 0.5], [1.0, 1.0]), 0.5)
        self.assertAlmostEqual(ray_h(SQUARE, [0.25, 0.5], [-1.0, 0.0]), 0.25)

    def test_center_outside_scores_zero(self):
        self.assertEqual(ray_h(SQUARE, [2.0, 2.0], [-1.0, -1.0]), 0.0)

    def test_ray_is_inversely_homogeneous(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w = rng.normal(size=2)
            scale = rng.uniform(0.1, 10.0)
            self.assertAlmostEqual(
                ray_h(SQUARE, [0.3, 0.6], scale * w), ray_h(SQUARE, [0.3, 0.6], w) / scale, places=9,
            )

    def test_unbounded_region(self):
        self.assertEqual(ray_h(UNBOUNDED, [0.0, 0.0], [1.0, 0.0]), math.inf)


class ZonotopeTests(SimpleTestCase):
    def test_single_generator_is_a_segment(self):
        polygon = zonotope([1.0, 1.0], [[1.0, 0.0]])
        assert_allclose(polygon.vertices, [[0.0, 1.0], [2.0, 1.0]])

    def test_no_generators_is_the_center(self):
        assert_allclose(zonotope([3.0, -1.0], np.zeros((2, 2))).vertices, [[3.0, -1.0]])

    def test_parallel_generators_merge(self):
        polygon = zonotope([0.0, 0.0], [[1.0, 0.0], [-2.0, 0.0], [0.0, 1.0]])
        self.assertEqual(len(polygon.vertices), 4)
        self.assertAlmostEqual(polygon.area, 12.0)

    def test_force_polygon_is_the_hull_of_tension_corners(self):
        rng = np.random.default_rng(9)
        space = DesignSpace(CONSTANT, 4, 0, 2)
        for _ in range(30):
            design = space.decode(space.random_genome(rng))
            q = random_state(MODEL, rng)
            G = muscle_jacobian(MODEL, design, q)
            J = joint_jacobian(MODEL, q)
            exact = force_polytope_exact(G, J, LIMITS)
            hull = ConvexPolygon.from_points(corner_images(G, J, LIMITS))
            self.assertLessEqual(len(exact.vertices), 2 * G.shape[0])
            self.assertEqual(len(exact.vertices), len(hull.vertices))
            assert_allclose(exact.vertices, hull.vertices, rtol=1e-9, atol=1e-9 * hull.scale)
            self.assertTrue(exact.is_convex())

    def test_singular_jacobian_is_rejected(self):
        G = muscle_jacobian(MODEL, WireArrangement.constant([[1.0, 0.5]]), (0.0, 0.0))
        with self.assertRaises(SingularJacobian):
            force_polytope_exact(G, joint_jacobian(MODEL, (0.0, 0.0)), LIMITS)


class VelocityPolygonTests(SimpleTestCase):
    def test_orthogonal_wires_give_a_square(self):
        polygon = velocity_polytope_exact([[1.0, 0.0], [0.0, 1.0]], np.eye(2), LIMITS)
        assert_allclose(polygon.vertices, [[-0.4, -0.4], [0.4, -0.4], [0.4, 0.4], [-0.4, 0.4]], atol=1e-12)

    def test_redundant_wire_changes_nothing(self):
        tight = velocity_polytope_exact([[1.0, 0.0], [0.0, 1.0]], np.eye(2), LIMITS)
        loose = velocity_polytope_exact([[1.0, 0.0], [0.0, 1.0], [0.5, 0.0]], np.eye(2), LIMITS)
        assert_allclose(loose.vertices, tight.vertices, atol=1e-12)

    def test_joint_jacobian_maps_the_box(self):
        J = np.array([[2.0, 0.0], [0.0, 1.0]])
        polygon = velocity_polytope_exact([[1.0, 0.0], [0.0, 1.0]], J, LIMITS)
        self.assertAlmostEqual(polygon.area, 2.0 * 0.64)

    def test_free_directions_are_unbounded(self):
        self.assertIs(velocity_polytope_exact(np.zeros((3, 2)), np.eye(2), LIMITS), UNBOUNDED)
        self.assertIs(velocity_polytope_exact([[1.0, 0.0], [2.0, 0.0]], np.eye(2), LIMITS), UNBOUNDED)


class OracleTests(SimpleTestCase):
    def setUp(self):
        self.space = DesignSpace(CONSTANT, 4, 0, 2)
        self.scenario = Scenario(joint_states=STATES, target=TARGET, limits=LIMITS)

    def test_lp_matches_exact_polygons(self):
        summary = run_oracle(MODEL, self.space, self.scenario, trials=100, seed=0, tol=1e-6)
        self.assertEqual(summary.trials, 100)
        self.assertEqual(summary.comparisons, 100 * 2 * TARGET.n_directions)
        self.assertTrue(summary.passed, summary.worst)

    def test_compare_state_rows(self):
        design = WireArrangement.constant([[1.0, 0.5], [0.0, 0.5], [0.5, 1.0], [0.5, 0.0]])
        rows = compare_state(MODEL, design, STATES[0], TARGET, LIMITS)
        self.assertEqual(len(rows), 16)
        self.assertEqual({row[0] for row in rows}, {'force', 'velocity'})
        for _, _, lp, exact in rows:
            self.assertAlmostEqual(lp, exact, delta=1e-6)

    def test_random_states_avoid_singularities(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = random_state(MODEL, rng)
            self.assertGreaterEqual(abs(np.linalg.det(joint_jacobian(MODEL, q))), 1e-3)

    def test_same_seed_same_summary(self):
        first = run_oracle(MODEL, self.space, self.scenario, trials=5, seed=3, tol=1e-6)
        second = run_oracle(MODEL, self.space, self.scenario, trials=5, seed=3, tol=1e-6)
        self.assertEqual(first.as_dict(), second.as_dict())

    def test_zero_trials_pass(self):
        summary = run_oracle(MODEL, self.space, self.scenario, trials=0, seed=0, tol=1e-6)
        self.assertTrue(summary.passed)
        self.assertEqual(summary.comparisons, 0)

    def test_zero_tolerance_fails_every_comparison(self):
        summary = run_oracle(MODEL, self.space, self.scenario, trials=3, seed=0, tol=0.0)
        self.assertFalse(summary.passed)
        self.assertEqual(summary.failures, summary.comparisons)

    def test_needs_a_constant_two_joint_scenario(self):
        with self.assertRaises(ValidationError):
            run_oracle(MODEL, DesignSpace(VARIABLE, 3, 2, 2), self.scenario, trials=1, seed=0, tol=1e-6)
        three = RobotModel(link_lengths=(0.4, 0.5, 0.5, 0.5), link_masses=(0.0, 1.0, 1.0, 1.0))
        with self.assertRaises(ValidationError):
            run_oracle(three, DesignSpace(CONSTANT, 4, 0, 3), self.scenario, trials=1, seed=0, tol=1e-6)
