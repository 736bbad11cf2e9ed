import itertools
import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose

from apps.arrangement.genome import DesignSpace
from apps.arrangement.wires import CONSTANT, VARIABLE, WireArrangement, muscle_jacobian
from apps.oracle.polygons import ConvexPolygon, force_polytope_exact, ray_h, velocity_polytope_exact
from apps.robot.kinematics import JointState, RobotModel, gravity_torque, joint_jacobian

from .simplex import LinearProgram, LPNumericalError, LPStatus, _check_solution, solve_lp_max
from .spaces import (
    FORCE, TRACE_CAP, VELOCITY, ActuatorLimits, InfeasibleDesign, Scenario, TargetSpec, evaluate,
    force_h, force_lp, force_rhs, gravity_center, require_center, solve_ray, trace_polygon, velocity_h,
    velocity_lp,
)

MODEL = RobotModel(link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0))
LIMITS = ActuatorLimits(f_min=10.0, f_max=200.0, ldot_min=-0.4, ldot_max=0.4)
TARGET = TargetSpec(force_center=(0.0, 0.0), force_radii=(50.0, 50.0), velocity_radii=(1.0, 1.0), n_directions=8)
STATES = tuple(JointState.from_degrees(q) for q in [(-30, 60), (-15, 60), (-30, 75), (-15, 75)])
BENT = JointState((0.0, math.pi / 2))

# arms (0.1, 0), (-0.1, 0), (0, 0.1), (0, -0.1) in meters
CROSS = WireArrangement.constant([[1.0, 0.5], [0.0, 0.5], [0.5, 1.0], [0.5, 0.0]])
ON_BASE = WireArrangement.variable([[(0, 0.1), (0, 0.9)], [(0, 0.3), (0, 0.6)], [(0, 0.0), (0, 1.0)]])


def scenario(**overrides):
    fields = {'joint_states': STATES, 'target': TARGET, 'limits': LIMITS}
    fields.update(overrides)
    return Scenario(**fields)


def lp_by_vertices(lp):
    """Best vertex of {a x = b, lower <= x <= upper} for one equality row and three variables."""
    best = None
    a, b = lp.a_eq[0], lp.b_eq[0]
    for free in range(3):
        if abs(a[free]) < 1e-12:
            continue
        fixed = [j for j in range(3) if j != free]
        for bounds in itertools.product(*[(lp.lower[j], lp.upper[j]) for j in fixed]):
            x = np.zeros(3)
            x[fixed] = bounds
            x[free] = (b - a[fixed] @ x[fixed]) / a[free]
            if lp.lower[free] - 1e-12 <= x[free] <= lp.upper[free] + 1e-12:
                value = lp.objective @ x
                best = value if best is None else max(best, value)
    return best


class SimplexTests(SimpleTestCase):
    def test_upper_bound_is_optimal(self):
        result = solve_lp_max(LinearProgram([1.0], np.zeros((0, 1)), [], lower=[0.0], upper=[5.0]))
        self.assertEqual(result.status, LPStatus.OPTIMAL)
        self.assertAlmostEqual(result.value, 5.0, places=12)

    def test_contradictory_equality(self):
        result = solve_lp_max(LinearProgram([1.0], [[0.0]], [1.0], lower=[0.0], upper=[math.inf]))
        self.assertEqual(result.status, LPStatus.INFEASIBLE)

    def test_unbounded(self):
        lp = LinearProgram([1.0, 0.0], [[1.0, -1.0]], [0.0], lower=[0.0, -math.inf], upper=[math.inf, math.inf])
        self.assertEqual(solve_lp_max(lp).status, LPStatus.UNBOUNDED)

    def test_free_variable(self):
        # maximize -x - y with x - y = 2, y free, x <= 5
        lp = LinearProgram([-1.0, -1.0], [[1.0, -1.0]], [2.0], lower=[-math.inf, -math.inf], upper=[5.0, math.inf])
        self.assertEqual(solve_lp_max(lp).status, LPStatus.UNBOUNDED)
        lp = LinearProgram([1.0, 1.0], [[1.0, -1.0]], [2.0], lower=[-math.inf, -math.inf], upper=[5.0, math.inf])
        result = solve_lp_max(lp)
        self.assertAlmostEqual(result.value, 8.0, places=9)
        assert_allclose(result.x, [5.0, 3.0], atol=1e-9)

    def test_violated_solution_is_reported(self):
        lp = LinearProgram([1.0, 0.0], [[1.0, 1.0]], [1.0], lower=0.0, upper=1.0)
        with self.assertRaises(LPNumericalError):
            _check_solution(lp, np.array([1.0, 3.3e-4]))
        with self.assertRaises(LPNumericalError):
            _check_solution(lp, np.array([1.001, -0.001]))
        _check_solution(lp, np.array([1.0, 1e-15]))

    def test_wide_boxes_keep_equalities_tight(self):
        # maximize x0 with x0 + x1 = 1, x1 - x2 = 0, x2 boxed at 1e6
        lp = LinearProgram(
            [1.0, 0.0, 0.0], [[1.0, 1.0, 0.0], [0.0, 1.0, -1.0]], [1.0, 0.0],
            lower=[0.0, -0.3, -1e6], upper=[1e4, 0.3, 1e6],
        )
        result = solve_lp_max(lp)
        self.assertAlmostEqual(result.value, 1.3, delta=1e-12)
        assert_allclose(lp.a_eq @ result.x, lp.b_eq, atol=1e-12)

    def test_rejects_inconsistent_shapes(self):
        with self.assertRaises(ValueError):
            LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.0, 2.0], lower=0.0, upper=1.0)
        with self.assertRaises(ValueError):
            LinearProgram([1.0], [[1.0]], [1.0], lower=2.0, upper=1.0)

    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            lower = rng.uniform(-2.0, 0.0, 3)
            upper = lower + rng.uniform(0.5, 3.0, 3)
            a = rng.normal(size=(1, 3))
            inside = rng.uniform(lower, upper)
            b = a @ inside + (rng.uniform(5.0, 10.0) if rng.random() < 0.2 else 0.0)
            lp = LinearProgram(rng.normal(size=3), a, b, lower=lower, upper=upper)

            expected = lp_by_vertices(lp)
            result = solve_lp_max(lp)
            if expected is None:
                self.assertEqual(result.status, LPStatus.INFEASIBLE)
            else:
                self.assertEqual(result.status, LPStatus.OPTIMAL)
                self.assertAlmostEqual(result.value, expected, delta=1e-8)

    def test_deterministic(self):
        lp = LinearProgram([1.0, 2.0, 0.0], [[1.0, 1.0, 1.0]], [1.0], lower=0.0, upper=1.0)
        first, second = solve_lp_max(lp), solve_lp_max(lp)
        self.assertEqual(first.value, second.value)
        np.testing.assert_array_equal(first.x, second.x)


class TargetAndLimitTests(SimpleTestCase):
    def test_directions_follow_the_ellipse(self):
        directions = TargetSpec(force_radii=(2.0, 1.0), n_directions=4).force_directions()
        assert_allclose(directions, [[2.0, 0.0], [0.0, 1.0], [-2.0, 0.0], [0.0, -1.0]], atol=1e-12)

    def test_invalid_inputs(self):
        with self.assertRaises(ValidationError):
            TargetSpec(force_radii=(0.0, 1.0))
        with self.assertRaises(ValidationError):
            TargetSpec(n_directions=2)
        with self.assertRaises(ValidationError):
            ActuatorLimits(f_min=0.0)
        with self.assertRaises(ValidationError):
            ActuatorLimits(ldot_min=0.1)


class RayScoreTests(SimpleTestCase):
    def test_force_ray_against_square_torque_set(self):
        G = muscle_jacobian(MODEL, CROSS, BENT)
        J = joint_jacobian(MODEL, BENT)
        rhs = force_rhs(MODEL, BENT, J, (0.0, 0.0), False)
        w = np.array([1.0, 0.0])
        self.assertAlmostEqual(solve_ray(force_lp(G, J, rhs, w, LIMITS, 100.0), 100.0), 19 / 0.6, delta=1e-9)
        self.assertEqual(solve_ray(force_lp(G, J, rhs, w, LIMITS, 10.0), 10.0), 10.0)

    def test_velocity_ray(self):
        G = muscle_jacobian(MODEL, CROSS, BENT)
        J = joint_jacobian(MODEL, BENT)
        h = solve_ray(velocity_lp(G, J, np.array([0.0, 1.0]), LIMITS, 10.0), 10.0)
        self.assertAlmostEqual(h, 2.4, delta=1e-9)
        half = solve_ray(velocity_lp(G, J, np.array([0.0, 2.0]), LIMITS, 10.0), 10.0)
        self.assertAlmostEqual(half, 1.2, delta=1e-9)

    def test_zero_jacobian_scores(self):
        for i in range(TARGET.n_directions):
            self.assertEqual(force_h(MODEL, ON_BASE, STATES[0], TARGET, LIMITS, i), 0.0)
            self.assertEqual(velocity_h(MODEL, ON_BASE, STATES[0], TARGET, LIMITS, i), 10.0)

    def test_unproducible_gravity_torque_prunes(self):
        weak = WireArrangement.constant([[0.5, 0.5]])
        with self.assertRaises(InfeasibleDesign):
            force_h(MODEL, weak, STATES[0], TARGET, LIMITS, 0, gravity=True)
        result = evaluate(MODEL, weak, scenario(gravity=True))
        self.assertFalse(result.feasible)
        self.assertIsNone(result.e_force)

    def test_unproducible_center_prunes_even_when_a_ray_reaches_the_region(self):
        # arms (0.1, 0.05), (0.1, -0.05): every tension pulls joint 1 the same way
        lopsided = WireArrangement.constant([[1.0, 0.75], [1.0, 0.25]])
        G = muscle_jacobian(MODEL, lopsided, BENT)
        J = joint_jacobian(MODEL, BENT)
        rhs = force_rhs(MODEL, BENT, J, (0.0, 0.0), False)
        self.assertFalse(force_polytope_exact(G, J, LIMITS).contains([0.0, 0.0]))

        w = np.linalg.solve(J.T, [1.0, 0.0])
        self.assertAlmostEqual(solve_ray(force_lp(G, J, rhs, w, LIMITS, 100.0), 100.0), 40.0, delta=1e-9)
        with self.assertRaises(InfeasibleDesign):
            require_center(G, rhs, LIMITS)
        for i in range(TARGET.n_directions):
            with self.assertRaises(InfeasibleDesign):
                force_h(MODEL, lopsided, BENT, TARGET, LIMITS, i)
        self.assertFalse(evaluate(MODEL, lopsided, scenario(joint_states=(BENT,))).feasible)
        with self.assertRaises(InfeasibleDesign):
            trace_polygon(MODEL, lopsided, BENT, FORCE, LIMITS, 16)

    def test_velocity_rays_match_exact_polygons_under_the_trace_cap(self):
        rng = np.random.default_rng(27)
        space = DesignSpace(CONSTANT, 4, 0, 2)
        checked = 0
        while checked < 40:
            q = JointState(tuple(rng.uniform(-math.pi, math.pi, 2)))
            J = joint_jacobian(MODEL, q)
            if abs(np.linalg.det(J)) < 1e-3:
                continue
            design = space.decode(space.random_genome(rng))
            G = muscle_jacobian(MODEL, design, q)
            region = velocity_polytope_exact(G, J, LIMITS)
            for w in TARGET.velocity_directions():
                lp = velocity_lp(G, J, w, LIMITS, TRACE_CAP)
                result = solve_lp_max(lp)
                self.assertTrue(result.optimal)
                assert_allclose(lp.a_eq @ result.x, lp.b_eq, atol=1e-9 * max(1.0, np.abs(result.x).max()))
                expected = min(ray_h(region, np.zeros(2), w), TRACE_CAP)
                self.assertAlmostEqual(result.x[0], expected, delta=1e-6 * max(1.0, expected))
            checked += 1


class EvaluateTests(SimpleTestCase):
    def test_wires_on_the_base_score_worst_force_and_best_velocity(self):
        result = evaluate(MODEL, ON_BASE, scenario())
        self.assertTrue(result.feasible)
        self.assertEqual(result.objectives, (32.0, 0.0))

    def test_covered_targets_score_zero(self):
        tiny = TargetSpec(force_radii=(1e-3, 1e-3), velocity_radii=(1e-3, 1e-3), n_directions=8)
        relaxed = RobotModel(
            link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0),
            moment_arm_ranges=((-0.4, 0.4), (-0.4, 0.4)),
        )
        result = evaluate(relaxed, CROSS, scenario(target=tiny))
        self.assertEqual(result.objectives, (0.0, 0.0))

    def _random_designs(self, count, seed):
        rng = np.random.default_rng(seed)
        spaces = [DesignSpace(VARIABLE, 3, 3, 2), DesignSpace(CONSTANT, 4, 0, 2)]
        for k in range(count):
            space = spaces[k % 2]
            yield space.decode(space.random_genome(rng))

    def _check_bounds_and_cap(self, count):
        caps = (1.0, 10.0, 100.0)
        for design in self._random_designs(count, seed=4):
            results = [evaluate(MODEL, design, scenario(h_cap=cap)) for cap in caps]
            self.assertEqual(len({r.feasible for r in results}), 1)
            if not results[0].feasible:
                continue
            for result in results:
                self.assertTrue(0.0 <= result.e_force <= 32.0)
                self.assertTrue(0.0 <= result.e_velocity <= 32.0)
            for result in results[1:]:
                self.assertAlmostEqual(result.e_force, results[0].e_force, delta=1e-9)
                self.assertAlmostEqual(result.e_velocity, results[0].e_velocity, delta=1e-9)

    def test_bounds_and_cap_independence(self):
        self._check_bounds_and_cap(40)

    @tag('slow')
    def test_bounds_and_cap_independence_at_scale(self):
        self._check_bounds_and_cap(1000)

    def _check_wider_limits(self, limits, scores, seed):
        compared = 0
        for design in self._random_designs(200, seed=seed):
            base = evaluate(MODEL, design, scenario())
            if not base.feasible:
                continue
            wider = evaluate(MODEL, design, scenario(limits=limits))
            self.assertTrue(wider.feasible)
            for row, wider_row in zip(getattr(base, scores), getattr(wider, scores)):
                for h, h_wide in zip(row, wider_row):
                    self.assertGreaterEqual(h_wide, h - 1e-9)
            compared += 1
            if compared == 50:
                break
        self.assertGreater(compared, 0)

    def test_raising_tension_limit_never_lowers_force_scores(self):
        stronger = ActuatorLimits(f_min=10.0, f_max=400.0, ldot_min=-0.4, ldot_max=0.4)
        self._check_wider_limits(stronger, 'h_force', seed=6)

    def test_lowering_minimum_tension_never_lowers_force_scores(self):
        slacker = ActuatorLimits(f_min=2.0, f_max=200.0, ldot_min=-0.4, ldot_max=0.4)
        self._check_wider_limits(slacker, 'h_force', seed=7)

    def test_widening_wire_speeds_never_lowers_velocity_scores(self):
        faster = ActuatorLimits(f_min=10.0, f_max=200.0, ldot_min=-0.8, ldot_max=0.6)
        self._check_wider_limits(faster, 'h_velocity', seed=8)

    def test_doubling_force_radii_halves_scores(self):
        doubled = TargetSpec(force_radii=(100.0, 100.0), velocity_radii=(1.0, 1.0), n_directions=8)
        for i in range(8):
            h = force_h(MODEL, CROSS, BENT, TARGET, LIMITS, i, h_cap=1000.0)
            h2 = force_h(MODEL, CROSS, BENT, doubled, LIMITS, i, h_cap=1000.0)
            self.assertAlmostEqual(h2, h / 2, delta=1e-9)


class GravityCenterTests(SimpleTestCase):
    def test_no_torque_no_center(self):
        center = gravity_center(MODEL.without_gravity(), BENT)
        assert_allclose(center.center, [0.0, 0.0])
        self.assertFalse(center.singular)

    def test_bent_arm_solves_the_statics(self):
        center = gravity_center(MODEL, BENT)
        J = joint_jacobian(MODEL, BENT)
        self.assertLess(np.linalg.norm(J.T @ center.center - gravity_torque(MODEL, BENT)), 1e-9)

    def test_singular_state_reports_residual(self):
        center = gravity_center(MODEL, (0.0, 0.0))
        self.assertTrue(center.singular)
        self.assertGreater(center.residual, 1e-6)

    def test_torque_rhs_equals_center_rhs(self):
        rng = np.random.default_rng(8)
        relaxed = RobotModel(
            link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0),
            moment_arm_ranges=((-0.4, 0.4), (-0.4, 0.4)),
        )
        space = DesignSpace(CONSTANT, 4, 0, 2)
        checked = 0
        while checked < 50:
            q = JointState(tuple(rng.uniform(-math.pi, math.pi, 2)))
            J = joint_jacobian(relaxed, q)
            if abs(np.linalg.det(J)) < 1e-3:
                continue
            design = space.decode(space.random_genome(rng))
            G = muscle_jacobian(relaxed, design, q)
            via_torque = force_rhs(relaxed, q, J, (0.0, 0.0), True)
            via_center = J.T @ gravity_center(relaxed, q).center
            for w in TARGET.force_directions():
                outcomes = []
                for rhs in (via_torque, via_center):
                    try:
                        outcomes.append(solve_ray(force_lp(G, J, rhs, w, LIMITS, 10.0), 10.0))
                    except InfeasibleDesign:
                        outcomes.append(None)
                if None in outcomes:
                    self.assertEqual(outcomes, [None, None])
                else:
                    self.assertAlmostEqual(outcomes[0], outcomes[1], delta=1e-9)
            checked += 1


class TracePolygonTests(SimpleTestCase):
    def test_traced_force_polygon_lies_on_the_zonotope(self):
        traced = trace_polygon(MODEL, CROSS, BENT, FORCE, LIMITS, 64)
        self.assertTrue(traced.bounded)
        region = force_polytope_exact(
            muscle_jacobian(MODEL, CROSS, BENT), joint_jacobian(MODEL, BENT), LIMITS,
        )
        for point in traced.vertices:
            self.assertTrue(region.contains(point, tol=1e-9))
            distance = np.linalg.norm(point)
            self.assertAlmostEqual(ray_h(region, np.zeros(2), point / distance), distance, delta=1e-6)

    def test_zero_jacobian_force_polygon_is_a_point(self):
        traced = trace_polygon(MODEL, ON_BASE, STATES[0], FORCE, LIMITS, 16)
        assert_allclose(traced.vertices, [[0.0, 0.0]])

    def test_zero_jacobian_velocity_polygon_is_unbounded(self):
        self.assertFalse(trace_polygon(MODEL, ON_BASE, STATES[0], VELOCITY, LIMITS, 16).bounded)

    def test_traced_polygons_are_convex(self):
        rng = np.random.default_rng(9)
        space = DesignSpace(CONSTANT, 4, 0, 2)
        for _ in range(100):
            design = space.decode(space.random_genome(rng))
            q = JointState(tuple(rng.uniform(-math.pi, math.pi, 2)))
            try:
                traced = trace_polygon(MODEL, design, q, FORCE, LIMITS, 32)
            except InfeasibleDesign:
                continue
            if len(traced.vertices) >= 3:
                self.assertTrue(ConvexPolygon(traced.vertices).is_convex(tol=1e-9))

    def test_needs_enough_rays(self):
        with self.assertRaises(ValidationError):
            trace_polygon(MODEL, CROSS, BENT, FORCE, LIMITS, 4)
