import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from .kinematics import (
    DimensionMismatch, JointState, RobotModel, forward_kinematics, gravity_torque,
    joint_jacobian, potential_energy, rot90,
)


def arm(**overrides):
    fields = {'link_lengths': (0.4, 0.6, 0.6), 'link_masses': (0.0, 4.0, 4.0)}
    fields.update(overrides)
    return RobotModel(**fields)


class RobotModelTests(SimpleTestCase):
    def test_defaults_fill_segments_and_ranges(self):
        model = arm()
        self.assertEqual(model.n_joints, 2)
        self.assertEqual(model.attach_segments[1], ((0.0, 0.0), (0.6, 0.0)))
        self.assertEqual(model.moment_arm_ranges, ((-0.1, 0.1), (-0.1, 0.1)))

    def test_rejects_bad_geometry(self):
        with self.assertRaises(ValidationError):
            arm(link_lengths=(0.4, -0.6, 0.6))
        with self.assertRaises(ValidationError):
            arm(link_masses=(0.0, 4.0))
        with self.assertRaises(ValidationError):
            arm(attach_segments=(((0, 0), (0.4, 0)), ((0, 0), (0.9, 0)), ((0, 0), (0.6, 0))))

    def test_arm_values_map_fractions(self):
        assert_allclose(arm().arm_values([[1.0, 0.5], [0.0, 0.25]]), [[0.1, 0.0], [-0.1, -0.05]])


class ForwardKinematicsTests(SimpleTestCase):
    def setUp(self):
        self.model = arm()

    def test_straight_arm(self):
        pose = forward_kinematics(self.model, JointState((0.0, 0.0)))
        assert_allclose(pose.joint_positions, [[0.4, 0.0], [1.0, 0.0]])
        assert_allclose(pose.ee_position, [1.6, 0.0])

    def test_right_angle(self):
        pose = forward_kinematics(self.model, JointState((0.0, math.pi / 2)))
        assert_allclose(pose.ee_position, [1.0, 0.6], atol=1e-12)

    def test_composed_rotations_match_homogeneous_transforms(self):
        pose = forward_kinematics(self.model, JointState((math.pi / 2, math.pi / 2)))
        assert_allclose(pose.ee_position, [-0.2, 0.6], atol=1e-12)

        tip = np.array([0.6, 0.0, 1.0])
        assert_allclose((pose.link_frames[2] @ tip)[:2], pose.ee_position, atol=1e-12)

    def test_periodic_in_every_joint(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            q = rng.uniform(-math.pi, math.pi, 2)
            shifted = q + 2 * math.pi * rng.integers(-2, 3, 2)
            assert_allclose(
                forward_kinematics(self.model, q).ee_position,
                forward_kinematics(self.model, shifted).ee_position,
                atol=1e-12,
            )

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            forward_kinematics(self.model, JointState((0.0, 0.0, 0.0)))


class JacobianTests(SimpleTestCase):
    def setUp(self):
        self.model = arm()

    def test_collinear_arm(self):
        assert_allclose(joint_jacobian(self.model, (0.0, 0.0)), [[0.0, 0.0], [1.2, 0.6]], atol=1e-12)

    def test_bent_arm_columns(self):
        J = joint_jacobian(self.model, (0.0, math.pi / 2))
        assert_allclose(J[:, 0], [-0.6, 0.6], atol=1e-12)
        assert_allclose(J[:, 1], [-0.6, 0.0], atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        step = 1e-6
        for _ in range(100):
            q = rng.uniform(-math.pi, math.pi, 2)
            numeric = np.column_stack([
                (forward_kinematics(self.model, q + step * e).ee_position
                 - forward_kinematics(self.model, q - step * e).ee_position) / (2 * step)
                for e in np.eye(2)
            ])
            assert_allclose(joint_jacobian(self.model, q), numeric, rtol=1e-5, atol=1e-8)

    def test_rot90(self):
        assert_allclose(rot90([1.0, 2.0]), [-2.0, 1.0])


class GravityTorqueTests(SimpleTestCase):
    def setUp(self):
        self.model = arm()

    def test_straight_arm_statics(self):
        assert_allclose(gravity_torque(self.model, (0.0, 0.0)), [47.088, 11.772], atol=1e-9)

    def test_no_gravity(self):
        assert_allclose(gravity_torque(self.model.without_gravity(), (0.3, -0.2)), [0.0, 0.0])

    def test_hanging_arm_needs_no_torque(self):
        assert_allclose(gravity_torque(self.model, (-math.pi / 2, 0.0)), [0.0, 0.0], atol=1e-12)

    def test_gradient_of_potential_energy(self):
        rng = np.random.default_rng(1)
        step = 1e-6
        for _ in range(50):
            q = rng.uniform(-math.pi, math.pi, 2)
            numeric = [
                (potential_energy(self.model, q + step * e) - potential_energy(self.model, q - step * e)) / (2 * step)
                for e in np.eye(2)
            ]
            assert_allclose(gravity_torque(self.model, q), numeric, atol=1e-4)
