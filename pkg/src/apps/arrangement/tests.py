import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from apps.robot.kinematics import DimensionMismatch, RobotModel, forward_kinematics

from .genome import DesignSpace, Genome, GenomeLengthError, genome_decode, genome_encode
from .serializers import DesignSerializer, design_from_data, design_to_data
from .wires import (
    CONSTANT, VARIABLE, RelayPoint, WireArrangement, muscle_jacobian, relay_world_positions,
    wire_lengths,
)

MODEL = RobotModel(link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0))


def random_variable(rng, n_wires=3, n_relays=3):
    space = DesignSpace(VARIABLE, n_wires, n_relays, MODEL.n_joints)
    return space.decode(space.random_genome(rng))


class RelayGeometryTests(SimpleTestCase):
    def test_point_on_fixed_link(self):
        design = WireArrangement.variable([[(0, 0.5), (1, 0.5)]])
        world = relay_world_positions(MODEL, design, (0.3, 1.0))[0]
        assert_allclose(world[0], [0.2, 0.0])

    def test_midpoint_of_straight_link(self):
        design = WireArrangement.variable([[(0, 0.0), (1, 0.5)]])
        assert_allclose(relay_world_positions(MODEL, design, (0.0, 0.0))[0][1], [0.7, 0.0])

    def test_link_tip_is_end_effector(self):
        q = (0.0, math.pi / 2)
        design = WireArrangement.variable([[(0, 0.0), (2, 1.0)]])
        assert_allclose(
            relay_world_positions(MODEL, design, q)[0][1],
            forward_kinematics(MODEL, q).ee_position,
            atol=1e-12,
        )

    def test_link_id_out_of_range(self):
        design = WireArrangement.variable([[(0, 0.0), (3, 0.5)]])
        with self.assertRaises(ValidationError):
            relay_world_positions(MODEL, design, (0.0, 0.0))

    def test_constant_design_has_no_path(self):
        with self.assertRaises(ValidationError):
            relay_world_positions(MODEL, WireArrangement.constant([[0.5, 0.5]]), (0.0, 0.0))


class WireLengthTests(SimpleTestCase):
    def test_straight_wire(self):
        design = WireArrangement.variable([[(0, 0.5), (1, 0.5)]])
        assert_allclose(wire_lengths(MODEL, design, (0.0, 0.0)), [0.5])

    def test_rigid_wire_keeps_its_length(self):
        design = WireArrangement.variable([[(0, 0.1), (0, 0.9)], [(0, 0.0), (2, 0.2), (2, 0.8)]])
        base = wire_lengths(MODEL, design, (0.0, 0.0))
        rng = np.random.default_rng(7)
        for q in rng.uniform(-math.pi, math.pi, (20, 2)):
            lengths = wire_lengths(MODEL, design, q)
            assert_allclose(lengths[0], base[0], atol=1e-12)
            # the last segment rides on one link
            segment = np.diff(relay_world_positions(MODEL, design, q)[1][1:], axis=0)
            assert_allclose(np.linalg.norm(segment), 0.36, atol=1e-12)


class MuscleJacobianTests(SimpleTestCase):
    def test_wire_on_fixed_link_has_zero_row(self):
        design = WireArrangement.variable([[(0, 0.2), (0, 0.8)]])
        for q in [(0.0, 0.0), (1.0, -2.0)]:
            assert_array_equal(muscle_jacobian(MODEL, design, q), [[0.0, 0.0]])

    def test_wire_along_the_arm(self):
        design = WireArrangement.variable([[(0, 0.5), (1, 0.5)]])
        assert_allclose(muscle_jacobian(MODEL, design, (0.0, 0.0)), [[0.0, 0.0]], atol=1e-12)

    def test_constant_arms(self):
        design = WireArrangement.constant([[1.0, 0.5]])
        G = muscle_jacobian(MODEL, design, (0.0, 0.0))
        assert_allclose(G, [[-0.1, 0.0]], atol=1e-12)
        assert_array_equal(G, muscle_jacobian(MODEL, design, (1.3, -0.4)))

    def test_constant_width_must_match_joints(self):
        with self.assertRaises(DimensionMismatch):
            muscle_jacobian(MODEL, WireArrangement.constant([[0.5, 0.5, 0.5]]), (0.0, 0.0))

    def test_matches_finite_differences_of_lengths(self):
        rng = np.random.default_rng(11)
        step = 1e-6
        checked = 0
        while checked < 100:
            design = random_variable(rng)
            q = rng.uniform(-math.pi, math.pi, 2)
            points = [relay_world_positions(MODEL, design, q + s * e) for s in (-step, step) for e in np.eye(2)]
            shortest = min(
                float(np.min(np.linalg.norm(np.diff(world, axis=0), axis=1)))
                for wires in points for world in wires
            )
            if shortest < 1e-6:
                continue
            numeric = np.column_stack([
                (wire_lengths(MODEL, design, q + step * e) - wire_lengths(MODEL, design, q - step * e)) / (2 * step)
                for e in np.eye(2)
            ])
            assert_allclose(muscle_jacobian(MODEL, design, q), numeric, rtol=1e-5, atol=1e-8)
            checked += 1


class GenomeTests(SimpleTestCase):
    def test_gene_counts(self):
        self.assertEqual(DesignSpace(VARIABLE, 1, 2, 2).n_genes, 3)
        space = DesignSpace(VARIABLE, 4, 3, 2)
        self.assertEqual((space.n_reals, space.n_categoricals), (12, 8))
        self.assertEqual(DesignSpace(CONSTANT, 4, 0, 2).n_genes, 8)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for space in (DesignSpace(VARIABLE, 3, 3, 2), DesignSpace(CONSTANT, 4, 0, 2)):
            for _ in range(100):
                genome = space.random_genome(rng)
                design = space.decode(genome)
                self.assertEqual(space.encode(design), genome)
                self.assertEqual(space.decode(space.encode(design)), design)

    def test_first_relay_point_is_on_the_base(self):
        design = genome_decode(Genome((0.1, 0.2), (2,), 3), 1, 2, 2)
        self.assertEqual(design.wires[0][0], RelayPoint(0, 0.1))
        self.assertEqual(design.wires[0][1], RelayPoint(2, 0.2))
        self.assertEqual(genome_encode(design, 2).categoricals, (2,))

    def test_length_mismatch(self):
        with self.assertRaises(GenomeLengthError):
            genome_decode(Genome((0.1, 0.2, 0.3), (1,), 3), 1, 2, 2)
        with self.assertRaises(GenomeLengthError):
            genome_decode(Genome((0.1,), (), 3), 2, 0, 2)

    def test_reals_are_clamped(self):
        self.assertEqual(Genome((-0.5, 1.5), (), 3).reals, (0.0, 1.0))


class DesignSerializerTests(SimpleTestCase):
    def test_variable_document(self):
        data = {'kind': 'variable', 'wires': [[{'link': 0, 'frac': 0.5}, {'link': 2, 'frac': 1.0}]]}
        serializer = DesignSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        design = design_from_data(MODEL, serializer.validated_data)
        self.assertEqual(design_to_data(MODEL, design), data)

    def test_constant_arms_in_meters(self):
        serializer = DesignSerializer(data={'kind': 'constant', 'arms': [[0.1, -0.05]]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        design = design_from_data(MODEL, serializer.validated_data)
        assert_allclose(design.arms, [[1.0, 0.25]])
        assert_allclose(design_to_data(MODEL, design)['arms'], [[0.1, -0.05]])

    def test_wire_must_start_on_base(self):
        serializer = DesignSerializer(
            data={'kind': 'variable', 'wires': [[{'link': 1, 'frac': 0.5}, {'link': 2, 'frac': 1.0}]]}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn('wires', serializer.errors)

    def test_ragged_arm_rows_are_rejected(self):
        serializer = DesignSerializer(data={'kind': 'constant', 'arms': [[0.1, 0.0], [0.1]]})
        self.assertFalse(serializer.is_valid())
        self.assertIn('arms', serializer.errors)
