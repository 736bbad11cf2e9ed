import itertools
import math
import statistics

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase, tag
from django.urls import reverse
from numpy.testing import assert_allclose
from rest_framework import status
from rest_framework.test import APITestCase

from apps.arrangement.genome import DesignSpace
from apps.arrangement.wires import VARIABLE
from apps.feasibility.spaces import ActuatorLimits, Scenario, TargetSpec
from apps.robot.kinematics import JointState, RobotModel
from apps.scenarios.config import load_preset
from apps.scenarios.reports import record_run

from .models import OptimizationRun, ParetoSolution
from .nsga2 import (
    Individual, ParetoArchive, SearchProblem, crowding_distance, evolve, make_offspring,
    non_dominated_sort, random_search, select_survivors,
)
from .pareto import dominates, hypervolume_2d, update_front

MODEL = RobotModel(link_lengths=(0.4, 0.6, 0.6), link_masses=(0.0, 4.0, 4.0))
LIMITS = ActuatorLimits(f_min=10.0, f_max=200.0, ldot_min=-0.4, ldot_max=0.4)


def small_problem(**space):
    fields = {'kind': VARIABLE, 'n_wires': 3, 'n_relays': 2, 'n_joints': 2}
    fields.update(space)
    scenario = Scenario(
        joint_states=(JointState.from_degrees((-30, 60)),),
        target=TargetSpec(force_radii=(50.0, 50.0), velocity_radii=(1.0, 1.0), n_directions=4),
        limits=LIMITS,
    )
    return SearchProblem(model=MODEL, scenario=scenario, space=DesignSpace(**fields))


def individual(index, objectives, feasible=True, space=None):
    space = space or DesignSpace(VARIABLE, 3, 2, 2)
    genome = space.random_genome(np.random.default_rng(index))
    return Individual(index=index, generation=0, genome=genome, objectives=objectives, feasible=feasible)


def preset_problem(name, **overrides):
    config = load_preset(name).with_overrides(**overrides)
    return config, SearchProblem(model=config.robot, scenario=config.scenario(), space=config.space())


class ParetoTests(SimpleTestCase):
    def test_dominance(self):
        self.assertTrue(dominates((1, 2), (2, 2)))
        self.assertFalse(dominates((1, 2), (1, 2)))
        self.assertFalse(dominates((1, 3), (2, 2)))

    def test_update_front(self):
        front = [(1, 5), (5, 1)]
        self.assertFalse(update_front(front, (6, 6)))
        self.assertTrue(update_front(front, (3, 3)))
        self.assertTrue(update_front(front, (0, 4)))
        self.assertEqual(sorted(front), [(0, 4), (3, 3), (5, 1)])

    def test_hypervolume(self):
        self.assertEqual(hypervolume_2d([(1, 1)], (2, 2)), 1.0)
        self.assertEqual(hypervolume_2d([(0, 1), (1, 0)], (2, 2)), 3.0)
        self.assertEqual(hypervolume_2d([(0, 0), (1, 1)], (2, 2)), 4.0)
        self.assertEqual(hypervolume_2d([(2, 0), (3, 3)], (2, 2)), 0.0)
        self.assertEqual(hypervolume_2d([], (33, 33)), 0.0)


class NonDominatedSortTests(SimpleTestCase):
    def test_small_example(self):
        fronts = non_dominated_sort([(1, 5), (2, 2), (5, 1), (3, 3), (4, 4)])
        self.assertEqual(fronts, [[0, 1, 2], [3], [4]])

    def test_duplicates_share_a_front(self):
        self.assertEqual(non_dominated_sort([(1, 1), (1, 1), (2, 2)]), [[0, 1], [2]])

    def test_matches_pairwise_definition(self):
        rng = np.random.default_rng(6)
        points = [tuple(p) for p in rng.integers(0, 10, size=(100, 2)).tolist()]
        fronts = non_dominated_sort(points)
        self.assertEqual(sorted(itertools.chain(*fronts)), list(range(100)))
        rank = {i: k for k, front in enumerate(fronts) for i in front}
        for i, j in itertools.product(range(100), repeat=2):
            if dominates(points[i], points[j]):
                self.assertLess(rank[i], rank[j])
        for k in range(1, len(fronts)):
            for j in fronts[k]:
                self.assertTrue(any(dominates(points[i], points[j]) for i in fronts[k - 1]))

    def test_empty(self):
        self.assertEqual(non_dominated_sort([]), [])


class CrowdingDistanceTests(SimpleTestCase):
    def test_two_points_are_infinitely_spread(self):
        self.assertTrue(np.all(np.isinf(crowding_distance([(0, 1), (1, 0)]))))

    def test_evenly_spaced_front(self):
        distance = crowding_distance([(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)])
        self.assertTrue(math.isinf(distance[0]) and math.isinf(distance[4]))
        assert_allclose(distance[1:4], [1.0, 1.0, 1.0])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(8)
        points = rng.random((12, 2))
        order = rng.permutation(12)
        assert_allclose(crowding_distance(points[order]), crowding_distance(points)[order])


class SelectionTests(SimpleTestCase):
    def test_survivors_keep_the_best_fronts(self):
        population = [individual(i, objectives) for i, objectives in enumerate(
            [(1, 5), (2, 2), (5, 1), (3, 3), (4, 4), (6, 6)]
        )]
        survivors = select_survivors(population, 4)
        self.assertEqual({ind.index for ind in survivors}, {0, 1, 2, 3})
        self.assertEqual([ind.rank for ind in survivors[:3]], [0, 0, 0])

    def test_split_front_prefers_spread(self):
        population = [individual(i, objectives) for i, objectives in enumerate(
            [(0, 4), (1, 3), (2, 2), (2.1, 1.9), (4, 0)]
        )]
        survivors = select_survivors(population, 3)
        self.assertEqual({ind.index for ind in survivors[:2]}, {0, 4})
        self.assertEqual(len(survivors), 3)

    def test_offspring_are_valid_genomes(self):
        space = DesignSpace(VARIABLE, 3, 3, 2)
        rng = np.random.default_rng(0)
        parents = [individual(i, (float(i), float(10 - i)), space=space) for i in range(10)]
        select_survivors(parents, 10)
        children = make_offspring(parents, 7, space, rng)
        self.assertEqual(len(children), 7)
        for child in children:
            self.assertEqual((len(child.reals), len(child.categoricals)), (space.n_reals, space.n_categoricals))
            self.assertTrue(all(0.0 <= x <= 1.0 for x in child.reals))
            self.assertTrue(all(0 <= c < space.cardinality for c in child.categoricals))


class ArchiveTests(SimpleTestCase):
    def test_infeasible_samples_stay_off_the_front(self):
        archive = ParetoArchive(seed=0)
        archive.add(individual(0, (33.0, 33.0), feasible=False))
        archive.add(individual(1, (10.0, 5.0)))
        archive.add(individual(2, (12.0, 6.0)))
        self.assertEqual(archive.evaluations, 3)
        self.assertEqual([ind.index for ind in archive.front], [1])

    def test_balanced_member(self):
        archive = ParetoArchive(seed=0)
        for i, objectives in enumerate([(1.0, 9.0), (4.0, 5.0), (5.0, 4.0), (9.0, 0.0)]):
            archive.add(individual(i, objectives))
        self.assertEqual(archive.balanced().index, 1)
        self.assertEqual([ind.index for ind in archive.sorted_front()], [0, 1, 2, 3])
        self.assertIsNone(ParetoArchive(seed=0).balanced())


class EvolveTests(SimpleTestCase):
    def test_budget_equal_to_population_is_one_generation(self):
        archive = evolve(small_problem(), budget=6, population=6, seed=1, workers=1)
        self.assertEqual(archive.evaluations, 6)
        self.assertEqual({sample.generation for sample in archive.samples}, {0})
        self.assertEqual(len(archive.history), 1)

    def test_final_batch_is_trimmed_to_the_budget(self):
        archive = evolve(small_problem(), budget=11, population=4, seed=2, workers=1)
        self.assertEqual(archive.evaluations, 11)
        self.assertEqual([record['evaluations'] for record in archive.history], [4, 8, 11])
        self.assertEqual([sample.index for sample in archive.samples], list(range(11)))

    def test_rejects_bad_settings(self):
        with self.assertRaises(ValidationError):
            evolve(small_problem(), budget=10, population=5, seed=0)
        with self.assertRaises(ValidationError):
            evolve(small_problem(), budget=2, population=4, seed=0)

    def test_same_seed_same_run(self):
        first = evolve(small_problem(), budget=12, population=4, seed=7, workers=1)
        second = evolve(small_problem(), budget=12, population=4, seed=7, workers=2)
        self.assertEqual(
            [sample.as_record() for sample in first.samples],
            [sample.as_record() for sample in second.samples],
        )

    def test_front_and_sentinels(self):
        problem = small_problem()
        archive = evolve(problem, budget=16, population=8, seed=3, workers=1)
        for sample in archive.samples:
            if not sample.feasible:
                self.assertEqual(sample.objectives, problem.sentinel)
            else:
                self.assertTrue(all(0.0 <= e <= problem.scenario.max_error for e in sample.objectives))
        front = [member.objectives for member in archive.front]
        for a, b in itertools.permutations(front, 2):
            self.assertFalse(dominates(a, b))
        for sample in archive.samples:
            if sample.feasible:
                self.assertTrue(any(
                    member == sample.objectives or dominates(member, sample.objectives) for member in front
                ))

    def test_progress_records(self):
        records = []
        evolve(small_problem(), budget=12, population=4, seed=4, workers=1, progress=records.append)
        self.assertEqual([record['generation'] for record in records], [0, 1, 2])
        volumes = [record['hypervolume'] for record in records]
        self.assertEqual(volumes, sorted(volumes))
        self.assertEqual(records[-1]['evaluations'], 12)
        for record in records:
            self.assertTrue(1 <= record['elite_size'] <= 4)
            self.assertLessEqual(record['elite_hypervolume'], record['hypervolume'] + 1e-12)

    def test_untruncated_elite_never_loses_hypervolume(self):
        records = []
        evolve(small_problem(), budget=80, population=8, seed=11, workers=1, progress=records.append)
        self.assertEqual(len(records), 10)
        for previous, record in zip(records, records[1:]):
            # a full rank-0 set may have been thinned by crowding
            if record['elite_size'] < 8:
                self.assertGreaterEqual(record['elite_hypervolume'], previous['elite_hypervolume'] - 1e-12)

    def test_random_search_has_no_elite(self):
        records = []
        random_search(small_problem(), budget=4, seed=0, workers=1, progress=records.append, batch=4)
        self.assertIsNone(records[0]['elite_size'])
        self.assertIsNone(records[0]['elite_hypervolume'])

    def test_random_search_uses_the_whole_budget(self):
        archive = random_search(small_problem(), budget=9, seed=0, workers=1, batch=4)
        self.assertEqual(archive.evaluations, 9)
        self.assertEqual(len(archive.history), 3)


@tag('slow')
class DeskScaleTests(SimpleTestCase):
    """Trend checks on reduced budgets; each takes minutes."""

    def hypervolume(self, archive, problem):
        return hypervolume_2d([m.objectives for m in archive.front], problem.reference_point)

    def test_evolution_beats_random_sampling(self):
        _, problem = preset_problem('target1_nograv', budget=2000, population=40)
        wins = 0
        for seed in range(5):
            evolved = evolve(problem, 2000, 40, seed)
            self.assertTrue(any(member.objectives[1] == 0.0 for member in evolved.front))
            sampled = random_search(problem, 2000, seed)
            wins += self.hypervolume(evolved, problem) >= self.hypervolume(sampled, problem)
        self.assertGreaterEqual(wins, 4)

    def test_more_relay_points_lower_force_error(self):
        best = {}
        for relays in (2, 3):
            _, problem = preset_problem('target1_nograv', wires=4, relays=relays, budget=2000, population=40)
            runs = [evolve(problem, 2000, 40, seed) for seed in range(3)]
            for archive in runs:
                self.assertTrue(any(member.objectives[1] == 0.0 for member in archive.front))
            best[relays] = statistics.median(min(m.objectives[0] for m in archive.front) for archive in runs)
        self.assertLessEqual(best[3], best[2])

    def test_constant_arms_have_larger_force_error(self):
        _, variable = preset_problem('target1_nograv', wires=4, relays=3, budget=2000, population=40)
        _, constant = preset_problem('constant_restricted', budget=2000, population=40)
        wins = 0
        for seed in range(5):
            e_variable = min(m.objectives[0] for m in evolve(variable, 2000, 40, seed).front)
            e_constant = min(m.objectives[0] for m in evolve(constant, 2000, 40, seed).front)
            wins += e_constant > e_variable
        self.assertGreaterEqual(wins, 4)


class RunArchiveTests(TestCase):
    def test_record_run_stores_the_front(self):
        config, problem = preset_problem('target1_nograv', budget=8, population=4)
        archive = evolve(problem, 8, 4, config.seed, workers=1)
        run = record_run(config, archive, 1.5)
        self.assertEqual(run.evaluations, 8)
        self.assertEqual(run.mode, 'VARIABLE')
        self.assertEqual(run.front.count(), len(archive.front))
        self.assertEqual(run.front.filter(is_balanced=True).count(), 1 if archive.front else 0)


class RunApiTests(APITestCase):
    def setUp(self):
        self.run = OptimizationRun.objects.create(
            scenario_name='target1_nograv', mode='VARIABLE', wires=3, relays=2,
            seed=123456789012345, budget=100, population=10, evaluations=100, config={'name': 'target1_nograv'},
        )
        ParetoSolution.objects.create(
            run=self.run, sample_index=5, e_force=3.0, e_velocity=0.0,
            genome={'reals': [], 'categoricals': []}, design={'kind': 'variable', 'wires': []}, is_balanced=True,
        )
        OptimizationRun.objects.create(
            scenario_name='constant_restricted', mode='CONSTANT', wires=4,
            seed=0, budget=100, population=10, evaluations=100, config={},
        )

    def test_list_and_filter(self):
        response = self.client.get(reverse('run-list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data), 2)

        response = self.client.get(reverse('run-list'), {'mode': 'CONSTANT'})
        self.assertEqual([row['scenario_name'] for row in response.data], ['constant_restricted'])

    def test_detail_carries_the_front(self):
        response = self.client.get(reverse('run-detail', args=[self.run.id]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['seed'], 123456789012345)
        self.assertEqual(response.data['front_size'], 1)
        self.assertEqual(response.data['front'][0]['sample_index'], 5)

    def test_read_only(self):
        response = self.client.post(reverse('run-list'), {}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
