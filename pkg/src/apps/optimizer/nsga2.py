"""
NSGA-II over wire-arrangement genomes, minimizing (E_force, E_velocity).

Real genes use simulated binary crossover and bounded polynomial mutation on
[0, 1]; categorical link genes use uniform crossover and uniform reset. All
random draws come from one generator seeded by the caller and happen on the
calling thread, so a run is reproducible for a fixed seed and worker count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from apps.arrangement.genome import Genome
from apps.feasibility.spaces import evaluate

from .pareto import hypervolume_2d, update_front

logger = logging.getLogger(__name__)

SBX_ETA = 15.0
SBX_RATE = 0.9
MUTATION_ETA = 20.0


@dataclass
class Individual:
    index: int
    generation: int
    genome: Genome
    objectives: tuple
    feasible: bool
    rank: int = 0
    crowding: float = 0.0

    def as_record(self):
        return {
            'index': self.index,
            'generation': self.generation,
            'e_force': self.objectives[0],
            'e_velocity': self.objectives[1],
            'feasible': self.feasible,
            'genome': self.genome.as_dict(),
        }


@dataclass
class ParetoArchive:
    """Every evaluated sample plus the non-dominated front over feasible ones."""
    seed: int
    samples: list = field(default_factory=list)
    front: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def evaluations(self):
        return len(self.samples)

    def add(self, individual):
        self.samples.append(individual)
        if individual.feasible:
            update_front(self.front, individual, key=lambda item: item.objectives)

    def sorted_front(self):
        return sorted(self.front, key=lambda item: (item.objectives, item.index))

    def balanced(self):
        """Front member with the smallest |E_force - E_velocity|."""
        if not self.front:
            return None
        return min(
            self.front,
            key=lambda item: (
                abs(item.objectives[0] - item.objectives[1]),
                item.objectives[0] + item.objectives[1],
                item.index,
            ),
        )


@dataclass(frozen=True)
class SearchProblem:
    model: object
    scenario: object
    space: object

    @property
    def sentinel(self):
        worst = float(self.scenario.max_error + 1)
        return (worst, worst)

    @property
    def reference_point(self):
        return self.sentinel

    def evaluate(self, genome):
        result = evaluate(self.model, self.space.decode(genome), self.scenario)
        if not result.feasible:
            return self.sentinel, False
        return result.objectives, True


def _resolve_workers(workers):
    if workers is None:
        workers = getattr(settings, 'TLO_THREADS', 1)
    return max(int(workers), 1)


def evaluate_genomes(problem, genomes, workers=1):
    """Objective pairs in input order; no randomness is consumed here."""
    if workers > 1 and len(genomes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(problem.evaluate, genomes))
    return [problem.evaluate(genome) for genome in genomes]


def non_dominated_sort(objectives):
    """Fronts as lists of indices, best front first, ascending index inside each."""
    objs = np.asarray(objectives, dtype=float).reshape(-1, 2)
    n = objs.shape[0]
    if n == 0:
        return []
    no_worse = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    better = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    dominance = no_worse & better

    n_dominators = dominance.sum(axis=0)
    done = np.zeros(n, dtype=bool)
    fronts = []
    current = np.flatnonzero(n_dominators == 0)
    while current.size:
        fronts.append([int(i) for i in current])
        done[current] = True
        n_dominators = n_dominators - dominance[current].sum(axis=0)
        current = np.flatnonzero((n_dominators == 0) & ~done)
    return fronts


def crowding_distance(objectives):
    objs = np.asarray(objectives, dtype=float).reshape(-1, 2)
    n = objs.shape[0]
    if n <= 2:
        return np.full(n, math.inf)

    distance = np.zeros(n)
    for k in range(objs.shape[1]):
        order = np.argsort(objs[:, k], kind='stable')
        low, high = objs[order[0], k], objs[order[-1], k]
        distance[order[0]] = distance[order[-1]] = math.inf
        if high == low:
            continue
        distance[order[1:-1]] += (objs[order[2:], k] - objs[order[:-2], k]) / (high - low)
    return distance


def _assign_rank_and_crowding(population):
    fronts = non_dominated_sort([ind.objectives for ind in population])
    for rank, front in enumerate(fronts):
        crowding = crowding_distance([population[i].objectives for i in front])
        for i, distance in zip(front, crowding):
            population[i].rank = rank
            population[i].crowding = float(distance)
    return fronts


def select_survivors(combined, size):
    """Elitist truncation by rank, then by crowding distance within the split front."""
    survivors = []
    for front in _assign_rank_and_crowding(combined):
        members = [combined[i] for i in front]
        if len(survivors) + len(members) <= size:
            survivors.extend(members)
            continue
        members.sort(key=lambda ind: -ind.crowding)
        survivors.extend(members[:size - len(survivors)])
        break
    return survivors


def _tournament(population, rng):
    a, b = (population[int(i)] for i in rng.integers(0, len(population), size=2))
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a


def _sbx(x1, x2, rng, eta=SBX_ETA):
    """Simulated binary crossover of one gene pair bounded to [0, 1]."""
    if abs(x1 - x2) <= 1e-14:
        return x1, x2
    low_x, high_x = min(x1, x2), max(x1, x2)
    u = rng.random()

    def child(beta_bound):
        alpha = 2.0 - beta_bound ** -(eta + 1.0)
        if u <= 1.0 / alpha:
            return (u * alpha) ** (1.0 / (eta + 1.0))
        return (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0))

    spread = high_x - low_x
    beta_q = child(1.0 + 2.0 * low_x / spread)
    c1 = 0.5 * (low_x + high_x - beta_q * spread)
    beta_q = child(1.0 + 2.0 * (1.0 - high_x) / spread)
    c2 = 0.5 * (low_x + high_x + beta_q * spread)
    c1, c2 = min(max(c1, 0.0), 1.0), min(max(c2, 0.0), 1.0)
    if rng.random() < 0.5:
        c1, c2 = c2, c1
    return c1, c2


def _polynomial_mutation(x, rng, eta=MUTATION_ETA):
    u = rng.random()
    power = 1.0 / (eta + 1.0)
    if u < 0.5:
        xy = 1.0 - x
        val = 2.0 * u + (1.0 - 2.0 * u) * xy ** (eta + 1.0)
        delta = val ** power - 1.0
    else:
        xy = x
        val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy ** (eta + 1.0)
        delta = 1.0 - val ** power
    return min(max(x + delta, 0.0), 1.0)


def _crossover(p1, p2, rng):
    r1, r2 = list(p1.reals), list(p2.reals)
    c1, c2 = list(p1.categoricals), list(p2.categoricals)
    if rng.random() < SBX_RATE:
        for k in range(len(r1)):
            if rng.random() < 0.5:
                r1[k], r2[k] = _sbx(r1[k], r2[k], rng)
        for k in range(len(c1)):
            if rng.random() < 0.5:
                c1[k], c2[k] = c2[k], c1[k]
    return (r1, c1), (r2, c2)


def _mutate(genes, cardinality, rate, rng):
    reals, categoricals = genes
    for k in range(len(reals)):
        if rng.random() < rate:
            reals[k] = _polynomial_mutation(reals[k], rng)
    for k in range(len(categoricals)):
        if rng.random() < rate:
            categoricals[k] = int(rng.integers(0, cardinality))
    return Genome(tuple(reals), tuple(categoricals), cardinality)


def make_offspring(parents, count, space, rng):
    rate = 1.0 / space.n_genes
    children = []
    while len(children) < count:
        p1, p2 = _tournament(parents, rng), _tournament(parents, rng)
        for genes in _crossover(p1.genome, p2.genome, rng):
            children.append(_mutate(genes, space.cardinality, rate, rng))
    return children[:count]


def _check_budget(budget, population):
    if population < 2 or population % 2:
        raise ValidationError({'population': 'Population size must be an even number of at least 2.'})
    if budget < population:
        raise ValidationError({'budget': 'The evaluation budget must cover the initial population.'})


def _evaluate_into(archive, problem, genomes, generation, workers):
    individuals = []
    for genome, (objectives, feasible) in zip(genomes, evaluate_genomes(problem, genomes, workers)):
        individual = Individual(
            index=archive.evaluations,
            generation=generation,
            genome=genome,
            objectives=tuple(float(v) for v in objectives),
            feasible=feasible,
        )
        archive.add(individual)
        individuals.append(individual)
    return individuals


def _record_progress(archive, problem, generation, progress, population=None):
    front = [ind.objectives for ind in archive.front]
    elite = None if population is None else [ind.objectives for ind in population if ind.rank == 0]
    record = {
        'generation': generation,
        'evaluations': archive.evaluations,
        'front_size': len(front),
        'best_force': min((f for f, _ in front), default=None),
        'best_velocity': min((v for _, v in front), default=None),
        'hypervolume': hypervolume_2d(front, problem.reference_point),
        # rank-0 members of the current population; None for random search
        'elite_size': None if elite is None else len(elite),
        'elite_hypervolume': None if elite is None else hypervolume_2d(elite, problem.reference_point),
    }
    archive.history.append(record)
    logger.info(
        'generation %d: %d evaluations, front %d, hypervolume %.6g',
        generation, record['evaluations'], record['front_size'], record['hypervolume'],
    )
    if progress is not None:
        progress(record)


def evolve(problem, budget, population, seed, workers=None, progress=None):
    """Run NSGA-II until exactly `budget` designs have been evaluated."""
    _check_budget(budget, population)
    workers = _resolve_workers(workers)
    rng = np.random.default_rng(seed)
    archive = ParetoArchive(seed=seed)

    genomes = [problem.space.random_genome(rng) for _ in range(population)]
    parents = _evaluate_into(archive, problem, genomes, 0, workers)
    _assign_rank_and_crowding(parents)
    _record_progress(archive, problem, 0, progress, parents)

    generation = 0
    while archive.evaluations < budget:
        generation += 1
        count = min(population, budget - archive.evaluations)
        genomes = make_offspring(parents, count, problem.space, rng)
        offspring = _evaluate_into(archive, problem, genomes, generation, workers)
        parents = select_survivors(parents + offspring, population)
        _record_progress(archive, problem, generation, progress, parents)
    return archive


def random_search(problem, budget, seed, workers=None, progress=None, batch=100):
    """Uniform sampling baseline with the same evaluation budget."""
    if budget < 1:
        raise ValidationError({'budget': 'The evaluation budget must be positive.'})
    workers = _resolve_workers(workers)
    rng = np.random.default_rng(seed)
    archive = ParetoArchive(seed=seed)
    step = 0
    while archive.evaluations < budget:
        count = min(batch, budget - archive.evaluations)
        genomes = [problem.space.random_genome(rng) for _ in range(count)]
        _evaluate_into(archive, problem, genomes, step, workers)
        _record_progress(archive, problem, step, progress)
        step += 1
    return archive
