"""
Result documents written by the management commands.

    samples.csv    one row per evaluated design
    pareto.json    reported front with decoded designs, balanced member marked
    run_meta.json  seed, budget, timings, echoed scenario document
    report.json    per-state h values, totals and traced polygons of one design
"""
import csv
import json
import logging
from pathlib import Path

from django.conf import settings
from django.db import transaction

from apps.arrangement.serializers import design_to_data
from apps.arrangement.wires import VARIABLE, relay_world_positions
from apps.feasibility.spaces import FORCE, VELOCITY, evaluate, gravity_center, trace_polygon
from apps.optimizer.models import OptimizationRun, ParetoSolution
from apps.robot.kinematics import forward_kinematics

from .serializers import SCHEMA_VERSION

logger = logging.getLogger(__name__)


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')
    logger.info('Wrote %s', path)
    return path


def _polygon(traced):
    return {'vertices': traced.vertices.tolist(), 'bounded': traced.bounded}


def _state_report(config, design, q, h_force, h_velocity, n_rays):
    model = config.robot
    pose = forward_kinematics(model, q)
    entry = {
        'angles_deg': list(q.degrees),
        'chain': pose.chain.tolist(),
        'h_force': list(h_force),
        'h_velocity': list(h_velocity),
    }
    if design.kind == VARIABLE:
        entry['wires'] = [points.tolist() for points in relay_world_positions(model, design, q, pose=pose)]

    if config.gravity:
        center = gravity_center(model, q)
        entry['gravity_center'] = {
            'center': center.center.tolist(),
            'residual': center.residual,
            'singular': center.singular,
        }
        entry['force_center'] = center.center.tolist()
    else:
        entry['force_center'] = list(config.target.force_center)

    force = trace_polygon(
        model, design, q, FORCE, config.limits, n_rays,
        force_center=config.target.force_center, gravity=config.gravity,
    )
    velocity = trace_polygon(model, design, q, VELOCITY, config.limits, n_rays)
    entry['force_polygon'] = _polygon(force)
    entry['velocity_polygon'] = _polygon(velocity)
    return entry


def evaluation_report(config, design, n_rays=None):
    """Evaluate one design on a scenario and collect everything plotting needs."""
    n_rays = n_rays or settings.TENDON_LAB['POLYGON_RAYS']
    scenario = config.scenario()
    result = evaluate(config.robot, design, scenario)
    report = {
        'schema_version': SCHEMA_VERSION,
        'scenario': config.name,
        'feasible': result.feasible,
        'gravity': config.gravity,
        'design': design_to_data(config.robot, design),
        'target': {
            'force_center': list(config.target.force_center),
            'force_radii': list(config.target.force_radii),
            'velocity_radii': list(config.target.velocity_radii),
            'n_directions': config.target.n_directions,
        },
    }
    if not result.feasible:
        return report

    report['totals'] = {'e_force': result.e_force, 'e_velocity': result.e_velocity}
    report['states'] = [
        _state_report(config, design, q, h_force, h_velocity, n_rays)
        for q, h_force, h_velocity in zip(scenario.joint_states, result.h_force, result.h_velocity)
    ]
    return report


def write_samples(path, archive, space):
    reals = [f'r{k}' for k in range(space.n_reals)]
    categoricals = [f'c{k}' for k in range(space.n_categoricals)]
    path = Path(path)
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['index', 'generation', 'feasible', 'e_force', 'e_velocity'] + reals + categoricals)
        for sample in archive.samples:
            writer.writerow(
                [sample.index, sample.generation, int(sample.feasible), *sample.objectives]
                + list(sample.genome.reals)
                + list(sample.genome.categoricals)
            )
    logger.info('Wrote %s (%d rows)', path, archive.evaluations)
    return path


def front_entries(config, archive):
    space = config.space()
    balanced = archive.balanced()
    return [
        {
            'index': member.index,
            'generation': member.generation,
            'e_force': member.objectives[0],
            'e_velocity': member.objectives[1],
            'balanced': member is balanced,
            'genome': member.genome.as_dict(),
            'design': design_to_data(config.robot, space.decode(member.genome)),
        }
        for member in archive.sorted_front()
    ]


def pareto_document(config, archive):
    balanced = archive.balanced()
    return {
        'schema_version': SCHEMA_VERSION,
        'scenario': config.name,
        'seed': archive.seed,
        'evaluations': archive.evaluations,
        'balanced_index': balanced.index if balanced else None,
        'front': front_entries(config, archive),
    }


def run_meta_document(config, archive, elapsed_seconds, workers, algorithm='nsga2'):
    return {
        'schema_version': SCHEMA_VERSION,
        'algorithm': algorithm,
        'seed': config.seed,
        'budget': config.budget,
        'population': config.population,
        'evaluations': archive.evaluations,
        'feasible_evaluations': sum(1 for sample in archive.samples if sample.feasible),
        'generations': len(archive.history),
        'workers': workers,
        'elapsed_seconds': elapsed_seconds,
        'config': config.to_document(),
    }


@transaction.atomic
def record_run(config, archive, elapsed_seconds):
    """Store a finished run and its reported front in the archive tables."""
    run = OptimizationRun.objects.create(
        scenario_name=config.name,
        mode=config.kind.upper(),
        wires=config.wires,
        relays=config.relays if config.kind == VARIABLE else None,
        gravity=config.gravity,
        seed=config.seed,
        budget=config.budget,
        population=config.population,
        evaluations=archive.evaluations,
        config=config.to_document(),
        elapsed_seconds=elapsed_seconds,
    )
    ParetoSolution.objects.bulk_create([
        ParetoSolution(
            run=run,
            sample_index=entry['index'],
            e_force=entry['e_force'],
            e_velocity=entry['e_velocity'],
            genome=entry['genome'],
            design=entry['design'],
            is_balanced=entry['balanced'],
        )
        for entry in front_entries(config, archive)
    ])
    logger.info('Recorded run %s with %d front members', run.id, run.front.count())
    return run
