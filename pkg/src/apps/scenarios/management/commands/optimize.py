import json
import logging
import time
from pathlib import Path

from django.conf import settings

from apps.optimizer.nsga2 import SearchProblem, evolve, random_search

from ..base import ScenarioCommand
from ...plotting import render_samples
from ...reports import (
    evaluation_report, pareto_document, record_run, run_meta_document, write_json, write_samples,
)

logger = logging.getLogger(__name__)


class Command(ScenarioCommand):
    help = 'Search wire arrangements for a scenario and write samples.csv, samples.svg, pareto.json and run_meta.json.'

    def add_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--out', required=True, help='Output directory.')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--budget', type=int, help='Number of design evaluations.')
        parser.add_argument('--population', type=int)
        parser.add_argument('--wires', type=int, help='Override the number of wires M.')
        parser.add_argument('--relays', type=int, help='Override relay points per wire N (variable mode).')
        parser.add_argument('--algorithm', choices=['nsga2', 'random'], default='nsga2')
        parser.add_argument('--progress', help='Append per-generation progress records as JSON lines.')
        parser.add_argument('--record', action='store_true', help='Store the run in the archive database.')
        parser.add_argument('--report', action='store_true', help='Also write report.json for the balanced design.')

    def handle(self, *args, **options):
        config = self.load_scenario(options)
        with self.command_errors():
            config = config.with_overrides(
                seed=options['seed'],
                budget=options['budget'],
                population=options['population'],
                wires=options['wires'],
                relays=options['relays'],
            )
            out = Path(options['out'])
            out.mkdir(parents=True, exist_ok=True)

            problem = SearchProblem(model=config.robot, scenario=config.scenario(), space=config.space())
            workers = settings.TLO_THREADS
            logger.info(
                'Optimizing %s (%s, M=%d, N=%s) with %s: budget %d, seed %d, %d workers',
                config.name, config.kind, config.wires, config.relays or '-',
                options['algorithm'], config.budget, config.seed, workers,
            )

            progress_file = open(options['progress'], 'w', encoding='utf-8') if options['progress'] else None
            try:
                progress = None
                if progress_file is not None:
                    def progress(record):
                        progress_file.write(json.dumps(record) + '\n')
                        progress_file.flush()

                started = time.perf_counter()
                if options['algorithm'] == 'random':
                    archive = random_search(problem, config.budget, config.seed, workers=workers, progress=progress)
                else:
                    archive = evolve(
                        problem, config.budget, config.population, config.seed,
                        workers=workers, progress=progress,
                    )
                elapsed = time.perf_counter() - started
            finally:
                if progress_file is not None:
                    progress_file.close()

            write_samples(out / 'samples.csv', archive, config.space())
            (out / 'samples.svg').write_text(render_samples(archive, config.name), encoding='utf-8')
            write_json(out / 'pareto.json', pareto_document(config, archive))
            write_json(
                out / 'run_meta.json',
                run_meta_document(config, archive, elapsed, workers, algorithm=options['algorithm']),
            )

            balanced = archive.balanced()
            if options['report'] and balanced is not None:
                design = config.space().decode(balanced.genome)
                write_json(out / 'report.json', evaluation_report(config, design))
            if options['record']:
                run = record_run(config, archive, elapsed)
                self.stdout.write(f'Recorded run {run.id}')

        self.stdout.write(self.style.SUCCESS(
            f'{archive.evaluations} evaluations, front of {len(archive.front)} in {elapsed:.1f} s -> {out}'
        ))
