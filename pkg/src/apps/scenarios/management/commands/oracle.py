import json

from django.conf import settings
from django.core.management.base import CommandError

from apps.oracle.checks import run_oracle

from ..base import RUNTIME_ERROR, USAGE_ERROR, ScenarioCommand


class Command(ScenarioCommand):
    help = 'Compare LP ray scores with exact polygons on random constant-arm designs.'

    def add_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--trials', type=int, default=100)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--tol', type=float, help='Largest accepted |h_LP - h_exact|.')

    def handle(self, *args, **options):
        config = self.load_scenario(options)
        tol = options['tol'] if options['tol'] is not None else settings.TENDON_LAB['ORACLE_TOL']
        if options['trials'] < 0:
            raise CommandError('--trials must be non-negative.', returncode=USAGE_ERROR)

        with self.command_errors():
            summary = run_oracle(
                config.robot, config.space(), config.scenario(),
                trials=options['trials'], seed=options['seed'], tol=tol,
            )
        self.stdout.write(json.dumps(summary.as_dict(), indent=2))
        if not summary.passed:
            raise CommandError(
                f'{summary.failures} of {summary.comparisons} comparisons exceed tol {tol:g}.',
                returncode=RUNTIME_ERROR,
            )
