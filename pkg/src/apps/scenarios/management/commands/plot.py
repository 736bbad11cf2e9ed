from django.core.management.base import CommandError

from ..base import USAGE_ERROR, ScenarioCommand
from ...plotting import plot_report
from ...serializers import ReportSerializer


class Command(ScenarioCommand):
    help = 'Render an evaluation report as SVG panels (force, velocity per state) and an arrangement drawing.'

    def add_arguments(self, parser):
        parser.add_argument('--report', required=True, help='Report JSON written by evaluate or optimize --report.')
        parser.add_argument('--out', required=True, help='Output directory for the SVG files.')

    def handle(self, *args, **options):
        report = self.read_json(options['report'], 'report')
        serializer = ReportSerializer(data=report)
        if not serializer.is_valid():
            raise CommandError(f'{options["report"]}: invalid report: {serializer.errors}', returncode=USAGE_ERROR)
        if not report['feasible']:
            raise CommandError(f'{options["report"]}: the design is infeasible; nothing to plot.', returncode=USAGE_ERROR)

        with self.command_errors():
            written = plot_report(report, options['out'])
        for path in written:
            self.stdout.write(str(path))
