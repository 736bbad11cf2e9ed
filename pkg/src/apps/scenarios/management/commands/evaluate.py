import json
from pathlib import Path

from apps.arrangement.serializers import DesignSerializer, design_from_data

from ..base import ScenarioCommand
from ...reports import evaluation_report, write_json


class Command(ScenarioCommand):
    help = 'Evaluate one design on a scenario and emit its report (h values, totals, polygons).'

    def add_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument('--design', required=True, help='Design JSON document.')
        parser.add_argument('--out', help='Report file; the report goes to stdout when omitted.')
        parser.add_argument('--rays', type=int, help='Rays per traced polygon.')

    def handle(self, *args, **options):
        config = self.load_scenario(options)
        data = self.read_json(options['design'], 'design')
        with self.command_errors():
            serializer = DesignSerializer(data=data)
            serializer.is_valid(raise_exception=True)
            design = design_from_data(config.robot, serializer.validated_data)
            config.check_design(design)
            report = evaluation_report(config, design, n_rays=options['rays'])

            if options['out']:
                write_json(Path(options['out']), report)
            else:
                self.stdout.write(json.dumps(report, indent=2))
