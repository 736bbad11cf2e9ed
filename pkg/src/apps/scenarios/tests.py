import csv
import json
import tempfile
import xml.etree.ElementTree as ET
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse
from numpy.testing import assert_allclose
from rest_framework import status
from rest_framework.test import APITestCase

from apps.arrangement.wires import WireArrangement
from apps.optimizer.models import OptimizationRun
from apps.oracle.checks import compare_state

from .config import ConfigError, available_presets, load_config, load_preset, validate_document
from .serializers import ParetoDocumentSerializer, ReportSerializer, RunMetaSerializer

SVG = '{http://www.w3.org/2000/svg}'

ON_BASE = {
    'kind': 'variable',
    'wires': [
        [{'link': 0, 'frac': 0.1}, {'link': 0, 'frac': 0.9}],
        [{'link': 0, 'frac': 0.3}, {'link': 0, 'frac': 0.6}],
        [{'link': 0, 'frac': 0.0}, {'link': 0, 'frac': 1.0}],
    ],
}
CROSS = {'kind': 'constant', 'arms': [[0.1, 0.0], [-0.1, 0.0], [0.0, 0.1], [0.0, -0.1]]}


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write(self, name, payload):
        path = self.tmp / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding='utf-8')
        return path


class ConfigTests(TempDirMixin, SimpleTestCase):
    def test_presets_load(self):
        self.assertEqual(
            available_presets(),
            ['constant_relaxed', 'constant_restricted', 'target1_grav', 'target1_nograv', 'target2_nograv'],
        )
        for name in available_presets():
            config = load_preset(name)
            self.assertEqual(config.name, name)
            self.assertEqual(len(config.scenario().joint_states), len(config.joint_states_deg))
            self.assertIn('assumed', config.notes)

    def test_preset_settings(self):
        config = load_preset('target1_grav')
        self.assertEqual((config.kind, config.wires, config.relays, config.gravity), ('variable', 4, 2, True))
        relaxed = load_preset('constant_relaxed')
        self.assertEqual(relaxed.robot.moment_arm_ranges, ((-0.4, 0.4), (-0.4, 0.4)))
        self.assertEqual(relaxed.budget, 50000)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError):
            load_preset('no_such_preset')

    def test_document_round_trip(self):
        config = load_preset('target2_nograv')
        self.assertEqual(validate_document(config.to_document()), config)

    def test_defaults_are_filled(self):
        document = load_preset('target1_nograv').to_document()
        del document['optimizer']
        del document['targets']['n_directions']
        config = validate_document(document)
        self.assertEqual((config.population, config.budget, config.seed), (100, 10000, 0))
        self.assertEqual(config.target.n_directions, 8)
        self.assertEqual(config.resolved_h_cap, 10.0)

    def test_error_names_file_and_line(self):
        document = load_preset('target1_nograv').to_document()
        document['limits']['f_min'] = 300.0
        text = json.dumps(document, indent=2)
        path = self.write('bad.json', text)
        expected_line = text[:text.index('"f_max"')].count('\n') + 1
        with self.assertRaises(ConfigError) as cm:
            load_config(path)
        self.assertEqual(cm.exception.line, expected_line)
        self.assertIn(f'bad.json:{expected_line}:', str(cm.exception))

    def test_schema_version_is_checked(self):
        document = load_preset('target1_nograv').to_document()
        document['schema_version'] = 2
        with self.assertRaises(ConfigError) as cm:
            load_config(self.write('old.json', json.dumps(document, indent=2)))
        self.assertEqual(cm.exception.line, 2)

    def test_syntax_error_line(self):
        with self.assertRaises(ConfigError) as cm:
            load_config(self.write('broken.json', '{\n  "name": "x",\n  oops\n}'))
        self.assertEqual(cm.exception.line, 3)

    def test_state_width_must_match_joints(self):
        document = load_preset('target1_nograv').to_document()
        document['evaluated_joint_states'].append([10.0, 20.0, 30.0])
        with self.assertRaisesMessage(ConfigError, 'evaluated_joint_states'):
            validate_document(document)

    def test_overrides(self):
        config = load_preset('constant_restricted')
        changed = config.with_overrides(seed=5, budget=None, relays=3)
        self.assertEqual(changed.seed, 5)
        self.assertEqual(changed.budget, config.budget)
        self.assertEqual(changed.relays, 0)
        self.assertIs(config.with_overrides(seed=None), config)
        with self.assertRaises(ConfigError):
            config.with_overrides(population=7)


class OptimizeCommandTests(TempDirMixin, TestCase):
    def optimize(self, out, **options):
        options = {'preset': 'target1_nograv', 'budget': 40, 'population': 20, 'seed': 3, **options}
        call_command('optimize', out=str(out), stdout=StringIO(), stderr=StringIO(), **options)
        return out

    def test_writes_the_result_documents(self):
        out = self.optimize(self.tmp / 'run')
        with (out / 'samples.csv').open(encoding='utf-8') as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(len(rows), 40)
        self.assertEqual([int(row['index']) for row in rows], list(range(40)))
        self.assertEqual(sum(1 for key in rows[0] if key.startswith('r')), 6)
        self.assertEqual(sum(1 for key in rows[0] if key.startswith('c')), 3)

        pareto = json.loads((out / 'pareto.json').read_text())
        serializer = ParetoDocumentSerializer(data=pareto)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(pareto['evaluations'], 40)
        self.assertEqual(sum(member['balanced'] for member in pareto['front']), 1 if pareto['front'] else 0)

        meta = json.loads((out / 'run_meta.json').read_text())
        serializer = RunMetaSerializer(data=meta)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual((meta['seed'], meta['budget'], meta['generations']), (3, 40, 2))
        echoed = load_preset('target1_nograv').with_overrides(seed=3, budget=40, population=20)
        self.assertEqual(validate_document(meta['config']), echoed)

    def test_samples_panel(self):
        out = self.optimize(self.tmp / 'run')
        with (out / 'samples.csv').open(encoding='utf-8') as handle:
            feasible = {int(row['index']) for row in csv.DictReader(handle) if row['feasible'] == '1'}
        pareto = json.loads((out / 'pareto.json').read_text())

        root = ET.parse(out / 'samples.svg').getroot()
        self.assertEqual(root.tag, f'{SVG}svg')
        circles = {}
        for circle in root.iter(f'{SVG}circle'):
            circles.setdefault(circle.get('class'), []).append(circle)
        self.assertEqual(len(circles.get('sample', [])), len(feasible))
        self.assertEqual(len(circles.get('pareto', [])), len(pareto['front']))
        self.assertEqual(len(circles.get('balanced', [])), 1 if pareto['front'] else 0)
        self.assertTrue({member['index'] for member in pareto['front']} <= feasible)
        if pareto['front']:
            balanced = next(member for member in pareto['front'] if member['balanced'])
            ring = circles['balanced'][0]
            self.assertTrue(any(
                (dot.get('cx'), dot.get('cy')) == (ring.get('cx'), ring.get('cy')) for dot in circles['pareto']
            ))
            self.assertEqual(balanced['index'], pareto['balanced_index'])

    def test_same_seed_same_outputs(self):
        first = self.optimize(self.tmp / 'a')
        second = self.optimize(self.tmp / 'b')
        for name in ('samples.csv', 'pareto.json'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())

    def test_progress_report_and_record(self):
        progress = self.tmp / 'progress.jsonl'
        out = self.optimize(self.tmp / 'run', progress=str(progress), report=True, record=True)
        records = [json.loads(line) for line in progress.read_text().splitlines()]
        self.assertEqual([record['evaluations'] for record in records], [20, 40])

        pareto = json.loads((out / 'pareto.json').read_text())
        if pareto['front']:
            report = json.loads((out / 'report.json').read_text())
            self.assertTrue(ReportSerializer(data=report).is_valid())
        run = OptimizationRun.objects.get()
        self.assertEqual(run.evaluations, 40)
        self.assertEqual(run.front.count(), len(pareto['front']))

    def test_random_baseline(self):
        out = self.optimize(self.tmp / 'run', algorithm='random')
        self.assertEqual(json.loads((out / 'run_meta.json').read_text())['algorithm'], 'random')

    def test_bad_overrides_are_usage_errors(self):
        with self.assertRaises(CommandError) as cm:
            self.optimize(self.tmp / 'run', population=21)
        self.assertEqual(cm.exception.returncode, 2)

    def test_missing_config_file(self):
        with self.assertRaises(CommandError) as cm:
            call_command('optimize', config=str(self.tmp / 'missing.json'), out=str(self.tmp), stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 1)


class EvaluatePlotCommandTests(TempDirMixin, SimpleTestCase):
    def evaluate(self, design, preset='target1_nograv'):
        out = self.tmp / 'report.json'
        call_command(
            'evaluate', preset=preset, design=str(self.write('design.json', design)), out=str(out),
            rays=16, stdout=StringIO(),
        )
        return out

    def plot(self, report):
        out = self.tmp / 'svg'
        call_command('plot', report=str(report), out=str(out), stdout=StringIO())
        return out

    def test_wires_on_the_base(self):
        report = json.loads(self.evaluate(ON_BASE).read_text())
        self.assertTrue(report['feasible'])
        self.assertEqual(report['totals'], {'e_force': 32.0, 'e_velocity': 0.0})
        self.assertEqual(len(report['states']), 4)
        self.assertTrue(ReportSerializer(data=report).is_valid())

    def test_report_on_stdout(self):
        stdout = StringIO()
        call_command(
            'evaluate', preset='constant_restricted', design=str(self.write('design.json', CROSS)),
            rays=8, stdout=stdout,
        )
        self.assertTrue(json.loads(stdout.getvalue())['feasible'])

    def test_constant_report_matches_exact_polygons(self):
        config = load_preset('constant_restricted')
        report = json.loads(self.evaluate(CROSS, preset='constant_restricted').read_text())
        design = WireArrangement.constant([[1.0, 0.5], [0.0, 0.5], [0.5, 1.0], [0.5, 0.0]])
        for q, state in zip(config.scenario().joint_states, report['states']):
            rows = compare_state(config.robot, design, q, config.target, config.limits, h_cap=config.resolved_h_cap)
            exact = [row[3] for row in rows]
            assert_allclose(state['h_force'] + state['h_velocity'], exact, atol=1e-6)

    def test_unproducible_gravity_is_infeasible(self):
        design = dict(ON_BASE, wires=ON_BASE['wires'] + [ON_BASE['wires'][0]])
        report = json.loads(self.evaluate(design, preset='target1_grav').read_text())
        self.assertFalse(report['feasible'])
        self.assertNotIn('totals', report)

    def test_dimension_mismatch_is_a_usage_error(self):
        with self.assertRaises(CommandError) as cm:
            self.evaluate(ON_BASE, preset='target1_grav')
        self.assertEqual(cm.exception.returncode, 2)
        with self.assertRaises(CommandError) as cm:
            self.evaluate(CROSS)
        self.assertEqual(cm.exception.returncode, 2)

    def test_invalid_design_document(self):
        with self.assertRaises(CommandError) as cm:
            self.evaluate({'kind': 'variable'})
        self.assertEqual(cm.exception.returncode, 2)
        with self.assertRaises(CommandError) as cm:
            self.evaluate('{"kind": ')
        self.assertEqual(cm.exception.returncode, 2)
        with self.assertRaises(CommandError) as cm:
            self.evaluate({'kind': 'constant', 'arms': [[0.1, 0.0], [0.1]]}, preset='constant_restricted')
        self.assertEqual(cm.exception.returncode, 2)

    def test_plot_panels(self):
        out = self.plot(self.evaluate(CROSS, preset='constant_restricted'))
        names = sorted(path.name for path in out.iterdir())
        self.assertEqual(len(names), 9)
        self.assertIn('arrangement.svg', names)

        for name in names:
            root = ET.parse(out / name).getroot()
            self.assertEqual(root.tag, f'{SVG}svg')
            if name == 'arrangement.svg':
                continue
            targets = [p for p in root.iter(f'{SVG}path') if p.get('class') == 'target']
            self.assertEqual(len(targets), 1)
            self.assertEqual(targets[0].get('stroke'), 'blue')
        force = ET.parse(out / 'force_state1.svg').getroot()
        feasible = [p for p in force.iter(f'{SVG}path') if p.get('class') == 'feasible']
        self.assertEqual(len(feasible), 1)
        self.assertTrue(feasible[0].get('d').endswith('Z'))

    def test_degenerate_polygons(self):
        out = self.plot(self.evaluate(ON_BASE))
        force = ET.parse(out / 'force_state1.svg').getroot()
        self.assertEqual(len([c for c in force.iter(f'{SVG}circle') if c.get('class') == 'feasible-point']), 1)
        velocity = ET.parse(out / 'velocity_state1.svg').getroot()
        self.assertFalse([p for p in velocity.iter(f'{SVG}path') if p.get('class') == 'feasible'])
        self.assertTrue(any('unbounded' in (t.text or '') for t in velocity.iter(f'{SVG}text')))

        arrangement = ET.parse(out / 'arrangement.svg').getroot()
        self.assertEqual(len(list(arrangement.iter(f'{SVG}polyline'))), 3)

    def test_infeasible_report_is_not_plotted(self):
        design = dict(ON_BASE, wires=ON_BASE['wires'] + [ON_BASE['wires'][0]])
        report = self.evaluate(design, preset='target1_grav')
        with self.assertRaises(CommandError) as cm:
            self.plot(report)
        self.assertEqual(cm.exception.returncode, 2)


class OracleCommandTests(SimpleTestCase):
    def test_passes_on_constant_preset(self):
        stdout = StringIO()
        call_command('oracle', preset='constant_restricted', trials=5, seed=1, stdout=stdout)
        summary = json.loads(stdout.getvalue())
        self.assertTrue(summary['passed'])
        self.assertEqual(summary['comparisons'], 80)

    def test_zero_tolerance_fails(self):
        with self.assertRaises(CommandError) as cm:
            call_command('oracle', preset='constant_restricted', trials=2, tol=0.0, stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 1)

    def test_usage_errors(self):
        with self.assertRaises(CommandError) as cm:
            call_command('oracle', preset='target1_nograv', trials=1, stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 2)
        with self.assertRaises(CommandError) as cm:
            call_command('oracle', preset='constant_restricted', trials=-1, stdout=StringIO())
        self.assertEqual(cm.exception.returncode, 2)


class EvaluateApiTests(APITestCase):
    def setUp(self):
        self.config = load_preset('target1_nograv').to_document()

    def test_evaluate_design(self):
        response = self.client.post(
            reverse('evaluate-design'), {'config': self.config, 'design': ON_BASE}, format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['totals'], {'e_force': 32.0, 'e_velocity': 0.0})

    def test_invalid_request(self):
        response = self.client.post(reverse('evaluate-design'), {'design': ON_BASE}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('config', response.data)

    def test_design_must_fit_the_scenario(self):
        response = self.client.post(
            reverse('evaluate-design'), {'config': self.config, 'design': CROSS}, format='json',
        )
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('design', response.data)

    def test_ragged_arms_are_a_bad_request(self):
        config = load_preset('constant_restricted').to_document()
        design = {'kind': 'constant', 'arms': [[0.1, 0.0], [0.1]]}
        response = self.client.post(reverse('evaluate-design'), {'config': config, 'design': design}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn('design', response.data)
