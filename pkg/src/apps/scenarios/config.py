"""
Scenario documents: loading, validation with file/line context, and the
objects (robot, scenario, design space) a command needs from them.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError as DjangoValidationError

from apps.arrangement.genome import DesignSpace
from apps.arrangement.wires import VARIABLE
from apps.feasibility.spaces import ActuatorLimits, Scenario, TargetSpec
from apps.robot.kinematics import DimensionMismatch, JointState, RobotModel

from .serializers import SCHEMA_VERSION, ScenarioConfigSerializer

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """A scenario document failed to parse or validate."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        location = f'{path}:{line}: ' if path and line else (f'{path}: ' if path else '')
        super().__init__(f'{location}{message}')


def _first_error(detail, trail=()):
    """Walk a DRF error structure to the first message and its key path."""
    if isinstance(detail, dict):
        key = next(iter(detail))
        return _first_error(detail[key], trail + (key,))
    if isinstance(detail, list) and detail:
        if isinstance(detail[0], (dict, list)):
            for index, item in enumerate(detail):
                if item:
                    return _first_error(item, trail + (index,))
        return str(detail[0]), trail
    return str(detail), trail


def _line_of(text, trail):
    """Line of the deepest key in `trail` that occurs in the raw JSON text."""
    position, found = 0, None
    for key in trail:
        if not isinstance(key, str) or key == 'non_field_errors':
            continue
        at = text.find(f'"{key}"', position)
        if at < 0:
            break
        position, found = at, at
    if found is None:
        return 1
    return text.count('\n', 0, found) + 1


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    robot: RobotModel
    kind: str
    wires: int
    relays: int
    limits: ActuatorLimits
    target: TargetSpec
    gravity: bool
    joint_states_deg: tuple
    population: int
    budget: int
    seed: int
    h_cap: float = None
    notes: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_data(cls, data):
        robot = data['robot']
        mode = data['mode']
        optimizer = data['optimizer']
        return cls(
            name=data['name'],
            robot=RobotModel(
                link_lengths=robot['link_lengths'],
                link_masses=robot['link_masses'],
                attach_segments=robot.get('attach_segments', ()),
                gravity=robot.get('gravity', (0.0, -9.81)),
                moment_arm_ranges=robot.get('moment_arm_ranges', ()),
            ),
            kind=mode['kind'],
            wires=mode['wires'],
            relays=mode.get('relays', 0) if mode['kind'] == VARIABLE else 0,
            limits=ActuatorLimits(**data['limits']),
            target=TargetSpec(**data['targets']),
            gravity=data['gravity'],
            joint_states_deg=tuple(tuple(float(a) for a in state) for state in data['evaluated_joint_states']),
            population=optimizer['population'],
            budget=optimizer['budget'],
            seed=optimizer['seed'],
            h_cap=data.get('h_cap'),
            notes=dict(data.get('notes', {})),
        )

    @property
    def resolved_h_cap(self):
        if self.h_cap is not None:
            return self.h_cap
        return settings.TENDON_LAB['H_CAP']

    def scenario(self):
        return Scenario(
            joint_states=tuple(JointState.from_degrees(q) for q in self.joint_states_deg),
            target=self.target,
            limits=self.limits,
            gravity=self.gravity,
            h_cap=self.resolved_h_cap,
        )

    def space(self):
        return DesignSpace(
            kind=self.kind,
            n_wires=self.wires,
            n_relays=self.relays,
            n_joints=self.robot.n_joints,
        )

    def check_design(self, design):
        """Reject a design whose kind or size differs from this scenario."""
        if design.kind != self.kind:
            raise DimensionMismatch(f'Design is {design.kind} but the scenario is {self.kind}.')
        if design.n_wires != self.wires:
            raise DimensionMismatch(f'Design has {design.n_wires} wires, the scenario expects {self.wires}.')
        if design.kind == VARIABLE and any(len(wire) != self.relays for wire in design.wires):
            raise DimensionMismatch(f'Every wire needs {self.relays} relay points.')
        design.check_against(self.robot)

    def with_overrides(self, **overrides):
        """Copy with command-line overrides applied; None values are ignored."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        if self.kind != VARIABLE:
            changes.pop('relays', None)
        if not changes:
            return self
        return validate_document(replace(self, **changes).to_document())

    def to_document(self):
        mode = {'kind': self.kind, 'wires': self.wires}
        if self.kind == VARIABLE:
            mode['relays'] = self.relays
        document = {
            'schema_version': SCHEMA_VERSION,
            'name': self.name,
            'robot': {
                'link_lengths': list(self.robot.link_lengths),
                'link_masses': list(self.robot.link_masses),
                'attach_segments': [[list(p) for p in segment] for segment in self.robot.attach_segments],
                'gravity': list(self.robot.gravity),
                'moment_arm_ranges': [list(r) for r in self.robot.moment_arm_ranges],
            },
            'mode': mode,
            'limits': {
                'f_min': self.limits.f_min,
                'f_max': self.limits.f_max,
                'ldot_min': self.limits.ldot_min,
                'ldot_max': self.limits.ldot_max,
            },
            'targets': {
                'force_center': list(self.target.force_center),
                'force_radii': list(self.target.force_radii),
                'velocity_radii': list(self.target.velocity_radii),
                'n_directions': self.target.n_directions,
            },
            'gravity': self.gravity,
            'evaluated_joint_states': [list(q) for q in self.joint_states_deg],
            'optimizer': {'population': self.population, 'budget': self.budget, 'seed': self.seed},
        }
        if self.h_cap is not None:
            document['h_cap'] = self.h_cap
        if self.notes:
            document['notes'] = dict(self.notes)
        return document


def validate_document(document, path=None, text=None):
    serializer = ScenarioConfigSerializer(data=document)
    if not serializer.is_valid():
        message, trail = _first_error(serializer.errors)
        where = '.'.join(str(k) for k in trail if k != 'non_field_errors') or 'document'
        line = _line_of(text, trail) if text is not None else None
        raise ConfigError(f'{where}: {message}', path=path, line=line)
    try:
        return ScenarioConfig.from_data(serializer.validated_data)
    except DjangoValidationError as exc:
        messages = exc.message_dict if hasattr(exc, 'error_dict') else {'document': exc.messages}
        key = next(iter(messages))
        line = _line_of(text, (key,)) if text is not None else None
        raise ConfigError(f'{key}: {messages[key][0]}', path=path, line=line) from exc
    except ValueError as exc:
        raise ConfigError(str(exc), path=path) from exc


def load_config(path):
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, path=path, line=exc.lineno) from exc
    config = validate_document(document, path=path, text=text)
    logger.debug('Loaded scenario %s from %s', config.name, path)
    return config


def preset_path(name):
    return Path(settings.TENDON_LAB['PRESETS_DIR']) / f'{name}.json'


def available_presets():
    return sorted(p.stem for p in Path(settings.TENDON_LAB['PRESETS_DIR']).glob('*.json'))


def load_preset(name):
    path = preset_path(name)
    if not path.exists():
        raise ConfigError(f'unknown preset {name!r}; choose from {", ".join(available_presets())}')
    return load_config(path)
