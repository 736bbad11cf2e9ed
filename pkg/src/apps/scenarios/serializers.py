from rest_framework import serializers

from apps.arrangement.serializers import DesignSerializer
from apps.arrangement.wires import KINDS, VARIABLE

SCHEMA_VERSION = 1


def _vector(length=2, **kwargs):
    return serializers.ListField(
        child=serializers.FloatField(), min_length=length, max_length=length, **kwargs
    )


class RobotSerializer(serializers.Serializer):
    link_lengths = serializers.ListField(child=serializers.FloatField(), min_length=2)
    link_masses = serializers.ListField(child=serializers.FloatField(min_value=0.0), min_length=2)
    attach_segments = serializers.ListField(
        child=serializers.ListField(child=_vector(), min_length=2, max_length=2),
        required=False,
    )
    gravity = _vector(required=False)
    moment_arm_ranges = serializers.ListField(child=_vector(), required=False)

    def validate(self, attrs):
        if len(attrs['link_masses']) != len(attrs['link_lengths']):
            raise serializers.ValidationError({'link_masses': 'One mass per link is required.'})
        if any(length <= 0 for length in attrs['link_lengths']):
            raise serializers.ValidationError({'link_lengths': 'Link lengths must be positive.'})
        n_joints = len(attrs['link_lengths']) - 1
        ranges = attrs.get('moment_arm_ranges')
        if ranges is not None and len(ranges) != n_joints:
            raise serializers.ValidationError(
                {'moment_arm_ranges': f'One range per joint ({n_joints}) is required.'}
            )
        return attrs


class ModeSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=KINDS)
    wires = serializers.IntegerField(min_value=1)
    relays = serializers.IntegerField(min_value=2, required=False)

    def validate(self, attrs):
        if attrs['kind'] == VARIABLE and 'relays' not in attrs:
            raise serializers.ValidationError({'relays': 'Variable mode needs a relay count.'})
        if attrs['kind'] != VARIABLE:
            attrs.pop('relays', None)
        return attrs


class LimitsSerializer(serializers.Serializer):
    f_min = serializers.FloatField()
    f_max = serializers.FloatField()
    ldot_min = serializers.FloatField()
    ldot_max = serializers.FloatField()

    def validate(self, attrs):
        if not 0.0 < attrs['f_min'] < attrs['f_max']:
            raise serializers.ValidationError({'f_max': 'Tension limits must satisfy 0 < f_min < f_max.'})
        if not attrs['ldot_min'] < 0.0 < attrs['ldot_max']:
            raise serializers.ValidationError({'ldot_max': 'Velocity limits must satisfy ldot_min < 0 < ldot_max.'})
        return attrs


class TargetsSerializer(serializers.Serializer):
    force_center = _vector(required=False, default=[0.0, 0.0])
    force_radii = _vector()
    velocity_radii = _vector()
    n_directions = serializers.IntegerField(min_value=3, default=8)

    def validate(self, attrs):
        if min(attrs['force_radii'] + attrs['velocity_radii']) <= 0:
            raise serializers.ValidationError({'force_radii': 'Ellipse radii must be positive.'})
        return attrs


class OptimizerSettingsSerializer(serializers.Serializer):
    population = serializers.IntegerField(min_value=2, default=100)
    budget = serializers.IntegerField(min_value=2, default=10000)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, default=0)

    def validate(self, attrs):
        if attrs['population'] % 2:
            raise serializers.ValidationError({'population': 'Population size must be even.'})
        if attrs['budget'] < attrs['population']:
            raise serializers.ValidationError({'budget': 'Budget must cover the initial population.'})
        return attrs


class ScenarioConfigSerializer(serializers.Serializer):
    """Scenario document; joint states are given in degrees."""
    schema_version = serializers.IntegerField()
    name = serializers.CharField(max_length=100, default='scenario')
    robot = RobotSerializer()
    mode = ModeSerializer()
    limits = LimitsSerializer()
    targets = TargetsSerializer()
    gravity = serializers.BooleanField(default=False)
    evaluated_joint_states = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=1),
        min_length=1,
    )
    optimizer = OptimizerSettingsSerializer(required=False)
    h_cap = serializers.FloatField(min_value=1.0, required=False)
    notes = serializers.DictField(child=serializers.CharField(), required=False)

    def validate_schema_version(self, value):
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(f'Unsupported schema version {value}; expected {SCHEMA_VERSION}.')
        return value

    def validate(self, attrs):
        n_joints = len(attrs['robot']['link_lengths']) - 1
        for k, state in enumerate(attrs['evaluated_joint_states']):
            if len(state) != n_joints:
                raise serializers.ValidationError({
                    'evaluated_joint_states': f'State {k} has {len(state)} angles; the robot has {n_joints} joints.'
                })
        if 'optimizer' not in attrs:
            attrs['optimizer'] = OptimizerSettingsSerializer().to_internal_value({})
        return attrs


class EvaluateRequestSerializer(serializers.Serializer):
    config = ScenarioConfigSerializer()
    design = DesignSerializer()


# --- Result documents ---

class PolygonSerializer(serializers.Serializer):
    vertices = serializers.ListField(child=_vector())
    bounded = serializers.BooleanField()


class GravityCenterSerializer(serializers.Serializer):
    center = _vector()
    residual = serializers.FloatField(min_value=0.0)
    singular = serializers.BooleanField()


class StateReportSerializer(serializers.Serializer):
    angles_deg = serializers.ListField(child=serializers.FloatField(), min_length=1)
    chain = serializers.ListField(child=_vector(), min_length=3)
    h_force = serializers.ListField(child=serializers.FloatField(min_value=0.0))
    h_velocity = serializers.ListField(child=serializers.FloatField(min_value=0.0))
    force_center = _vector()
    force_polygon = PolygonSerializer()
    velocity_polygon = PolygonSerializer()
    wires = serializers.ListField(child=serializers.ListField(child=_vector()), required=False)
    gravity_center = GravityCenterSerializer(required=False)


class TotalsSerializer(serializers.Serializer):
    e_force = serializers.FloatField(min_value=0.0)
    e_velocity = serializers.FloatField(min_value=0.0)


class ReportSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(min_value=SCHEMA_VERSION, max_value=SCHEMA_VERSION)
    scenario = serializers.CharField()
    feasible = serializers.BooleanField()
    gravity = serializers.BooleanField()
    design = DesignSerializer()
    target = TargetsSerializer()
    totals = TotalsSerializer(required=False)
    states = StateReportSerializer(many=True, required=False)

    def validate(self, attrs):
        if attrs['feasible'] and not attrs.get('states'):
            raise serializers.ValidationError({'states': 'A feasible report lists its evaluated states.'})
        return attrs


class FrontMemberSerializer(serializers.Serializer):
    index = serializers.IntegerField(min_value=0)
    generation = serializers.IntegerField(min_value=0)
    e_force = serializers.FloatField(min_value=0.0)
    e_velocity = serializers.FloatField(min_value=0.0)
    balanced = serializers.BooleanField()
    genome = serializers.DictField()
    design = DesignSerializer()


class ParetoDocumentSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(min_value=SCHEMA_VERSION, max_value=SCHEMA_VERSION)
    scenario = serializers.CharField()
    seed = serializers.IntegerField(min_value=0)
    evaluations = serializers.IntegerField(min_value=0)
    balanced_index = serializers.IntegerField(allow_null=True)
    front = FrontMemberSerializer(many=True)


class RunMetaSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(min_value=SCHEMA_VERSION, max_value=SCHEMA_VERSION)
    algorithm = serializers.ChoiceField(choices=['nsga2', 'random'])
    seed = serializers.IntegerField(min_value=0)
    budget = serializers.IntegerField(min_value=1)
    population = serializers.IntegerField(min_value=2)
    evaluations = serializers.IntegerField(min_value=0)
    feasible_evaluations = serializers.IntegerField(min_value=0)
    generations = serializers.IntegerField(min_value=0)
    workers = serializers.IntegerField(min_value=1)
    elapsed_seconds = serializers.FloatField(min_value=0.0)
    config = ScenarioConfigSerializer()
