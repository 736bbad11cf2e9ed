from rest_framework import serializers

from .models import OptimizationRun, ParetoSolution


class ParetoSolutionSerializer(serializers.ModelSerializer):
    class Meta:
        model = ParetoSolution
        fields = ['sample_index', 'e_force', 'e_velocity', 'is_balanced', 'genome', 'design']


class OptimizationRunSerializer(serializers.ModelSerializer):
    seed = serializers.IntegerField(read_only=True)
    front_size = serializers.SerializerMethodField()

    class Meta:
        model = OptimizationRun
        fields = [
            'id', 'scenario_name', 'mode', 'wires', 'relays', 'gravity',
            'seed', 'budget', 'population', 'evaluations', 'elapsed_seconds',
            'created_at', 'front_size',
        ]

    def get_front_size(self, obj):
        return obj.front.count()


class OptimizationRunDetailSerializer(OptimizationRunSerializer):
    front = ParetoSolutionSerializer(many=True, read_only=True)

    class Meta(OptimizationRunSerializer.Meta):
        fields = OptimizationRunSerializer.Meta.fields + ['config', 'front']
