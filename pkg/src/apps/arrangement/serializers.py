from rest_framework import serializers

import numpy as np

from .wires import CONSTANT, KINDS, VARIABLE, RelayPoint, WireArrangement


class RelayPointSerializer(serializers.Serializer):
    link = serializers.IntegerField(min_value=0)
    frac = serializers.FloatField(min_value=0.0, max_value=1.0)


class DesignSerializer(serializers.Serializer):
    """
    Design document: {"kind": "variable", "wires": [[{"link": d, "frac": l}, ...], ...]}
    or {"kind": "constant", "arms": M x D moment arms in meters}.
    """
    kind = serializers.ChoiceField(choices=KINDS)
    wires = serializers.ListField(
        child=serializers.ListField(child=RelayPointSerializer(), min_length=2),
        required=False,
    )
    arms = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=1),
        required=False,
    )

    def validate(self, attrs):
        if attrs['kind'] == VARIABLE:
            if not attrs.get('wires'):
                raise serializers.ValidationError({'wires': 'Variable designs need wires.'})
            for m, wire in enumerate(attrs['wires']):
                if wire[0]['link'] != 0:
                    raise serializers.ValidationError({'wires': f'Wire {m} must start on LINK_0.'})
        elif not attrs.get('arms'):
            raise serializers.ValidationError({'arms': 'Constant designs need arms.'})
        elif len({len(row) for row in attrs['arms']}) != 1:
            raise serializers.ValidationError({'arms': 'Every moment-arm row must have the same length.'})
        return attrs


def design_from_data(model, data):
    """Build a WireArrangement from validated design data for the given robot."""
    if data['kind'] == VARIABLE:
        wires = [
            tuple(RelayPoint(p['link'], p['frac']) for p in wire)
            for wire in data['wires']
        ]
        design = WireArrangement.variable(wires)
    else:
        ranges = np.asarray(model.moment_arm_ranges)
        arms = np.asarray(data['arms'], dtype=float)
        if arms.ndim != 2 or arms.shape[1] != model.n_joints:
            raise serializers.ValidationError(
                {'arms': f'Moment-arm rows must have {model.n_joints} entries.'}
            )
        span = ranges[:, 1] - ranges[:, 0]
        safe = np.where(span == 0.0, 1.0, span)
        fractions = np.where(span == 0.0, 0.0, (arms - ranges[:, 0]) / safe)
        if np.any(fractions < -1e-12) or np.any(fractions > 1.0 + 1e-12):
            raise serializers.ValidationError(
                {'arms': 'Moment arms must lie inside the robot moment-arm ranges.'}
            )
        design = WireArrangement.constant(np.clip(fractions, 0.0, 1.0).tolist())
    design.check_against(model)
    return design


def design_to_data(model, design):
    if design.kind == CONSTANT:
        return {'kind': CONSTANT, 'arms': model.arm_values(design.arms).tolist()}
    return {
        'kind': VARIABLE,
        'wires': [
            [{'link': p.link_id, 'frac': p.fraction} for p in wire]
            for wire in design.wires
        ],
    }
