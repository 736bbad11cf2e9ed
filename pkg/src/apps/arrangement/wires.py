"""
Wire arrangements and the muscle Jacobian G(theta).

Variable designs route every wire through relay points fixed on links; the
wire is the polyline through them. Constant designs give every wire a fixed
moment arm per joint (pulley routing).
"""
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from apps.robot.kinematics import DimensionMismatch, forward_kinematics, rot90

VARIABLE = 'variable'
CONSTANT = 'constant'
KINDS = [(VARIABLE, 'Variable relay points'), (CONSTANT, 'Constant moment arms')]

# Consecutive relay points closer than this contribute nothing to length or G.
DEGENERATE_SEGMENT = 1e-9


@dataclass(frozen=True)
class RelayPoint:
    link_id: int
    fraction: float

    def __post_init__(self):
        object.__setattr__(self, 'link_id', int(self.link_id))
        object.__setattr__(self, 'fraction', float(self.fraction))
        if self.link_id < 0:
            raise ValidationError({'link_id': 'Relay link index must be non-negative.'})
        if not 0.0 <= self.fraction <= 1.0:
            raise ValidationError({'fraction': f'Relay fraction {self.fraction} is outside [0, 1].'})


@dataclass(frozen=True)
class WireArrangement:
    kind: str
    # VARIABLE: M tuples of RelayPoint
    wires: tuple = ()
    # CONSTANT: M x D fractions r^m_d in [0, 1]
    arms: tuple = ()

    def __post_init__(self):
        if self.kind == VARIABLE:
            wires = tuple(
                tuple(p if isinstance(p, RelayPoint) else RelayPoint(*p) for p in wire)
                for wire in self.wires
            )
            object.__setattr__(self, 'wires', wires)
            object.__setattr__(self, 'arms', ())
        elif self.kind == CONSTANT:
            arms = tuple(tuple(float(r) for r in row) for row in self.arms)
            object.__setattr__(self, 'arms', arms)
            object.__setattr__(self, 'wires', ())
        else:
            raise ValidationError({'kind': f'Unknown arrangement kind {self.kind!r}.'})
        self.clean()

    @classmethod
    def variable(cls, wires):
        return cls(kind=VARIABLE, wires=wires)

    @classmethod
    def constant(cls, arms):
        return cls(kind=CONSTANT, arms=arms)

    @property
    def n_wires(self):
        return len(self.wires) if self.kind == VARIABLE else len(self.arms)

    def clean(self):
        if self.n_wires < 1:
            raise ValidationError('An arrangement needs at least one wire.')
        if self.kind == VARIABLE:
            for m, wire in enumerate(self.wires):
                if len(wire) < 2:
                    raise ValidationError({'wires': f'Wire {m} needs at least two relay points.'})
                if wire[0].link_id != 0:
                    raise ValidationError({'wires': f'Wire {m} must start on LINK_0.'})
        else:
            widths = {len(row) for row in self.arms}
            if len(widths) != 1 or 0 in widths:
                raise ValidationError({'arms': 'Moment-arm rows must be non-empty and equally long.'})
            if any(not 0.0 <= r <= 1.0 for row in self.arms for r in row):
                raise ValidationError({'arms': 'Moment-arm fractions must lie in [0, 1].'})

    def check_against(self, model):
        """Raise unless the design fits the robot's link and joint counts."""
        if self.kind == VARIABLE:
            for m, wire in enumerate(self.wires):
                for point in wire:
                    if point.link_id > model.n_joints:
                        raise ValidationError(
                            {'wires': f'Wire {m} references LINK_{point.link_id}; '
                                      f'the robot has LINK_0..LINK_{model.n_joints}.'}
                        )
        elif len(self.arms[0]) != model.n_joints:
            raise DimensionMismatch(
                f'Moment-arm rows have {len(self.arms[0])} entries, the robot has {model.n_joints} joints.'
            )


def _wire_points(model, wire, pose):
    ids = np.array([p.link_id for p in wire])
    local = np.array([model.segment_point(p.link_id, p.fraction) for p in wire])
    frames = pose.link_frames[ids]
    world = np.einsum('nij,nj->ni', frames[:, :2, :2], local) + frames[:, :2, 2]
    return ids, world


def _require_variable(design):
    if design.kind != VARIABLE:
        raise ValidationError('Wire paths exist only for variable relay-point designs.')


def relay_world_positions(model, design, q, pose=None):
    _require_variable(design)
    design.check_against(model)
    pose = pose if pose is not None else forward_kinematics(model, q)
    return [_wire_points(model, wire, pose)[1] for wire in design.wires]


def _segment_lengths(world):
    lengths = np.linalg.norm(np.diff(world, axis=0), axis=1)
    lengths[lengths <= DEGENERATE_SEGMENT] = 0.0
    return lengths


def wire_lengths(model, design, q):
    return np.array([
        float(np.sum(_segment_lengths(world)))
        for world in relay_world_positions(model, design, q)
    ])


def _variable_row(model, wire, pose):
    ids, world = _wire_points(model, wire, pose)
    segments = np.diff(world, axis=0)
    lengths = _segment_lengths(world)
    units = np.zeros_like(segments)
    live = lengths > 0.0
    units[live] = segments[live] / lengths[live, None]

    # d p_n / d theta_k = rot90(p_n - joint_k) when p_n rides on LINK_k or beyond
    lever = world[:, None, :] - pose.joint_positions[None, :, :]
    carried = ids[:, None] >= np.arange(1, model.n_joints + 1)[None, :]
    moves = rot90(lever) * carried[..., None]
    return np.einsum('si,sdi->d', units, np.diff(moves, axis=0))


def muscle_jacobian(model, design, q):
    """G with l_dot = G theta_dot, so that tau = -G^T f."""
    design.check_against(model)
    if design.kind == CONSTANT:
        return -model.arm_values(design.arms)
    pose = forward_kinematics(model, q)
    return np.array([_variable_row(model, wire, pose) for wire in design.wires])
