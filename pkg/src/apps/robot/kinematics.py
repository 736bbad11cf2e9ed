"""
Planar serial-chain kinematics.

LINK_0 is fixed in the world frame, running along +x from the origin. Joint k
(1-based) sits at the distal end of LINK_{k-1}; theta_k rotates LINK_k about it,
counterclockwise positive. The end effector is the tip of LINK_D.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.core.exceptions import ValidationError

DEFAULT_GRAVITY = (0.0, -9.81)
DEFAULT_ARM_RANGE = (-0.1, 0.1)
ATTACH_TOLERANCE = 1e-9


class DimensionMismatch(ValueError):
    """A joint vector or matrix does not match the robot's joint count."""


def rot90(v):
    """Rotate 2-D vectors by +90 degrees: (x, y) -> (-y, x), along the last axis."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _pair(values):
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class RobotModel:
    link_lengths: tuple
    link_masses: tuple
    # Per link: (start, end) of the relay segment in the link-local frame.
    attach_segments: tuple = ()
    gravity: tuple = DEFAULT_GRAVITY
    # Per joint: (R^s, R^e) moment-arm range used by constant-arm designs.
    moment_arm_ranges: tuple = ()

    def __post_init__(self):
        lengths = _pair(self.link_lengths)
        object.__setattr__(self, 'link_lengths', lengths)
        object.__setattr__(self, 'link_masses', _pair(self.link_masses))
        object.__setattr__(self, 'gravity', _pair(self.gravity))

        segments = tuple((_pair(s), _pair(e)) for s, e in self.attach_segments)
        if not segments:
            segments = tuple(((0.0, 0.0), (length, 0.0)) for length in lengths)
        object.__setattr__(self, 'attach_segments', segments)

        ranges = tuple(_pair(r) for r in self.moment_arm_ranges)
        if not ranges:
            ranges = (DEFAULT_ARM_RANGE,) * max(len(lengths) - 1, 0)
        object.__setattr__(self, 'moment_arm_ranges', ranges)

        self.clean()

    @property
    def n_joints(self):
        return len(self.link_lengths) - 1

    @property
    def n_links(self):
        return len(self.link_lengths)

    def clean(self):
        errors = {}
        if len(self.link_lengths) < 2:
            errors['link_lengths'] = 'At least two links (one joint) are required.'
        elif any(not math.isfinite(x) or x <= 0 for x in self.link_lengths):
            errors['link_lengths'] = 'Link lengths must be finite and positive.'
        if len(self.link_masses) != len(self.link_lengths):
            errors['link_masses'] = 'One mass per link is required.'
        elif any(not math.isfinite(m) or m < 0 for m in self.link_masses):
            errors['link_masses'] = 'Link masses must be finite and non-negative.'
        if len(self.gravity) != 2 or not all(math.isfinite(g) for g in self.gravity):
            errors['gravity'] = 'Gravity must be a finite 2-D vector.'
        if len(self.attach_segments) != len(self.link_lengths):
            errors['attach_segments'] = 'One attach segment per link is required.'
        else:
            for link_id, (segment, length) in enumerate(zip(self.attach_segments, self.link_lengths)):
                for point in segment:
                    if len(point) != 2 or abs(point[0]) > length + ATTACH_TOLERANCE:
                        errors['attach_segments'] = (
                            f'Attach segment of LINK_{link_id} leaves the link ({point}).'
                        )
        if len(self.moment_arm_ranges) != self.n_joints:
            errors['moment_arm_ranges'] = 'One moment-arm range per joint is required.'
        if errors:
            raise ValidationError(errors)

    def segment_point(self, link_id, fraction):
        """Link-local position L^s + fraction * (L^e - L^s) on the given link."""
        start, end = (np.asarray(p) for p in self.attach_segments[link_id])
        return start + fraction * (end - start)

    def arm_values(self, fractions):
        """Map constant-design fractions (M x D) to moment arms in meters."""
        ranges = np.asarray(self.moment_arm_ranges)
        return ranges[:, 0] + np.asarray(fractions, dtype=float) * (ranges[:, 1] - ranges[:, 0])

    def without_gravity(self):
        return replace(self, gravity=(0.0, 0.0))


@dataclass(frozen=True)
class JointState:
    angles: tuple

    def __post_init__(self):
        angles = _pair(self.angles)
        if not all(math.isfinite(a) for a in angles):
            raise ValidationError({'angles': 'Joint angles must be finite.'})
        object.__setattr__(self, 'angles', angles)

    @classmethod
    def from_degrees(cls, degrees):
        return cls(tuple(math.radians(d) for d in degrees))

    @property
    def degrees(self):
        return tuple(math.degrees(a) for a in self.angles)


@dataclass(frozen=True)
class Pose:
    joint_positions: np.ndarray = field(repr=False)
    ee_position: np.ndarray
    link_frames: np.ndarray = field(repr=False)

    @property
    def chain(self):
        """Base, joints and end effector as one (D+2) x 2 polyline."""
        return np.vstack([np.zeros(2), self.joint_positions, self.ee_position])


def joint_angles(model, q):
    theta = np.asarray(q.angles if isinstance(q, JointState) else q, dtype=float).reshape(-1)
    if theta.shape[0] != model.n_joints:
        raise DimensionMismatch(
            f'Expected {model.n_joints} joint angles, got {theta.shape[0]}.'
        )
    if not np.all(np.isfinite(theta)):
        raise ValidationError({'angles': 'Joint angles must be finite.'})
    return theta


def _chain(model, theta):
    """Absolute link angles and link origins (plus the tip as the last origin)."""
    absolute = np.concatenate([[0.0], np.cumsum(theta)])
    steps = np.asarray(model.link_lengths)[:, None] * np.column_stack(
        [np.cos(absolute), np.sin(absolute)]
    )
    origins = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])
    return absolute, origins, steps


def forward_kinematics(model, q):
    theta = joint_angles(model, q)
    absolute, origins, _ = _chain(model, theta)

    cos, sin = np.cos(absolute), np.sin(absolute)
    frames = np.zeros((model.n_links, 3, 3))
    frames[:, 0, 0], frames[:, 0, 1] = cos, -sin
    frames[:, 1, 0], frames[:, 1, 1] = sin, cos
    frames[:, :2, 2] = origins[:-1]
    frames[:, 2, 2] = 1.0

    return Pose(
        joint_positions=origins[1:-1],
        ee_position=origins[-1],
        link_frames=frames,
    )


def joint_jacobian(model, q):
    pose = forward_kinematics(model, q)
    return rot90(pose.ee_position - pose.joint_positions).T


def _centers_of_mass(model, theta):
    # uniform links: COM at the midpoint of LINK_1..LINK_D
    _, origins, steps = _chain(model, theta)
    return origins[1:-1] + 0.5 * steps[1:]


def potential_energy(model, q):
    theta = joint_angles(model, q)
    masses = np.asarray(model.link_masses[1:])
    com = _centers_of_mass(model, theta)
    return float(np.sum(masses * (com @ -np.asarray(model.gravity))))


def gravity_torque(model, q):
    """Joint torque holding the pose statically, i.e. the gradient of potential energy."""
    theta = joint_angles(model, q)
    gravity = np.asarray(model.gravity)
    if not np.any(gravity):
        return np.zeros(model.n_joints)

    pose = forward_kinematics(model, theta)
    com = _centers_of_mass(model, theta)
    weights = -np.asarray(model.link_masses[1:])[:, None] * gravity

    # lever[k, d]: COM of LINK_{d+1} relative to joint k+1
    lever = com[None, :, :] - pose.joint_positions[:, None, :]
    moments = np.einsum('kdi,di->kd', rot90(lever), weights)
    # joint k only carries the links distal to it
    return np.sum(np.triu(moments), axis=1)
