"""
Feasible operational force/velocity spaces against target ellipses.

For every evaluated joint state and every target direction w_i the largest
ray scale h_i is found by linear programming:

    force:     maximize h  s.t.  -G^T f - h J^T w_i = rhs,  f_min <= f <= f_max
    velocity:  maximize h  s.t.  J theta_dot - h w_i = 0,   l_dot_min <= G theta_dot <= l_dot_max

with rhs = J^T F^c without gravity and rhs = tau_g with gravity. A state whose
force center (h = 0) has no admissible tensions prunes the design. Each
direction contributes max(1 - h_i, 0) to E_force / E_velocity.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from apps.arrangement.wires import muscle_jacobian
from apps.robot.kinematics import gravity_torque, joint_jacobian

from .simplex import LinearProgram, LPStatus, solve_lp_max

logger = logging.getLogger(__name__)

FORCE = 'force'
VELOCITY = 'velocity'

H_CAP = 10.0
# Ray scale used when tracing polygons; reaching it marks the region unbounded.
TRACE_CAP = 1e4
SINGULAR_RESIDUAL = 1e-6
# h values are reported on a 1e-12 grid so totals do not depend on pivot order.
H_DECIMALS = 12


class InfeasibleDesign(Exception):
    """A feasibility LP has no solution; the design is pruned."""


def _ellipse_directions(radii, n_directions):
    angles = 2.0 * np.pi * np.arange(n_directions) / n_directions
    return np.column_stack([radii[0] * np.cos(angles), radii[1] * np.sin(angles)])


@dataclass(frozen=True)
class TargetSpec:
    force_center: tuple = (0.0, 0.0)
    force_radii: tuple = (1.0, 1.0)
    velocity_radii: tuple = (1.0, 1.0)
    n_directions: int = 8

    def __post_init__(self):
        for name in ('force_center', 'force_radii', 'velocity_radii'):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, 'n_directions', int(self.n_directions))
        if any(r <= 0 for r in self.force_radii + self.velocity_radii):
            raise ValidationError('Target ellipse radii must be positive.')
        if self.n_directions < 3:
            raise ValidationError({'n_directions': 'At least three target directions are required.'})

    def force_directions(self):
        return _ellipse_directions(self.force_radii, self.n_directions)

    def velocity_directions(self):
        return _ellipse_directions(self.velocity_radii, self.n_directions)


@dataclass(frozen=True)
class ActuatorLimits:
    f_min: float = 10.0
    f_max: float = 200.0
    ldot_min: float = -0.4
    ldot_max: float = 0.4

    def __post_init__(self):
        if not 0.0 < self.f_min < self.f_max:
            raise ValidationError('Wire tension limits must satisfy 0 < f_min < f_max.')
        if not self.ldot_min < 0.0 < self.ldot_max:
            raise ValidationError('Wire velocity limits must satisfy ldot_min < 0 < ldot_max.')


@dataclass(frozen=True)
class Scenario:
    """Everything an evaluation needs besides the robot and the design."""
    joint_states: tuple
    target: TargetSpec
    limits: ActuatorLimits
    gravity: bool = False
    h_cap: float = H_CAP

    def __post_init__(self):
        object.__setattr__(self, 'joint_states', tuple(self.joint_states))
        if not self.joint_states:
            raise ValidationError({'joint_states': 'At least one evaluated joint state is required.'})
        if not self.h_cap >= 1.0:
            raise ValidationError({'h_cap': 'The ray cap must be at least 1.'})

    @property
    def max_error(self):
        """Largest attainable E_force or E_velocity."""
        return self.target.n_directions * len(self.joint_states)


@dataclass(frozen=True)
class EvaluationResult:
    h_force: tuple
    h_velocity: tuple
    e_force: float = None
    e_velocity: float = None
    feasible: bool = True

    @property
    def objectives(self):
        return (self.e_force, self.e_velocity)


@dataclass(frozen=True)
class GravityCenter:
    center: np.ndarray
    residual: float
    singular: bool


@dataclass(frozen=True)
class TracedPolygon:
    which: str
    center: np.ndarray
    vertices: np.ndarray = field(repr=False)
    bounded: bool = True


def _snap(h, h_cap):
    h = round(float(h), H_DECIMALS)
    return min(max(h, 0.0), h_cap)


def solve_ray(lp, h_cap):
    result = solve_lp_max(lp)
    if result.status == LPStatus.INFEASIBLE:
        raise InfeasibleDesign()
    if result.status == LPStatus.UNBOUNDED:
        return h_cap
    return _snap(result.x[0], h_cap)


def force_lp(G, J, rhs, w, limits, h_cap):
    """Variables (h, f_1..f_M)."""
    n_wires = G.shape[0]
    a_eq = np.hstack([-(J.T @ w)[:, None], -G.T])
    return LinearProgram(
        objective=np.concatenate([[1.0], np.zeros(n_wires)]),
        a_eq=a_eq,
        b_eq=rhs,
        lower=np.concatenate([[0.0], np.full(n_wires, limits.f_min)]),
        upper=np.concatenate([[h_cap], np.full(n_wires, limits.f_max)]),
    )


def center_lp(G, rhs, limits):
    """Variables f_1..f_M; feasible exactly when -G^T f = rhs has admissible tensions."""
    n_wires = G.shape[0]
    return LinearProgram(
        objective=np.zeros(n_wires),
        a_eq=-G.T,
        b_eq=rhs,
        lower=np.full(n_wires, limits.f_min),
        upper=np.full(n_wires, limits.f_max),
    )


def require_center(G, rhs, limits):
    """Raise InfeasibleDesign when the force ellipse center cannot be produced."""
    if solve_lp_max(center_lp(G, rhs, limits)).status == LPStatus.INFEASIBLE:
        raise InfeasibleDesign()


def velocity_lp(G, J, w, limits, h_cap):
    """Variables (h, theta_dot_1..theta_dot_D, s_1..s_M) with s = G theta_dot."""
    n_wires, n_joints = G.shape
    a_eq = np.zeros((2 + n_wires, 1 + n_joints + n_wires))
    a_eq[:2, 0] = -np.asarray(w)
    a_eq[:2, 1:1 + n_joints] = J
    a_eq[2:, 1:1 + n_joints] = G
    a_eq[2:, 1 + n_joints:] = -np.eye(n_wires)
    return LinearProgram(
        objective=np.concatenate([[1.0], np.zeros(n_joints + n_wires)]),
        a_eq=a_eq,
        b_eq=np.zeros(2 + n_wires),
        lower=np.concatenate([[0.0], np.full(n_joints, -np.inf), np.full(n_wires, limits.ldot_min)]),
        upper=np.concatenate([[h_cap], np.full(n_joints, np.inf), np.full(n_wires, limits.ldot_max)]),
    )


def force_rhs(model, q, J, force_center, gravity):
    if gravity:
        return gravity_torque(model, q)
    return J.T @ np.asarray(force_center, dtype=float)


def force_h(model, design, q, target, limits, i, gravity=False, h_cap=H_CAP):
    G = muscle_jacobian(model, design, q)
    J = joint_jacobian(model, q)
    rhs = force_rhs(model, q, J, target.force_center, gravity)
    w = target.force_directions()[i]
    require_center(G, rhs, limits)
    return solve_ray(force_lp(G, J, rhs, w, limits, h_cap), h_cap)


def velocity_h(model, design, q, target, limits, i, h_cap=H_CAP):
    G = muscle_jacobian(model, design, q)
    J = joint_jacobian(model, q)
    w = target.velocity_directions()[i]
    return solve_ray(velocity_lp(G, J, w, limits, h_cap), h_cap)


def gravity_center(model, q):
    """Minimum-norm F^c with J^T F^c = tau_g; used for drawing the ellipse center."""
    J = joint_jacobian(model, q)
    tau = gravity_torque(model, q)
    center, *_ = np.linalg.lstsq(J.T, tau, rcond=None)
    residual = float(np.linalg.norm(J.T @ center - tau))
    return GravityCenter(center=center, residual=residual, singular=residual > SINGULAR_RESIDUAL)


def _state_h_values(model, design, q, scenario):
    G = muscle_jacobian(model, design, q)
    J = joint_jacobian(model, q)
    limits, cap = scenario.limits, scenario.h_cap
    rhs = force_rhs(model, q, J, scenario.target.force_center, scenario.gravity)
    require_center(G, rhs, limits)
    h_force = tuple(
        solve_ray(force_lp(G, J, rhs, w, limits, cap), cap)
        for w in scenario.target.force_directions()
    )
    h_velocity = tuple(
        solve_ray(velocity_lp(G, J, w, limits, cap), cap)
        for w in scenario.target.velocity_directions()
    )
    return h_force, h_velocity


def _shortfall(h_values):
    return float(sum(max(1.0 - h, 0.0) for row in h_values for h in row))


def evaluate(model, design, scenario):
    design.check_against(model)
    h_force, h_velocity = [], []
    try:
        for q in scenario.joint_states:
            forces, velocities = _state_h_values(model, design, q, scenario)
            h_force.append(forces)
            h_velocity.append(velocities)
    except InfeasibleDesign:
        logger.debug('Design pruned: feasibility LP infeasible at state %d', len(h_force))
        return EvaluationResult(tuple(h_force), tuple(h_velocity), feasible=False)

    return EvaluationResult(
        h_force=tuple(h_force),
        h_velocity=tuple(h_velocity),
        e_force=_shortfall(h_force),
        e_velocity=_shortfall(h_velocity),
        feasible=True,
    )


def trace_polygon(model, design, q, which, limits, n_rays, force_center=(0.0, 0.0), gravity=False):
    """Ray-cast the feasible space from its center in n_rays unit directions."""
    if n_rays < 8:
        raise ValidationError({'n_rays': 'At least eight rays are required.'})
    G = muscle_jacobian(model, design, q)
    J = joint_jacobian(model, q)
    angles = 2.0 * np.pi * np.arange(n_rays) / n_rays
    rays = np.column_stack([np.cos(angles), np.sin(angles)])

    if which == FORCE:
        center = gravity_center(model, q).center if gravity else np.asarray(force_center, dtype=float)
        rhs = force_rhs(model, q, J, force_center, gravity)
        require_center(G, rhs, limits)
        scales = [solve_ray(force_lp(G, J, rhs, u, limits, TRACE_CAP), TRACE_CAP) for u in rays]
    elif which == VELOCITY:
        center = np.zeros(2)
        scales = [solve_ray(velocity_lp(G, J, u, limits, TRACE_CAP), TRACE_CAP) for u in rays]
    else:
        raise ValidationError({'which': f'Unknown space {which!r}.'})

    scales = np.asarray(scales)
    points = center + scales[:, None] * rays
    keep = [0] + [
        k for k in range(1, n_rays)
        if np.linalg.norm(points[k] - points[k - 1]) > 1e-12
    ]
    vertices = points[keep]
    if len(vertices) > 1 and np.linalg.norm(vertices[-1] - vertices[0]) <= 1e-12:
        vertices = vertices[:-1]
    return TracedPolygon(
        which=which,
        center=center,
        vertices=vertices,
        bounded=bool(np.all(scales < TRACE_CAP)),
    )

