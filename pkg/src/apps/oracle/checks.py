"""Cross-check of LP ray scores against the exact polygons for constant-arm designs."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from apps.arrangement.wires import CONSTANT, muscle_jacobian
from apps.feasibility.spaces import (
    InfeasibleDesign, force_lp, force_rhs, gravity_center, require_center, solve_ray, velocity_lp,
)
from apps.robot.kinematics import JointState, joint_jacobian

from .polygons import (
    SINGULAR_DETERMINANT, force_polytope_exact, ray_h, velocity_polytope_exact,
)

logger = logging.getLogger(__name__)

# Random states closer to a singularity than this are redrawn.
MIN_DETERMINANT = 1e-3


@dataclass
class OracleSummary:
    tol: float
    trials: int = 0
    comparisons: int = 0
    failures: int = 0
    max_error: float = 0.0
    worst: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.failures == 0

    def add(self, error, context):
        self.comparisons += 1
        if error > self.max_error or not self.worst:
            self.max_error = max(self.max_error, error)
            self.worst = dict(context, error=error)
        if not error < self.tol:
            self.failures += 1

    def as_dict(self):
        return {
            'trials': self.trials,
            'comparisons': self.comparisons,
            'failures': self.failures,
            'max_error': self.max_error,
            'tol': self.tol,
            'passed': self.passed,
            'worst': self.worst,
        }


def compare_state(model, design, q, target, limits, gravity=False, h_cap=10.0):
    """Per-direction (space, i, h_lp, h_exact) at one joint state."""
    if design.kind != CONSTANT:
        raise ValidationError('The exact oracle only covers constant-arm designs.')
    G = muscle_jacobian(model, design, q)
    J = joint_jacobian(model, q)

    rows = []
    rhs = force_rhs(model, q, J, target.force_center, gravity)
    center = gravity_center(model, q).center if gravity else np.asarray(target.force_center, dtype=float)
    force_region = force_polytope_exact(G, J, limits)
    try:
        require_center(G, rhs, limits)
        producible = True
    except InfeasibleDesign:
        producible = False
    for i, w in enumerate(target.force_directions()):
        exact = min(ray_h(force_region, center, w), h_cap)
        if producible:
            lp = solve_ray(force_lp(G, J, rhs, w, limits, h_cap), h_cap)
        else:
            # a pruned state scores 0, as the polygon does for an outside center
            lp = math.nan if force_region.contains(center) else 0.0
        rows.append(('force', i, lp, exact))

    velocity_region = velocity_polytope_exact(G, J, limits)
    for i, w in enumerate(target.velocity_directions()):
        exact = min(ray_h(velocity_region, np.zeros(2), w), h_cap)
        lp = solve_ray(velocity_lp(G, J, w, limits, h_cap), h_cap)
        rows.append(('velocity', i, lp, exact))
    return rows


def random_state(model, rng):
    """Uniform joint angles in [-pi, pi), redrawn until J is safely invertible."""
    while True:
        q = JointState(tuple(rng.uniform(-math.pi, math.pi, size=model.n_joints).tolist()))
        if abs(np.linalg.det(joint_jacobian(model, q))) >= max(MIN_DETERMINANT, SINGULAR_DETERMINANT):
            return q


def run_oracle(model, space, scenario, trials, seed, tol):
    """Compare LP and exact h values on random constant designs at random states."""
    if space.kind != CONSTANT:
        raise ValidationError({'mode': 'The oracle needs a constant-arm scenario.'})
    if model.n_joints != 2:
        raise ValidationError({'robot': 'The exact polygons are planar torque sets; use a two-joint robot.'})

    rng = np.random.default_rng(seed)
    summary = OracleSummary(tol=tol)
    for trial in range(trials):
        design = space.decode(space.random_genome(rng))
        q = random_state(model, rng)
        rows = compare_state(
            model, design, q, scenario.target, scenario.limits,
            gravity=scenario.gravity, h_cap=scenario.h_cap,
        )
        for which, i, lp, exact in rows:
            error = math.inf if math.isnan(lp) else abs(lp - exact)
            summary.add(error, {'trial': trial, 'space': which, 'direction': i, 'angles': list(q.angles)})
        summary.trials += 1
    logger.info(
        'Oracle: %d trials, %d comparisons, %d failures, max error %.3g',
        summary.trials, summary.comparisons, summary.failures, summary.max_error,
    )
    return summary
