"""
Dense two-phase simplex for small bounded linear programs.

    maximize    c . x
    subject to  A_eq x = b_eq
                lower <= x <= upper      (bounds may be infinite)

Bounds are folded into a non-negative standard form, phase I drives the
artificial variables out, phase II optimizes. Bland's rule on both the
entering and the leaving variable keeps the method cycle-free and the
result deterministic for a fixed input.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
PIVOT_TOL = 1e-11
# Relative to the largest equality right-hand side or solution entry.
RESIDUAL_TOL = 1e-7


class LPNumericalError(RuntimeError):
    """The final basis violates the constraints beyond working precision."""


class LPStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.shape[0]
        a = np.asarray(self.a_eq, dtype=float).reshape(-1, n)
        b = np.asarray(self.b_eq, dtype=float).reshape(-1)
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if a.shape[0] != b.shape[0]:
            raise ValueError(f'{a.shape[0]} equality rows but {b.shape[0]} right-hand sides.')
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError('Objective and constraint coefficients must be finite.')
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ValueError('Variable bounds must satisfy lower <= upper.')
        for name, value in (('objective', c), ('a_eq', a), ('b_eq', b), ('lower', lower), ('upper', upper)):
            object.__setattr__(self, name, value)

    @property
    def n_variables(self):
        return self.objective.shape[0]


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: float = math.nan
    x: np.ndarray = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status == LPStatus.OPTIMAL


@dataclass
class _StandardForm:
    """x = offset + columns @ y with y >= 0, and A y = b."""
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    offset: np.ndarray
    columns: np.ndarray
    n_eq: int


def _standard_form(lp):
    n = lp.n_variables
    offset = np.zeros(n)
    maps = []          # (variable, sign) per y column
    bound_rows = []    # (y column, width)

    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if math.isfinite(lo):
            offset[j] = lo
            maps.append((j, 1.0))
            if math.isfinite(hi):
                bound_rows.append((len(maps) - 1, hi - lo))
        elif math.isfinite(hi):
            offset[j] = hi
            maps.append((j, -1.0))
        else:
            maps.append((j, 1.0))
            maps.append((j, -1.0))

    n_y = len(maps) + len(bound_rows)
    columns = np.zeros((n, n_y))
    for col, (j, sign) in enumerate(maps):
        columns[j, col] = sign

    m_eq = lp.a_eq.shape[0]
    a = np.zeros((m_eq + len(bound_rows), n_y))
    a[:m_eq] = lp.a_eq @ columns
    b = np.concatenate([lp.b_eq - lp.a_eq @ offset, [width for _, width in bound_rows]])
    for k, (col, _) in enumerate(bound_rows):
        a[m_eq + k, col] = 1.0
        a[m_eq + k, len(maps) + k] = 1.0

    return _StandardForm(
        a=a,
        b=b,
        c=lp.objective @ columns,
        offset=offset,
        columns=columns,
        n_eq=m_eq,
    )


def _pivot(tableau, row, col):
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _iterate(tableau, basis, n_cols, tol):
    """Run simplex pivots on a tableau whose last row holds reduced costs (maximize)."""
    limit = 50 * (tableau.shape[0] + n_cols) + 100
    for _ in range(limit):
        costs = tableau[-1, :n_cols]
        entering = np.flatnonzero(costs < -OPTIMALITY_TOL)
        if entering.size == 0:
            return LPStatus.OPTIMAL
        col = int(entering[0])

        column = tableau[:-1, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return LPStatus.UNBOUNDED
        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol]
        row = int(min(ties, key=lambda r: basis[r]))

        _pivot(tableau, row, col)
        basis[row] = col
    raise RuntimeError('Simplex iteration limit reached; the problem is numerically degenerate.')


def solve_lp_max(lp):
    form = _standard_form(lp)
    a, b = form.a.copy(), form.b.copy()
    negative = b < 0
    a[negative] *= -1.0
    b[negative] *= -1.0

    m, n_y = a.shape
    # bound-width rows are left out of the scale
    scale = max(1.0, float(np.max(np.abs(b[:form.n_eq]), initial=0.0)))
    tol = FEASIBILITY_TOL * scale

    # phase I: maximize -sum(artificials)
    tableau = np.zeros((m + 1, n_y + m + 1))
    tableau[:m, :n_y] = a
    tableau[:m, n_y:n_y + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[-1, :n_y] = -a.sum(axis=0)
    tableau[-1, -1] = -b.sum()
    basis = list(range(n_y, n_y + m))

    _iterate(tableau, basis, n_y + m, tol)
    if tableau[-1, -1] < -tol:
        return LPResult(LPStatus.INFEASIBLE)

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = []
    for row in range(m):
        if basis[row] >= n_y:
            weights = np.abs(tableau[row, :n_y])
            if weights.size == 0 or weights.max() <= PIVOT_TOL:
                logger.debug('Dropping redundant equality row %d', row)
                continue
            col = int(np.argmax(weights))
            _pivot(tableau, row, col)
            basis[row] = col
        keep.append(row)

    # phase II on the original objective
    phase2 = np.zeros((len(keep) + 1, n_y + 1))
    phase2[:-1, :n_y] = tableau[keep, :n_y]
    phase2[:-1, -1] = tableau[keep, -1]
    basis = [basis[row] for row in keep]
    phase2[-1, :n_y] = -form.c
    for row, col in enumerate(basis):
        if phase2[-1, col] != 0.0:
            phase2[-1] -= phase2[-1, col] * phase2[row]

    status = _iterate(phase2, basis, n_y, tol)
    if status == LPStatus.UNBOUNDED:
        return LPResult(LPStatus.UNBOUNDED)

    y = np.zeros(n_y)
    for row, col in enumerate(basis):
        y[col] = phase2[row, -1]
    x = form.offset + form.columns @ y
    _check_solution(lp, x)
    x = np.clip(x, lp.lower, lp.upper)
    return LPResult(LPStatus.OPTIMAL, value=float(lp.objective @ x), x=x)


def _check_solution(lp, x):
    scale = max(1.0, float(np.max(np.abs(lp.b_eq), initial=0.0)), float(np.max(np.abs(x), initial=0.0)))
    residual = float(np.max(np.abs(lp.a_eq @ x - lp.b_eq), initial=0.0))
    overshoot = max(
        float(np.max(lp.lower - x, initial=0.0)),
        float(np.max(x - lp.upper, initial=0.0)),
    )
    if residual > RESIDUAL_TOL * scale or overshoot > RESIDUAL_TOL * scale:
        raise LPNumericalError(
            f'Simplex solution violates its constraints (residual {residual:.3g}, bound overshoot {overshoot:.3g}).'
        )
