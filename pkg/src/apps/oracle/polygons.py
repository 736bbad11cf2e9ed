"""
Exact planar geometry for constant-G designs at an invertible joint Jacobian.

The feasible force set is the image of the tension box under
F = J^{-T}(-G^T f): a zonotope. The feasible velocity set is the image under J
of the slab intersection l_dot_min <= G theta_dot <= l_dot_max. Both are
compared against the LP scores by casting the same rays.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

GEOMETRY_TOL = 1e-12
SINGULAR_DETERMINANT = 1e-12


class SingularJacobian(ValueError):
    """The exact construction needs an invertible 2 x 2 joint Jacobian."""


class UnboundedRegion:
    def __repr__(self):
        return 'UNBOUNDED'


UNBOUNDED = UnboundedRegion()


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class ConvexPolygon:
    """Counterclockwise vertices starting at the lexicographically smallest one."""
    vertices: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        start = int(np.lexsort((vertices[:, 1], vertices[:, 0]))[0])
        object.__setattr__(self, 'vertices', np.roll(vertices, -start, axis=0))

    @classmethod
    def from_points(cls, points):
        points = np.unique(np.round(np.asarray(points, dtype=float), 12), axis=0)
        if len(points) == 1:
            return cls(points)
        spread = points - points.mean(axis=0)
        if np.linalg.matrix_rank(spread, tol=GEOMETRY_TOL * max(1.0, np.abs(points).max())) < 2:
            axis = spread[np.argmax(np.linalg.norm(spread, axis=1))]
            along = spread @ axis
            return cls(points[[np.argmin(along), np.argmax(along)]])
        hull = ConvexHull(points)
        return cls(points[hull.vertices])

    @property
    def scale(self):
        return max(1.0, float(np.abs(self.vertices).max()))

    @property
    def area(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def edges(self):
        return [
            (self.vertices[k], self.vertices[(k + 1) % len(self.vertices)])
            for k in range(len(self.vertices))
        ]

    def contains(self, point, tol=GEOMETRY_TOL):
        point = np.asarray(point, dtype=float)
        slack = tol * self.scale
        if len(self.vertices) == 1:
            return bool(np.linalg.norm(point - self.vertices[0]) <= slack)
        if len(self.vertices) == 2:
            p0, p1 = self.vertices
            d = p1 - p0
            t = float(np.dot(point - p0, d) / np.dot(d, d))
            return abs(_cross(d, point - p0)) <= slack * np.linalg.norm(d) and -tol <= t <= 1 + tol
        return all(_cross(v1 - v0, point - v0) >= -slack * np.linalg.norm(v1 - v0) for v0, v1 in self.edges())

    def is_convex(self, tol=GEOMETRY_TOL):
        if len(self.vertices) < 3:
            return True
        turns = [
            _cross(v1 - v0, self.vertices[(k + 2) % len(self.vertices)] - v1)
            for k, (v0, v1) in enumerate(self.edges())
        ]
        return min(turns) >= -tol * self.scale ** 2


def _inverse(J):
    J = np.asarray(J, dtype=float)
    if J.shape != (2, 2) or abs(np.linalg.det(J)) < SINGULAR_DETERMINANT:
        raise SingularJacobian('The joint Jacobian is singular at this state.')
    return np.linalg.inv(J)


def zonotope(center, generators):
    """Minkowski sum of segments [-g, g] translated to center."""
    center = np.asarray(center, dtype=float)
    upward = []
    for g in np.asarray(generators, dtype=float).reshape(-1, 2):
        if np.linalg.norm(g) <= GEOMETRY_TOL:
            continue
        upward.append(g if (g[1] > 0 or (g[1] == 0 and g[0] > 0)) else -g)
    if not upward:
        return ConvexPolygon([center])

    upward.sort(key=lambda g: math.atan2(g[1], g[0]))
    merged = [upward[0]]
    for g in upward[1:]:
        if abs(_cross(merged[-1], g)) <= GEOMETRY_TOL * np.linalg.norm(merged[-1]) * np.linalg.norm(g):
            merged[-1] = merged[-1] + g
        else:
            merged.append(g)

    point = center - np.sum(merged, axis=0)
    vertices = [point]
    for g in merged + [-g for g in merged]:
        point = point + 2.0 * g
        vertices.append(point)
    return ConvexPolygon(vertices[:-1])


def force_polytope_exact(G, J, limits):
    inverse_t = _inverse(J).T
    G = np.asarray(G, dtype=float)
    mid = 0.5 * (limits.f_max + limits.f_min)
    half = 0.5 * (limits.f_max - limits.f_min)
    mapped = inverse_t @ -G.T
    return zonotope(mapped @ np.full(G.shape[0], mid), half * mapped.T)


def _positively_spanning(normals):
    angles = np.sort(np.arctan2(normals[:, 1], normals[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2.0 * np.pi]]))
    return float(gaps.max()) < np.pi - 1e-12


def velocity_polytope_exact(G, J, limits):
    """Velocity polygon, or UNBOUNDED when the wire slabs leave a direction free."""
    inverse = _inverse(J)
    normals, offsets = [], []
    for g in np.asarray(G, dtype=float):
        if np.linalg.norm(g) < GEOMETRY_TOL:
            continue
        a = g @ inverse
        normals.extend([a, -a])
        offsets.extend([limits.ldot_max, -limits.ldot_min])
    if not normals or not _positively_spanning(np.asarray(normals)):
        return UNBOUNDED

    halfspaces = np.column_stack([np.asarray(normals), -np.asarray(offsets)])
    intersection = HalfspaceIntersection(halfspaces, np.zeros(2))
    return ConvexPolygon.from_points(intersection.intersections)


def _segment_h(p0, p1, center, w, tol):
    d = p1 - p0
    if abs(_cross(d, w)) > tol * np.linalg.norm(d) * np.linalg.norm(w):
        return 0.0
    t = float(np.dot(center - p0, d) / np.dot(d, d))
    rate = float(np.dot(w, d) / np.dot(d, d))
    if rate > 0:
        return max((1.0 - t) / rate, 0.0)
    if rate < 0:
        return max(-t / rate, 0.0)
    return math.inf


def ray_h(region, center, w):
    """Largest h >= 0 with center + h w inside the region (0 if center is outside)."""
    if region is UNBOUNDED:
        return math.inf
    center = np.asarray(center, dtype=float)
    w = np.asarray(w, dtype=float)
    if not region.contains(center):
        return 0.0
    if len(region.vertices) == 1:
        return 0.0
    if len(region.vertices) == 2:
        return _segment_h(*region.vertices, center, w, GEOMETRY_TOL * region.scale)

    h = math.inf
    for v0, v1 in region.edges():
        edge = v1 - v0
        outward = np.array([edge[1], -edge[0]])
        rate = float(np.dot(outward, w))
        if rate > GEOMETRY_TOL * np.linalg.norm(outward) * np.linalg.norm(w):
            h = min(h, float(np.dot(outward, v0 - center)) / rate)
    return max(h, 0.0)
