"""Pareto-front bookkeeping for two minimized objectives."""
import numpy as np


def dominates(a, b):
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def update_front(front, candidate, key=lambda item: item):
    """Insert candidate into a mutually non-dominated list, in place.

    Returns True when the candidate joined the front.
    """
    point = key(candidate)
    if any(dominates(key(member), point) for member in front):
        return False
    front[:] = [member for member in front if not dominates(point, key(member))]
    front.append(candidate)
    return True


def hypervolume_2d(points, ref):
    """Area dominated by the points and bounded by the reference point."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    ref = np.asarray(ref, dtype=float)
    points = points[np.all(points < ref, axis=1)]
    if points.size == 0:
        return 0.0

    points = points[np.lexsort((points[:, 1], points[:, 0]))]
    volume, ceiling = 0.0, ref[1]
    for f1, f2 in points:
        if f2 < ceiling:
            volume += (ref[0] - f1) * (ceiling - f2)
            ceiling = f2
    return float(volume)
