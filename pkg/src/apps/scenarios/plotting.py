"""SVG rendering of evaluation reports: one panel per state and space, plus the arrangement."""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.template.loader import render_to_string

from apps.arrangement.wires import CONSTANT

logger = logging.getLogger(__name__)

PANEL_SIZE = 400
MARGIN = 50
PADDING = 0.1
# A traced polygon whose vertices all lie this close to each other is drawn as a marker.
POINT_SPREAD = 1e-9
WIRE_COLORS = ['#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#17becf', '#8c564b', '#e377c2', '#bcbd22']

AXIS_LABELS = {
    'force': ('F_x [N]', 'F_y [N]'),
    'velocity': ('v_x [m/s]', 'v_y [m/s]'),
}


def _fmt(value):
    return f'{value:.2f}'


@dataclass(frozen=True)
class Viewport:
    """Equal-aspect map from world coordinates into a square pixel frame, y up."""
    low: np.ndarray
    span: float
    size: int = PANEL_SIZE
    margin: int = MARGIN

    @classmethod
    def around(cls, points, size=PANEL_SIZE, margin=MARGIN):
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        low, high = points.min(axis=0), points.max(axis=0)
        span = float(max(high - low)) or 1.0
        mid = 0.5 * (low + high)
        span *= 1.0 + 2.0 * PADDING
        return cls(low=mid - 0.5 * span, span=span, size=size, margin=margin)

    @property
    def scale(self):
        return (self.size - 2 * self.margin) / self.span

    def point(self, xy):
        x, y = (np.asarray(xy, dtype=float) - self.low) * self.scale
        return (self.margin + x, self.size - self.margin - y)

    def text_point(self, xy):
        return tuple(_fmt(v) for v in self.point(xy))

    def frame(self):
        inner = self.size - 2 * self.margin
        return {
            'x': self.margin, 'y': self.margin, 'width': inner, 'height': inner,
            'right': self.margin + inner, 'bottom': self.margin + inner,
        }

    def axes(self):
        """Pixel positions of the world axes, None when outside the frame."""
        high = self.low + self.span
        return {
            'x': _fmt(self.point((0.0, 0.0))[1]) if self.low[1] <= 0.0 <= high[1] else None,
            'y': _fmt(self.point((0.0, 0.0))[0]) if self.low[0] <= 0.0 <= high[0] else None,
        }

    def ticks(self):
        high = self.low + self.span
        return {
            'x_min': f'{self.low[0]:.3g}', 'x_max': f'{high[0]:.3g}',
            'y_min': f'{self.low[1]:.3g}', 'y_max': f'{high[1]:.3g}',
        }


def ellipse_path(view, center, radii):
    """Closed path of two elliptical arcs."""
    rx, ry = (r * view.scale for r in radii)
    cx, cy = view.point(center)
    return (
        f'M {_fmt(cx + rx)} {_fmt(cy)} '
        f'A {_fmt(rx)} {_fmt(ry)} 0 1 0 {_fmt(cx - rx)} {_fmt(cy)} '
        f'A {_fmt(rx)} {_fmt(ry)} 0 1 0 {_fmt(cx + rx)} {_fmt(cy)} Z'
    )


def polygon_path(view, vertices):
    points = [view.text_point(v) for v in vertices]
    head, *tail = points
    commands = [f'M {head[0]} {head[1]}'] + [f'L {x} {y}' for x, y in tail]
    if len(points) > 2:
        commands.append('Z')
    return ' '.join(commands)


def is_point(vertices):
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    spread = float(np.max(np.linalg.norm(vertices - vertices[0], axis=1)))
    return spread <= POINT_SPREAD * max(1.0, float(np.abs(vertices).max()))


def render_panel(report, state, which, index):
    target = report['target']
    if which == 'force':
        center = np.asarray(state['force_center'], dtype=float)
        radii = target['force_radii']
        polygon, h_values = state['force_polygon'], state['h_force']
    else:
        center = np.zeros(2)
        radii = target['velocity_radii']
        polygon, h_values = state['velocity_polygon'], state['h_velocity']

    radii = np.asarray(radii, dtype=float)
    vertices = np.asarray(polygon['vertices'], dtype=float).reshape(-1, 2)
    extent = [center - radii, center + radii]
    if polygon['bounded']:
        extent.extend(vertices)
    view = Viewport.around(extent)

    context = {
        'size': view.size,
        'half': view.size // 2,
        'frame': view.frame(),
        'axes': view.axes(),
        'ticks': view.ticks(),
        'center': view.text_point(center),
        'target_path': ellipse_path(view, center, radii),
        'feasible_path': None,
        'feasible_marker': None,
        'unbounded': not polygon['bounded'],
        'x_label': AXIS_LABELS[which][0],
        'y_label': AXIS_LABELS[which][1],
        'title': (
            f'{which} state {index + 1} '
            f'({", ".join(f"{a:.1f}" for a in state["angles_deg"])} deg), '
            f'E = {sum(max(1.0 - h, 0.0) for h in h_values):.3f}'
        ),
    }
    if polygon['bounded'] and len(vertices):
        if is_point(vertices):
            context['feasible_marker'] = view.text_point(vertices[0])
        else:
            context['feasible_path'] = polygon_path(view, vertices)
    return render_to_string('scenarios/panel.svg', context)


def _arm_rows(design, top):
    rows = []
    for m, arms in enumerate(design['arms']):
        text = f'wire {m + 1}: ' + '  '.join(f'{a:+.3f}' for a in arms)
        rows.append({'y': top + 16 * (m + 1), 'text': text})
    return rows


def render_arrangement(report, state_index=0):
    state = report['states'][state_index]
    chain = np.asarray(state['chain'], dtype=float)
    wires = [np.asarray(points, dtype=float) for points in state.get('wires', [])]
    view = Viewport.around(np.vstack([chain, *wires]))

    design = report['design']
    arm_rows = _arm_rows(design, view.size) if design['kind'] == CONSTANT else []
    height = view.size + (24 + 16 * len(arm_rows) if arm_rows else 0)

    return render_to_string('scenarios/arrangement.svg', {
        'size': view.size,
        'height': height,
        'half': view.size // 2,
        'scene_bottom': view.size,
        'table_top': view.size + 4,
        'title': f'{report["scenario"]}: {design["kind"]} arrangement at state {state_index + 1}',
        'links': [
            (view.text_point(chain[k]), view.text_point(chain[k + 1]))
            for k in range(len(chain) - 1)
        ],
        'joints': [view.text_point(p) for p in chain[1:-1]],
        'wires': [
            {
                'color': WIRE_COLORS[m % len(WIRE_COLORS)],
                'points': ' '.join(','.join(view.text_point(p)) for p in points),
                'dots': [view.text_point(p) for p in points],
            }
            for m, points in enumerate(wires)
        ],
        'arm_rows': arm_rows,
    })


def render_samples(archive, scenario_name):
    """Every feasible sample in (E_force, E_velocity), the front in red, the balanced design circled."""
    samples = [sample for sample in archive.samples if sample.feasible]
    front = archive.sorted_front()
    balanced = archive.balanced()
    view = Viewport.around([(0.0, 0.0)] + [sample.objectives for sample in samples])
    pruned = archive.evaluations - len(samples)

    return render_to_string('scenarios/samples.svg', {
        'size': view.size,
        'half': view.size // 2,
        'frame': view.frame(),
        'ticks': view.ticks(),
        'title': f'{scenario_name}: {len(samples)} feasible samples, {pruned} pruned',
        'samples': [view.text_point(sample.objectives) for sample in samples],
        'front': [view.text_point(member.objectives) for member in front],
        'balanced': view.text_point(balanced.objectives) if balanced is not None else None,
    })


def plot_report(report, out_dir):
    """Write every panel of a feasible report; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for index, state in enumerate(report['states']):
        for which in ('force', 'velocity'):
            path = out_dir / f'{which}_state{index + 1}.svg'
            path.write_text(render_panel(report, state, which, index), encoding='utf-8')
            written.append(path)
    path = out_dir / 'arrangement.svg'
    path.write_text(render_arrangement(report), encoding='utf-8')
    written.append(path)
    logger.info('Wrote %d SVG files to %s', len(written), out_dir)
    return written
