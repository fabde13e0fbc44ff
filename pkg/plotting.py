"""
SVG figures rendered through the Jinja2 template templates/plot.svg.j2.

Coordinates are formatted to three decimals so repeated runs produce
identical files.
"""

import logging
import os
from dataclasses import dataclass

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')
WIDTH, HEIGHT = 800, 600
PALETTE = ('#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
           '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf')

_env = Environment(
    loader=FileSystemLoader(TEMPLATE_DIR),
    autoescape=select_autoescape(['svg', 'j2']),
    keep_trailing_newline=True,
)


@dataclass(frozen=True)
class Series:
    x: tuple
    y: tuple
    label: str = ''
    kind: str = 'line'  # line or marker
    color: str = ''


def _ticks(lo, hi, n=5):
    return [float(v) for v in np.linspace(lo, hi, n)]


def _limits(values):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-300:
        pad = max(abs(lo), 1.0) * 0.1
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def render_svg(series, title='', xlabel='', ylabel='', width=WIDTH, height=HEIGHT):
    """Render line and marker series on shared linear axes."""
    series = [s for s in series if len(s.x)]
    if not series:
        raise ValueError("Nothing to plot")
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series])
    x_lo, x_hi = _limits(xs)
    y_lo, y_hi = _limits(ys)
    frame = {'left': 70, 'right': width - 20, 'top': 40, 'bottom': height - 50}

    def sx(v):
        return frame['left'] + (v - x_lo) / (x_hi - x_lo) * (frame['right'] - frame['left'])

    def sy(v):
        return frame['bottom'] - (v - y_lo) / (y_hi - y_lo) * (frame['bottom'] - frame['top'])

    rendered = []
    for i, s in enumerate(series):
        pts = [(f"{sx(a):.3f}", f"{sy(b):.3f}") for a, b in zip(s.x, s.y)]
        rendered.append({
            'label': s.label,
            'kind': s.kind,
            'color': s.color or PALETTE[i % len(PALETTE)],
            'points': ' '.join(f"{a},{b}" for a, b in pts),
            'markers': pts,
        })

    template = _env.get_template('plot.svg.j2')
    return template.render(
        width=width,
        height=height,
        title=title,
        xlabel=xlabel,
        ylabel=ylabel,
        frame=frame,
        series=rendered,
        xticks=[{'pos': f"{sx(v):.3f}", 'label': f"{v:.3g}"} for v in _ticks(x_lo, x_hi)],
        yticks=[{'pos': f"{sy(v):.3f}", 'label': f"{v:.3g}"} for v in _ticks(y_lo, y_hi)],
    )


def level_set_figure(params, curves, outer=None):
    """
    Closed level curves of V inside the separatrix, the equilibria as markers,
    and optionally unbounded V = c branches outside it (display only).
    """
    series = []
    for c, points in curves:
        xs = tuple(pt[0] for pt in points)
        ys = tuple(pt[1] for pt in points)
        kind = 'marker' if len(points) == 1 else 'line'
        series.append(Series(xs, ys, label=f"V={c:.4g}", kind=kind))
    for c, xs, ys in outer or ():
        series.append(Series(tuple(xs), tuple(ys), label='', color='#bbbbbb'))
    series.append(Series((-params.x_eq, 0.0, params.x_eq), (0.0, 0.0, 0.0), label='equilibria',
                         kind='marker', color='black'))
    return render_svg(series, title=f"Level curves of V, p={params.p}", xlabel='x', ylabel='y')


def portrait_figure(portrait):
    series = []
    for p, orbit in portrait.orbits.items():
        w, wp = orbit.one_period()
        series.append(Series(tuple(w[::4]), tuple(wp[::4]), label=f"p={p:g}"))
    return render_svg(series, title="Phase paths of W'' + W|W|^(p-1) = 0", xlabel='W', ylabel="W'")


def trajectory_figure(trajectories, title, component='x'):
    series = []
    for label, traj in trajectories:
        values = traj.x if component == 'x' else traj.y
        series.append(Series(tuple(traj.eta[::4]), tuple(values[::4]), label=label))
    return render_svg(series, title=title, xlabel='eta', ylabel=component)


def curves_figure(curves, title, xlabel, ylabel, stride=1):
    """curves: (label, x, y, kind) tuples on shared axes."""
    series = [Series(tuple(np.asarray(x)[::stride]), tuple(np.asarray(y)[::stride]), label=label, kind=kind)
              for label, x, y, kind in curves]
    return render_svg(series, title=title, xlabel=xlabel, ylabel=ylabel)


def field_figure(fields, title):
    return curves_figure([(label, x, u, 'line') for label, x, u in fields], title, 'x', 'u', stride=2)
