# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Standalone SVG line charts of experiment records.

The figures are drawn on a bare `matplotlib.figure.Figure` (no pyplot
state) with the date stamp removed and a fixed hash salt, so the same
records always give the same bytes.
"""
import matplotlib
from matplotlib.figure import Figure
import numpy as np

from .records import by_replica

__all__ = ['plot_records', 'SVG_RC']

SVG_RC = {
    'svg.hashsalt': 'ergolab',
    'svg.fonttype': 'none',
    'font.family': 'DejaVu Sans',
    'axes.unicode_minus': False,
}


def plot_records(records, metrics, path, title=None):
    """
    Draw one line per replica for every metric in ``metrics`` and save the
    chart as SVG. A logarithmic axis is used when every value is positive.

    Returns the path, or None when no record matches.
    """
    curves = {m: by_replica(records, m) for m in metrics}
    curves = {m: c for m, c in curves.items() if c}
    if not curves:
        return None
    with matplotlib.rc_context(SVG_RC):
        fig = Figure(figsize=(6.4, 4.0), layout='constrained')
        ax = fig.subplots()
        positive = True
        for metric, replicas in sorted(curves.items()):
            for replica, (steps, values) in sorted(replicas.items()):
                label = metric if replica == min(replicas) else None
                ax.plot(steps, values, lw=1.0, alpha=0.8, label=label,
                        color='C{0}'.format(sorted(curves).index(metric)))
                positive &= bool(np.all(values > 0))
        if positive:
            ax.set_yscale('log')
        ax.set_xlabel('step')
        ax.set_ylabel(', '.join(sorted(curves)))
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc='best', fontsize=8)
        fig.savefig(path, format='svg', metadata={'Date': None})
    return path
