from collections import OrderedDict, namedtuple
import csv

import numpy as np

from .exceptions import InputError
from .ingest import format_instant
from .metrics import betweenness
from .netbuild import build_graph, make_windows


class MetricSeries(namedtuple('MetricSeries', ['label', 'points'])):
    """Values of one actor (or group) over sorted, non-overlapping windows."""

    @property
    def windows(self):
        return [w for w, value in self.points]

    @property
    def values(self):
        return [value for w, value in self.points]


def betweenness_series(events, spec, min_edge_weight=1):
    """Normalized betweenness of every actor in every window.

    Actors missing from a window's graph score 0 there, so all series share
    the same windows.
    """
    windows = make_windows(spec)
    if len(windows) < 2:
        raise InputError('A betweenness series needs at least 2 windows, got {}'.format(len(windows)))
    per_window = [betweenness(build_graph(events, w, min_edge_weight)) for w in windows]
    actors = sorted(set().union(*[set(scores) for scores in per_window]))
    series = OrderedDict()
    for actor in actors:
        points = tuple((w, scores.get(actor, 0.0)) for w, scores in zip(windows, per_window))
        series[actor] = MetricSeries(actor, points)
    return series


def oscillation(series):
    """Count direction reversals in a series.

    A zero difference keeps the previous direction; leading zero differences
    set none.
    """
    values = series.values if isinstance(series, MetricSeries) else list(series)
    if len(values) < 1:
        raise InputError('oscillation needs a series of length >= 1')
    reversals = 0
    direction = 0
    for step in np.sign(np.diff(np.asarray(values, dtype=float))):
        if step == 0:
            continue
        if direction != 0 and step != direction:
            reversals += 1
        direction = step
    return reversals


def normalized_oscillation(series):
    values = series.values if isinstance(series, MetricSeries) else list(series)
    if len(values) < 3:
        return 0.0
    return oscillation(values) / float(len(values) - 2)


def group_oscillation(series_set):
    """Mean per-actor oscillation, each normalized by (length - 2)."""
    series_list = list(series_set.values()) if isinstance(series_set, dict) else list(series_set)
    if not series_list:
        raise InputError('group_oscillation needs at least one series')
    return float(np.mean([normalized_oscillation(s) for s in series_list]))


def write_series_csv(series_set, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['actor', 'window_start', 'value'])
    for actor in sorted(series_set):
        for window, value in series_set[actor].points:
            writer.writerow([actor, format_instant(window.start), '{:.6f}'.format(value)])


def write_oscillation_csv(series_set, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['actor', 'reversals', 'normalized'])
    for actor in sorted(series_set):
        s = series_set[actor]
        writer.writerow([actor, oscillation(s), '{:.6f}'.format(normalized_oscillation(s))])
