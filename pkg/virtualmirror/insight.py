from collections import Counter, OrderedDict, defaultdict, namedtuple
import csv
import datetime as dt
import logging
import math

import numpy as np
from scipy import stats

from .exceptions import InputError, InputOutOfBounds, ParseError, UndefinedMetricError
from .ingest import CHANNELS, DEFAULT_FREQUENCY_RANGE, RELATIONS, dict_reader, read_text
from .metrics import METRIC_COLUMNS, betweenness
from .netbuild import InteractionGraph

logger = logging.getLogger(__name__)

# Two-tailed significance level for correlations
DEFAULT_ALPHA = 0.10

CorrelationRow = namedtuple('CorrelationRow', ['metric', 'r', 'p_two_tailed', 'significant', 'n', 'reason'],
                            defaults=(None,))
RankedList = namedtuple('RankedList', ['label', 'entries'])
Overlap = namedtuple('Overlap', ['common', 'size'])
LayerRankings = namedtuple('LayerRankings', ['rankings', 'omitted'])
ChannelUsage = namedtuple('ChannelUsage', ['messages', 'senders'])


def pearson(xs, ys):
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise InputError('Cannot correlate series of lengths {} and {}'.format(len(xs), len(ys)))
    if len(xs) < 3:
        raise InputError('Correlation needs at least 3 points, got {}'.format(len(xs)))
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedMetricError('correlation undefined: a series has zero variance')
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def p_two_tailed(r, n):
    """p-value of r from the t statistic r*sqrt((n-2)/(1-r^2)) with n-2 dof."""
    if n < 3:
        raise InputError('p-value needs n >= 3, got {}'.format(n))
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


def _same_window(row_window, point):
    def utc(day):
        return dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc)

    return row_window.start == utc(point.window_start) and row_window.end == utc(point.window_end)


def correlate_with_kpi(metrics, kpi, alpha=DEFAULT_ALPHA):
    """Correlate each metric column with the KPI across aligned windows.

    Windows where a metric is absent are left out of that metric's sample.
    """
    if not 0.0 < alpha < 1.0:
        raise InputOutOfBounds('alpha', alpha)
    points = kpi.points
    if len(metrics) != len(points):
        raise InputError('Metric table has {} windows but the KPI series has {}'.format(len(metrics), len(points)))
    for row, point in zip(metrics, points):
        if not _same_window(row.window, point):
            raise InputError('Windows are not aligned: metric window {} vs KPI window {}..{}'.format(
                row.window.label, point.window_start, point.window_end))
    result = []
    for name in METRIC_COLUMNS:
        pairs = [(row.value(name), p.value) for row, p in zip(metrics, points) if row.value(name) is not None]
        n = len(pairs)
        try:
            r = pearson([a for a, b in pairs], [b for a, b in pairs])
        except (InputError, UndefinedMetricError) as ex:
            logger.warning('%s: %s', name, ex)
            result.append(CorrelationRow(name, None, None, False, n, str(ex)))
            continue
        p = p_two_tailed(r, n)
        result.append(CorrelationRow(name, r, p, p < alpha, n))
    return result


def rank_by(scores, k, label=''):
    """Top ``k`` actors by descending score, ties to the smaller id."""
    if k < 1:
        raise InputError('k must be at least 1: {}'.format(k))
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return RankedList(label, tuple(ranked[:k]))


def topk_overlap(lists, k):
    """Actors present in the top ``k`` of every list."""
    if len(lists) < 2:
        raise InputError('Overlap needs at least 2 lists, got {}'.format(len(lists)))
    common = None
    for ranked in lists:
        if len(ranked.entries) < k:
            raise InputError('List {!r} has {} entries, fewer than k={}'.format(ranked.label, len(ranked.entries), k))
        top = frozenset(actor for actor, score in ranked.entries[:k])
        common = top if common is None else common & top
    return Overlap(common, len(common))


def read_ranked_lists(stream, source='lists'):
    """Read rank lists laid out in columns: a header of labels, one actor per cell.

    The first row under the header is rank 1. Scores are the reversed rank
    so that entries stay in non-increasing score order.
    """
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ())
    if not fieldnames:
        raise ParseError(source, 1, 'no list labels in header')
    columns = OrderedDict((label, []) for label in fieldnames)
    for row in reader:
        for label in fieldnames:
            actor = (row.get(label) or '').strip()
            if actor:
                columns[label].append(actor)
    lists = []
    for label, actors in columns.items():
        n = len(actors)
        lists.append(RankedList(label, tuple((actor, float(n - i)) for i, actor in enumerate(actors))))
    return lists


def layer_networks(responses, min_frequency=1, frequency_range=DEFAULT_FREQUENCY_RANGE):
    """One directed graph per relation kind; arc ego->alter weighted by frequency."""
    if not frequency_range[0] <= min_frequency <= frequency_range[1]:
        raise InputOutOfBounds('min_frequency', min_frequency)
    arcs = OrderedDict((relation, {}) for relation in RELATIONS)
    for response in responses:
        if response.frequency < min_frequency:
            continue
        key = (response.ego, response.alter)
        layer = arcs[response.relation]
        layer[key] = max(layer.get(key, 0), response.frequency)
    return OrderedDict((relation, InteractionGraph(None, (), layer)) for relation, layer in arcs.items())


def layer_betweenness_report(layers, directed=False):
    """Full betweenness ranking of every layer with at least 3 nodes."""
    rankings = OrderedDict()
    omitted = OrderedDict()
    for relation, graph in layers.items():
        if len(graph.nodes) < 3:
            reason = 'layer has {} node(s); betweenness needs 3'.format(len(graph.nodes))
            logger.warning('%s: %s', relation, reason)
            omitted[relation] = reason
            continue
        scores = betweenness(graph, directed=directed)
        rankings[relation] = rank_by(scores, len(scores), label=relation)
    return LayerRankings(rankings, omitted)


def rank_barriers(ratings):
    """Barriers by descending mean score, ties alphabetical."""
    if not ratings:
        raise InputError('No barrier ratings to rank')
    scores = defaultdict(list)
    for rating in ratings:
        scores[rating.barrier].append(rating.score)
    means = [(barrier, float(np.mean(values))) for barrier, values in scores.items()]
    return sorted(means, key=lambda item: (-item[1], item[0]))


def rank_platforms(responses):
    """Number of survey ties using each platform, most used first."""
    counts = Counter()
    for response in responses:
        counts.update(response.platforms)
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def channel_summary(events):
    """Messages and distinct senders per channel, in channel order."""
    messages = Counter()
    senders = defaultdict(set)
    for ev in events:
        messages[ev.channel] += 1
        senders[ev.channel].add(ev.sender)
    return OrderedDict(
        (channel, ChannelUsage(messages[channel], len(senders[channel])))
        for channel in CHANNELS if messages[channel]
    )


def _fmt(value):
    return '' if value is None else '{:.6f}'.format(value)


def write_correlations_csv(rows, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['metric', 'r', 'p', 'significant', 'n'])
    for row in rows:
        writer.writerow([row.metric, _fmt(row.r), _fmt(row.p_two_tailed), str(row.significant).lower(), row.n])


def format_overlap(overlap, lists, k):
    labels = ', '.join(ranked.label for ranked in lists)
    lines = [
        'Top-{} overlap across {} lists ({})'.format(k, len(lists), labels),
        'size: {}'.format(overlap.size),
        'common: {}'.format(', '.join(sorted(overlap.common))),
    ]
    return '\n'.join(lines) + '\n'


def write_layer_rankings_csv(layer_rankings, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['relation', 'actor', 'betweenness', 'rank'])
    for relation, ranked in layer_rankings.rankings.items():
        for rank, (actor, score) in enumerate(ranked.entries, start=1):
            writer.writerow([relation, actor, '{:.6f}'.format(score), rank])


def write_ranking_csv(items, header, outfile, fmt='{:.6f}'):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(header)
    for name, value in items:
        writer.writerow([name, fmt.format(value)])
