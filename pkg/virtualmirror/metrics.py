from collections import OrderedDict, namedtuple
import csv
import io
import logging
import math

import networkx as nx
import numpy as np

from .exceptions import InputError, ParseError, UndefinedMetricError
from .ingest import dict_reader, format_instant, parse_instant, parse_number, read_text
from .netbuild import TimeWindow

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ('density', 'core_periphery', 'gbc', 'gdc', 'awvci')
CENTRALIZATION_KINDS = ('betweenness', 'degree')
CORE_PERIPHERY_METHODS = ('auto', 'hillclimb', 'exhaustive')

# Fits closer than this are treated as equal when breaking ties
FIT_TOLERANCE = 1e-12

CorePeripheryAssignment = namedtuple('CorePeripheryAssignment', ['core', 'fit'])


class Scores(OrderedDict):
    """Per-node scores. ``warning`` is set when the values are placeholders."""
    warning = None


class MetricRow(namedtuple('MetricRow', ('window',) + METRIC_COLUMNS + ('reasons',))):
    """Group-level metrics of one window.

    A metric that is undefined on the window's graph is ``None`` and the
    reason is kept in ``reasons`` under the metric's name.
    """

    def value(self, name):
        return getattr(self, name)


def betweenness(graph, directed=False):
    """Normalized shortest-path betweenness of every node.

    Edge weights are ignored. Undirected values are divided by
    (n-1)(n-2)/2, directed ones by (n-1)(n-2).
    """
    nodes = sorted(graph.nodes)
    if len(nodes) < 3:
        scores = Scores((node, 0.0) for node in nodes)
        scores.warning = 'betweenness needs at least 3 nodes, got {}; reporting zeros'.format(len(nodes))
        logger.warning(scores.warning)
        return scores
    g = graph.directed() if directed else graph.undirected()
    values = nx.betweenness_centrality(g, normalized=True, weight=None)
    return Scores((node, float(values[node])) for node in nodes)


def degree(graph, directed=False):
    """Distinct neighbor counts; ``(in, out)`` pairs when directed."""
    nodes = sorted(graph.nodes)
    if directed:
        g = graph.directed()
        return OrderedDict((node, (g.in_degree(node), g.out_degree(node))) for node in nodes)
    g = graph.undirected()
    return OrderedDict((node, g.degree(node)) for node in nodes)


def density(graph):
    n = len(graph.nodes)
    if n < 2:
        raise UndefinedMetricError('density undefined for {} node(s)'.format(n))
    return graph.undirected().number_of_edges() / (n * (n - 1) / 2.0)


def centralization(graph, kind='betweenness'):
    """Freeman group centralization: 1 for a star, 0 for a regular graph."""
    if kind not in CENTRALIZATION_KINDS:
        raise InputError('Unknown centralization kind: {}'.format(kind))
    n = len(graph.nodes)
    if n < 3:
        raise UndefinedMetricError('centralization undefined for {} node(s)'.format(n))
    if graph.undirected().number_of_edges() == 0:
        raise UndefinedMetricError('centralization undefined on a graph without edges')
    if kind == 'betweenness':
        values = np.array(list(betweenness(graph).values()))
        max_sum = n - 1.0
    else:
        values = np.array(list(degree(graph).values()), dtype=float)
        max_sum = (n - 1.0) * (n - 2.0)
    return float(np.sum(values.max() - values) / max_sum)


class _PatternFit(object):
    """Correlation of a graph's adjacency with ideal core/periphery patterns.

    Pairs are the upper triangle of the adjacency matrix with nodes in
    ascending id order. The ideal pattern is 1 for core-core and
    core-periphery pairs and 0 for periphery-periphery pairs.
    """

    def __init__(self, graph):
        self.nodes = sorted(graph.nodes)
        self.n = len(self.nodes)
        g = graph.undirected()
        adjacency = nx.to_numpy_array(g, nodelist=self.nodes, weight=None)
        self.iu = np.triu_indices(self.n, 1)
        observed = (adjacency[self.iu] > 0).astype(float)
        self.centered = observed - observed.mean()
        self.norm = math.sqrt(float(np.dot(self.centered, self.centered)))

    @property
    def degenerate(self):
        return self.norm == 0.0

    def fit(self, labels):
        pattern = (labels[self.iu[0]] | labels[self.iu[1]]).astype(float)
        pattern -= pattern.mean()
        pnorm = math.sqrt(float(np.dot(pattern, pattern)))
        if pnorm == 0.0:
            return None
        return float(np.dot(self.centered, pattern)) / (self.norm * pnorm)

    def core_key(self, labels):
        return tuple(node for node, is_core in zip(self.nodes, labels) if is_core)


def _better(fit, key, best_fit, best_key):
    if best_fit is None or fit > best_fit + FIT_TOLERANCE:
        return True
    return abs(fit - best_fit) <= FIT_TOLERANCE and key < best_key


def _exhaustive(pf):
    best_fit, best_key = None, None
    for mask in range(1, 2 ** pf.n - 1):
        labels = np.array([bool(mask >> i & 1) for i in range(pf.n)])
        fit = pf.fit(labels)
        if fit is None:
            continue
        key = pf.core_key(labels)
        if _better(fit, key, best_fit, best_key):
            best_fit, best_key = fit, key
    return best_fit, best_key


def _climb(pf, labels):
    fit = pf.fit(labels)
    if fit is None:
        fit = -math.inf
    while True:
        best_flip, best_flip_fit = None, fit
        for i in range(pf.n):
            labels[i] = not labels[i]
            candidate = pf.fit(labels)
            labels[i] = not labels[i]
            if candidate is not None and candidate > best_flip_fit + FIT_TOLERANCE:
                best_flip, best_flip_fit = i, candidate
        if best_flip is None:
            return fit, labels
        labels[best_flip] = not labels[best_flip]
        fit = best_flip_fit


def _hillclimb(pf, graph, restarts, seed):
    degrees = degree(graph)
    by_degree = sorted(range(pf.n), key=lambda i: (-degrees[pf.nodes[i]], pf.nodes[i]))
    starts = []
    for k in range(1, pf.n - 1):
        labels = np.zeros(pf.n, dtype=bool)
        labels[by_degree[:k]] = True
        starts.append(labels)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        starts.append(rng.random(pf.n) < 0.5)

    best_fit, best_key = None, None
    for labels in starts:
        fit, labels = _climb(pf, labels.copy())
        if fit == -math.inf:
            continue
        key = pf.core_key(labels)
        if _better(fit, key, best_fit, best_key):
            best_fit, best_key = fit, key
    return best_fit, best_key


def core_periphery(graph, restarts=50, seed=0, method='auto', exhaustive_limit=12):
    """Best discrete core/periphery partition and its fit.

    ``auto`` enumerates every labeling when the graph has at most
    ``exhaustive_limit`` nodes and hill-climbs otherwise. Hill climbing
    applies best single-node flips from degree-ranked core prefixes and from
    ``restarts`` random labelings drawn with ``seed``.

    :returns: :class:`CorePeripheryAssignment`
    """
    if method not in CORE_PERIPHERY_METHODS:
        raise InputError('Unknown core/periphery method: {}'.format(method))
    n = len(graph.nodes)
    if n < 4:
        raise UndefinedMetricError('core/periphery fit undefined for {} node(s)'.format(n))
    pf = _PatternFit(graph)
    if pf.degenerate:
        raise UndefinedMetricError('core/periphery fit undefined: graph is complete or empty')
    if method == 'exhaustive' or (method == 'auto' and n <= exhaustive_limit):
        fit, core = _exhaustive(pf)
    else:
        fit, core = _hillclimb(pf, graph, restarts, seed)
    return CorePeripheryAssignment(frozenset(core), fit)


def contribution_index(sent, received):
    """(sent - received) / (sent + received); +1 pure sender, -1 pure receiver."""
    total = sent + received
    if total <= 0:
        raise UndefinedMetricError('CI undefined when nothing was sent or received')
    return (sent - received) / float(total)


def awvci(stats):
    """Volume-weighted variance of actor contribution indices.

    Each actor is weighted by its share of the total sent+received volume.
    """
    stats = [s for s in stats if s.sent + s.received > 0]
    if not stats:
        raise UndefinedMetricError('AWVCI undefined: no actor sent or received anything')
    volumes = np.array([s.sent + s.received for s in stats], dtype=float)
    cis = np.array([contribution_index(s.sent, s.received) for s in stats])
    weights = volumes / volumes.sum()
    mean = float(np.dot(weights, cis))
    value = float(np.dot(weights, (cis - mean) ** 2))
    return min(max(value, 0.0), 1.0)


def metric_row(graph, stats, restarts=50, seed=0, method='auto'):
    """Bundle the group metrics of one window graph."""
    values = OrderedDict()
    reasons = OrderedDict()
    computations = OrderedDict([
        ('density', lambda: density(graph)),
        ('core_periphery', lambda: core_periphery(graph, restarts=restarts, seed=seed, method=method).fit),
        ('gbc', lambda: centralization(graph, 'betweenness')),
        ('gdc', lambda: centralization(graph, 'degree')),
        ('awvci', lambda: awvci(stats)),
    ])
    for name, compute in computations.items():
        try:
            values[name] = compute()
        except UndefinedMetricError as ex:
            logger.info('%s: %s', name, ex)
            values[name] = None
            reasons[name] = str(ex)
    return MetricRow(graph.window, reasons=reasons, **values)


def _format_value(value):
    return '' if value is None else '{:.6f}'.format(value)


def write_metric_table(rows, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(('window_start', 'window_end') + METRIC_COLUMNS)
    for row in rows:
        writer.writerow(
            [format_instant(row.window.start), format_instant(row.window.end)] +
            [_format_value(row.value(name)) for name in METRIC_COLUMNS]
        )


def read_metric_table(stream, source='metrics'):
    """Read a metric table back into :class:`MetricRow` objects.

    Empty cells become absent values. Decimal commas are accepted, so the
    published table can be typed in as it is printed.
    """
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ('window_start', 'window_end'))
    columns = [c for c in fieldnames if c in METRIC_COLUMNS]
    rows = []
    for row in reader:
        line_no = reader.line_num
        try:
            window = TimeWindow(parse_instant(row['window_start'] or ''), parse_instant(row['window_end'] or ''))
        except ValueError:
            raise ParseError(source, line_no, 'invalid window {!r}..{!r}'.format(
                row['window_start'], row['window_end']))
        values = OrderedDict((name, None) for name in METRIC_COLUMNS)
        reasons = OrderedDict()
        for name in METRIC_COLUMNS:
            cell = (row.get(name) or '').strip() if name in columns else ''
            if not cell:
                reasons[name] = 'not provided'
                continue
            try:
                values[name] = parse_number(cell)
            except ValueError:
                raise ParseError(source, line_no, '{} is not numeric: {!r}'.format(name, cell))
        rows.append(MetricRow(window, reasons=reasons, **values))
    return rows


def metric_table_text(rows):
    out = io.StringIO()
    write_metric_table(rows, out)
    return out.getvalue()
