from collections import OrderedDict, defaultdict, namedtuple
import csv
import datetime as dt
import logging
import os

import networkx as nx

from .exceptions import InputError
from .ingest import dict_reader, format_instant, parse_instant, read_text

logger = logging.getLogger(__name__)

thisdir = os.path.dirname(os.path.abspath(__file__))

SCOPE_MODES = OrderedDict([
    ('core_only', frozenset(['core'])),
    ('core_plus_peer', frozenset(['core', 'peer'])),
    ('ecosystem', None),
])


ScopePreset = namedtuple('ScopePreset', ['mode', 'min_edge_weight', 'top_n', 'description'])
ActorStats = namedtuple('ActorStats', ['actor', 'sent', 'received', 'ci'])


class TimeWindow(namedtuple('TimeWindow', ['start', 'end'])):
    """Half-open interval ``[start, end)`` of aware UTC datetimes."""

    def __contains__(self, ts):
        return self.start <= ts < self.end

    @property
    def midpoint(self):
        return self.start + (self.end - self.start) / 2

    @property
    def label(self):
        return '{}..{}'.format(format_instant(self.start), format_instant(self.end))


WindowSpec = namedtuple('WindowSpec', ['windows', 'anchor', 'length', 'count'], defaults=(None, None, None, None))


def _utc(value):
    if isinstance(value, dt.datetime):
        if value.tzinfo is None:
            return value.replace(tzinfo=dt.timezone.utc)
        return value.astimezone(dt.timezone.utc)
    return dt.datetime(value.year, value.month, value.day, tzinfo=dt.timezone.utc)


def make_windows(spec):
    """Expand a :class:`WindowSpec` into a sorted list of :class:`TimeWindow`.

    Explicit windows are validated and returned in start order; generated
    windows are ``count`` contiguous blocks of ``length`` days from ``anchor``.
    """
    if spec.windows is not None:
        windows = sorted(TimeWindow(_utc(w[0]), _utc(w[1])) for w in spec.windows)
        for w in windows:
            if not w.start < w.end:
                raise InputError('Window {} does not start before it ends'.format(w.label))
        for prev, cur in zip(windows, windows[1:]):
            if cur.start < prev.end:
                raise InputError('Windows overlap: {} and {}'.format(prev.label, cur.label))
        return windows
    if spec.anchor is None or spec.length is None or spec.count is None:
        raise InputError('A window spec needs explicit windows or anchor, length and count')
    if spec.length <= 0 or spec.count < 0:
        raise InputError('Window length must be positive and count non-negative')
    anchor = _utc(spec.anchor)
    step = dt.timedelta(days=spec.length)
    return [TimeWindow(anchor + i * step, anchor + (i + 1) * step) for i in range(spec.count)]


def parse_window_spec(text):
    """Read ``--windows``: either ``YYYY-MM-DD:<days>:<count>`` or a CSV path.

    The CSV has ``start,end`` columns with exclusive ends.
    """
    if os.path.isfile(text):
        with open(text, 'rb') as f:
            content = read_text(f, text)
        reader, fieldnames = dict_reader(content, text, ('start', 'end'))
        windows = []
        for row in reader:
            try:
                windows.append((parse_instant(row['start'] or ''), parse_instant(row['end'] or '')))
            except ValueError:
                raise InputError('{} line {}: invalid window bounds'.format(text, reader.line_num))
        return WindowSpec(windows=windows)
    try:
        anchor, length, count = text.split(':')
        return WindowSpec(anchor=parse_instant(anchor), length=int(length), count=int(count))
    except ValueError:
        raise InputError('Window spec must be YYYY-MM-DD:<days>:<count> or a CSV file: {}'.format(text))


def full_window(events):
    """Smallest window holding every event."""
    if not events:
        epoch = dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)
        return TimeWindow(epoch, epoch + dt.timedelta(seconds=1))
    stamps = [ev.ts for ev in events]
    return TimeWindow(min(stamps), max(stamps) + dt.timedelta(seconds=1))


class InteractionGraph(object):
    """Weighted directed communication graph of one window.

    ``arcs`` maps ``(sender, recipient)`` to a positive message count.
    ``inferred`` holds undirected ties that were not observed as arcs but
    inferred from co-recipients; only the sampling experiment creates them.
    """

    def __init__(self, window, nodes=(), arcs=None, inferred=()):
        self.window = window
        self.arcs = dict(arcs or {})
        node_set = set(nodes)
        for (a, b), weight in self.arcs.items():
            if a == b:
                raise InputError('Self-loop arc on {}'.format(a))
            if weight < 1:
                raise InputError('Arc {}->{} has non-positive weight {}'.format(a, b, weight))
            node_set.update((a, b))
        self.inferred = frozenset(frozenset(t) for t in inferred)
        for tie in self.inferred:
            node_set.update(tie)
        self.nodes = frozenset(node_set)

    def __eq__(self, other):
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return (self.window, self.nodes, self.arcs, self.inferred) == \
            (other.window, other.nodes, other.arcs, other.inferred)

    def __repr__(self):
        return 'InteractionGraph({}, {} nodes, {} arcs)'.format(
            self.window.label if self.window else None, len(self.nodes), len(self.arcs))

    def undirected_weights(self):
        """Edge weight per unordered pair: the sum of both arc weights."""
        weights = defaultdict(int)
        for (a, b), weight in self.arcs.items():
            weights[frozenset((a, b))] += weight
        return dict(weights)

    def edges(self):
        """Undirected edges as sorted pairs, inferred ties included."""
        pairs = set(tuple(sorted(p)) for p in self.undirected_weights())
        pairs.update(tuple(sorted(t)) for t in self.inferred)
        return pairs

    def undirected(self):
        g = nx.Graph()
        g.add_nodes_from(sorted(self.nodes))
        weights = self.undirected_weights()
        for pair in sorted(tuple(sorted(p)) for p in weights):
            g.add_edge(pair[0], pair[1], weight=weights[frozenset(pair)])
        for tie in sorted(tuple(sorted(t)) for t in self.inferred):
            if not g.has_edge(*tie):
                g.add_edge(tie[0], tie[1], weight=0, inferred=True)
        return g

    def directed(self):
        g = nx.DiGraph()
        g.add_nodes_from(sorted(self.nodes))
        for (a, b) in sorted(self.arcs):
            g.add_edge(a, b, weight=self.arcs[(a, b)])
        return g

    def subgraph(self, nodes):
        """Induced subgraph on ``nodes`` (ids outside the graph are ignored)."""
        keep = self.nodes & frozenset(nodes)
        arcs = {(a, b): w for (a, b), w in self.arcs.items() if a in keep and b in keep}
        inferred = [t for t in self.inferred if t <= keep]
        return InteractionGraph(self.window, keep, arcs, inferred)


def _in_window(events, window, channels=None):
    for ev in events:
        if window is not None and ev.ts not in window:
            continue
        if channels is not None and ev.channel not in channels:
            continue
        yield ev


def build_graph(events, window=None, min_edge_weight=1, channels=None):
    """Aggregate events into a thresholded :class:`InteractionGraph`.

    Every event in the window adds 1 to the arc from the sender to each
    recipient other than the sender. Pairs whose combined weight in both
    directions is below ``min_edge_weight`` lose both arcs; nodes are the
    endpoints of the arcs that remain.

    :param window: :class:`TimeWindow`, or None for all events
    :param channels: optional collection of channels to keep
    """
    if min_edge_weight < 1:
        raise InputError('min_edge_weight must be at least 1: {}'.format(min_edge_weight))
    if window is None:
        window = full_window(events)
    arcs = defaultdict(int)
    for ev in _in_window(events, window, channels):
        for recipient in ev.recipients:
            if recipient != ev.sender:
                arcs[(ev.sender, recipient)] += 1
    totals = defaultdict(int)
    for (a, b), weight in arcs.items():
        totals[frozenset((a, b))] += weight
    kept = {arc: weight for arc, weight in arcs.items() if totals[frozenset(arc)] >= min_edge_weight}
    logger.debug('Window %s: %d arcs, %d kept at threshold %d', window.label, len(arcs), len(kept), min_edge_weight)
    return InteractionGraph(window, (), kept)


def scope_graph(graph, attrs, mode='ecosystem'):
    """Induced subgraph on the actors admitted by ``mode``.

    Actors without attributes count as ``ecosystem``.
    """
    if mode not in SCOPE_MODES:
        raise InputError('Unknown scope mode: {}'.format(mode))
    admitted = SCOPE_MODES[mode]
    if admitted is None:
        return graph

    def scope_of(actor):
        a = attrs.get(actor)
        return 'ecosystem' if a is None else a.scope

    return graph.subgraph(node for node in graph.nodes if scope_of(node) in admitted)


def top_n_by_betweenness(graph, n):
    """Induced subgraph on the ``n`` nodes of highest normalized betweenness.

    Ties go to the smaller actor id.
    """
    from .metrics import betweenness

    if n < 1:
        raise InputError('n must be at least 1: {}'.format(n))
    if n >= len(graph.nodes):
        return graph
    scores = betweenness(graph)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return graph.subgraph(actor for actor, score in ranked[:n])


def actor_stats(events, window=None, channels=None):
    """Sent/received counts and contribution index per active actor.

    A message counts once for its sender however many recipients it has;
    each recipient copy counts as one received message. Copies a sender
    addresses to itself are ignored.
    """
    from .metrics import contribution_index

    sent = defaultdict(int)
    received = defaultdict(int)
    for ev in _in_window(events, window, channels):
        others = [r for r in ev.recipients if r != ev.sender]
        if not others:
            continue
        sent[ev.sender] += 1
        for recipient in others:
            received[recipient] += 1
    stats = []
    for actor in sorted(set(sent) | set(received)):
        s, r = sent[actor], received[actor]
        stats.append(ActorStats(actor, s, r, contribution_index(s, r)))
    return stats


def load_scope_presets():
    """Threshold and top-N settings per analysis level, keyed by mode."""
    presets = OrderedDict()
    with open(os.path.join(thisdir, 'lookups', 'scope_presets.csv'), newline='') as f:
        reader = csv.DictReader(f)
        for row in reader:
            presets[row['mode']] = ScopePreset(
                row['mode'], int(row['min_edge_weight']), int(row['top_n']), row['description'])
    return presets


def export_graphml(graph, outfile, attrs=None):
    """Write the directed graph as GraphML with ``scope`` and ``weight`` attributes.

    Nodes and arcs are written in ascending id order.
    """
    attrs = attrs or {}
    g = nx.DiGraph()
    for node in sorted(graph.nodes):
        a = attrs.get(node)
        g.add_node(node, scope='ecosystem' if a is None else a.scope)
    for (a, b) in sorted(graph.arcs):
        g.add_edge(a, b, weight=graph.arcs[(a, b)])
    nx.write_graphml_lxml(g, outfile, encoding='utf-8', prettyprint=True)


def export_dot(graph, outfile):
    """Write the directed graph in Graphviz DOT with ascending id order."""
    g = graph.directed()
    g.graph['name'] = 'window'
    dot = nx.nx_pydot.to_pydot(g)
    outfile.write(dot.to_string())
