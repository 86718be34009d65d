import datetime as dt
import itertools
import os

import networkx as nx
import numpy as np

from virtualmirror.ingest import InteractionEvent
from virtualmirror.netbuild import InteractionGraph, TimeWindow

thisdir = os.path.dirname(os.path.abspath(__file__))
datadir = os.path.join(thisdir, 'data')

WINDOW = TimeWindow(dt.datetime(2012, 4, 1, tzinfo=dt.timezone.utc), dt.datetime(2012, 4, 15, tzinfo=dt.timezone.utc))


def data_path(name):
    return os.path.join(datadir, name)


def utc(*args):
    return dt.datetime(*args, tzinfo=dt.timezone.utc)


def ev(ts, sender, *recipients, channel='email', msg_id=None):
    if isinstance(ts, str):
        ts = dt.datetime.fromisoformat(ts).replace(tzinfo=dt.timezone.utc)
    return InteractionEvent(ts, sender, tuple(recipients), channel, msg_id)


def graph_from_edges(edges, nodes=(), window=WINDOW):
    """One arc per listed pair, in the listed direction."""
    return InteractionGraph(window, nodes, dict(((a, b), 1) for a, b in edges))


def star(k):
    return graph_from_edges([('c', 'l{}'.format(i)) for i in range(k)])


def cycle(n):
    names = ['v{}'.format(i) for i in range(n)]
    return graph_from_edges([(names[i], names[(i + 1) % n]) for i in range(n)])


def complete(n):
    names = ['v{}'.format(i) for i in range(n)]
    return graph_from_edges(itertools.combinations(names, 2))


def from_networkx(g):
    return graph_from_edges([('n{}'.format(a), 'n{}'.format(b)) for a, b in g.edges()],
                            nodes=['n{}'.format(x) for x in g.nodes()])


def random_connected_graphs(count, min_nodes, max_nodes, seed):
    rng = np.random.default_rng(seed)
    graphs = []
    attempt = 0
    while len(graphs) < count:
        attempt += 1
        n = int(rng.integers(min_nodes, max_nodes + 1))
        p = float(rng.uniform(0.3, 0.8))
        g = nx.gnp_random_graph(n, p, seed=seed * 100000 + attempt)
        if nx.is_connected(g):
            graphs.append(from_networkx(g))
    return graphs


def _simple_paths(adjacency, source, target):
    stack = [(source, [source])]
    while stack:
        node, path = stack.pop()
        for nxt in adjacency[node]:
            if nxt in path:
                continue
            if nxt == target:
                yield path + [nxt]
            else:
                stack.append((nxt, path + [nxt]))


def oracle_betweenness(graph):
    """Normalized betweenness by enumerating every simple path."""
    adjacency = dict((node, set()) for node in graph.nodes)
    for a, b in graph.edges():
        adjacency[a].add(b)
        adjacency[b].add(a)
    raw = dict((node, 0.0) for node in graph.nodes)
    for s, t in itertools.combinations(sorted(graph.nodes), 2):
        paths = list(_simple_paths(adjacency, s, t))
        if not paths:
            continue
        shortest = min(len(p) for p in paths)
        geodesics = [p for p in paths if len(p) == shortest]
        for p in geodesics:
            for node in p[1:-1]:
                raw[node] += 1.0 / len(geodesics)
    n = len(graph.nodes)
    scale = (n - 1) * (n - 2) / 2.0
    return dict((node, value / scale) for node, value in raw.items()), raw


def oracle_core_periphery(graph):
    """Best fit over every labeling, computed with numpy's correlation."""
    nodes = sorted(graph.nodes)
    edges = graph.edges()
    pairs = list(itertools.combinations(nodes, 2))
    observed = np.array([1.0 if pair in edges else 0.0 for pair in pairs])
    best = None
    for size in range(1, len(nodes)):
        for core in itertools.combinations(nodes, size):
            core = set(core)
            pattern = np.array([1.0 if a in core or b in core else 0.0 for a, b in pairs])
            if pattern.std() == 0 or observed.std() == 0:
                continue
            fit = float(np.corrcoef(observed, pattern)[0, 1])
            if best is None or fit > best:
                best = fit
    return best
