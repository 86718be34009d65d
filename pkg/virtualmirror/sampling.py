"""Ego-mailbox sampling experiment.

A mailbox holds the messages its owner sent and received, and a received
message shows its whole recipient list. Observing a subset of mailboxes
therefore reveals every sender-recipient arc of any message that touches an
observed ego. The experiment measures how much of the full network such a
subset recovers.
"""
from collections import namedtuple
import csv
import datetime as dt
import itertools
import logging
import math

import numpy as np

from .exceptions import InputError, UndefinedMetricError
from .ingest import InteractionEvent
from .netbuild import InteractionGraph, build_graph, full_window

logger = logging.getLogger(__name__)

TrafficParams = namedtuple(
    'TrafficParams',
    ['n_actors', 'n_messages', 'mean_recipients', 'recipient_dispersion', 'group_count', 'in_group_bias', 'seed'],
    defaults=(42, 5000, 3.0, 1.0, 3, 0.8, 42)
)
RecallPoint = namedtuple('RecallPoint', ['fraction', 'mean_recall', 'stddev', 'trials'])

TRAFFIC_START = dt.datetime(2012, 4, 1, tzinfo=dt.timezone.utc)
TRAFFIC_SPAN_SECONDS = 91 * 24 * 3600


def _validate_params(params):
    if params.n_actors < 2:
        raise InputError('n_actors must be at least 2: {}'.format(params.n_actors))
    if params.n_messages < 1:
        raise InputError('n_messages must be at least 1: {}'.format(params.n_messages))
    if params.mean_recipients < 1:
        raise InputError('mean_recipients must be at least 1: {}'.format(params.mean_recipients))
    if params.mean_recipients >= params.n_actors:
        raise InputError('mean_recipients ({}) must be below n_actors ({})'.format(
            params.mean_recipients, params.n_actors))
    if not 0.0 <= params.recipient_dispersion <= 1.0:
        raise InputError('recipient_dispersion must lie in [0, 1]: {}'.format(params.recipient_dispersion))
    if not 1 <= params.group_count <= params.n_actors:
        raise InputError('group_count must lie in 1..n_actors: {}'.format(params.group_count))
    if not 0.0 <= params.in_group_bias <= 1.0:
        raise InputError('in_group_bias must lie in [0, 1]: {}'.format(params.in_group_bias))
    if params.in_group_bias >= 1.0 and params.n_actors < 2 * params.group_count:
        raise InputError('in_group_bias 1 needs at least 2 actors per group')


def actor_ids(n_actors):
    width = max(2, len(str(n_actors)))
    return ['{:0{}d}'.format(i, width) for i in range(1, n_actors + 1)]


def generate_traffic(params):
    """Synthetic e-mail traffic, reproducible from ``params.seed``.

    The number of recipients beyond the first is the rounded mean for a
    share ``1 - recipient_dispersion`` of messages and geometric with the
    same mean otherwise, truncated to the available actors. Actors are dealt
    round-robin into ``group_count`` groups; each recipient comes from the
    sender's group with probability ``in_group_bias``.
    """
    _validate_params(params)
    rng = np.random.default_rng(params.seed)
    actors = actor_ids(params.n_actors)
    groups = [i % params.group_count for i in range(params.n_actors)]
    members = [[i for i in range(params.n_actors) if groups[i] == g] for g in range(params.group_count)]
    extra_mean = params.mean_recipients - 1.0
    max_recipients = params.n_actors - 1
    offsets = np.sort(rng.integers(0, TRAFFIC_SPAN_SECONDS, size=params.n_messages))

    events = []
    for m in range(params.n_messages):
        sender = int(rng.integers(params.n_actors))
        if extra_mean > 0 and rng.random() < params.recipient_dispersion:
            extra = int(rng.geometric(1.0 / (1.0 + extra_mean))) - 1
        else:
            extra = int(round(extra_mean))
        wanted = min(1 + extra, max_recipients)

        own = [i for i in members[groups[sender]] if i != sender]
        other = [i for i in range(params.n_actors) if groups[i] != groups[sender]]
        chosen = []
        while len(chosen) < wanted and (own or other):
            use_own = rng.random() < params.in_group_bias
            if use_own and not own:
                if params.in_group_bias >= 1.0:
                    break
                use_own = False
            elif not use_own and not other:
                use_own = True
            pool = own if use_own else other
            chosen.append(pool.pop(int(rng.integers(len(pool)))))
        ts = TRAFFIC_START + dt.timedelta(seconds=int(offsets[m]))
        events.append(InteractionEvent(ts, actors[sender], tuple(actors[i] for i in chosen), 'email',
                                       'm{:06d}'.format(m + 1)))
    return events


def observe_via_egos(events, egos, infer_corecipients=False):
    """Graph visible through the mailboxes of ``egos``.

    An event is seen when its sender or any recipient is an ego. With
    ``infer_corecipients`` every pair of co-recipients of a seen event is
    also tied (marked as inferred).
    """
    egos = frozenset(egos)
    arcs = {}
    inferred = set()
    for ev in events:
        if ev.sender not in egos and egos.isdisjoint(ev.recipients):
            continue
        recipients = [r for r in ev.recipients if r != ev.sender]
        for r in recipients:
            arcs[(ev.sender, r)] = arcs.get((ev.sender, r), 0) + 1
        if infer_corecipients:
            for a, b in itertools.combinations(sorted(set(recipients)), 2):
                inferred.add(frozenset((a, b)))
    observed = set(frozenset(arc) for arc in arcs)
    return InteractionGraph(full_window(events), (), arcs, [t for t in inferred if t not in observed])


def edge_recall(full, observed):
    """Share of the full graph's undirected edges present in ``observed``."""
    full_edges = full.edges()
    if not full_edges:
        raise UndefinedMetricError('recall undefined: the full graph has no edges')
    if not observed.nodes <= full.nodes:
        raise InputError('Observed graph has actors missing from the full graph')
    return len(full_edges & observed.edges()) / float(len(full_edges))


def _trial_rng(seed, fraction_index, trial):
    return np.random.default_rng(np.random.SeedSequence([seed, fraction_index, trial]))


def run_sampling_experiment(events, fractions, trials=30, seed=0, infer_corecipients=False, nested=False):
    """Mean and standard deviation of edge recall per sampling fraction.

    Each trial draws ``ceil(fraction * n_actors)`` egos uniformly. Trial
    randomness depends only on (seed, fraction index, trial), or on
    (seed, trial) when ``nested`` is set; in that case every fraction takes a
    prefix of one permutation per trial.
    """
    if trials < 1:
        raise InputError('trials must be at least 1: {}'.format(trials))
    if infer_corecipients:
        logger.warning('Co-recipient inference is on: recall counts inferred ties')
    for fraction in fractions:
        if not 0.0 < fraction <= 1.0:
            raise InputError('sampling fraction must lie in (0, 1]: {}'.format(fraction))
    full = build_graph(events, None, 1)
    actors = sorted(set(ev.sender for ev in events) | set(r for ev in events for r in ev.recipients))
    points = []
    for fi, fraction in enumerate(fractions):
        size = min(len(actors), max(1, int(math.ceil(fraction * len(actors) - 1e-9))))
        recalls = []
        for trial in range(trials):
            if nested:
                order = _trial_rng(seed, 0, trial).permutation(len(actors))
            else:
                order = _trial_rng(seed, fi + 1, trial).permutation(len(actors))
            egos = [actors[i] for i in order[:size]]
            recalls.append(edge_recall(full, observe_via_egos(events, egos, infer_corecipients)))
        values = np.array(recalls)
        point = RecallPoint(fraction, float(values.mean()), float(values.std()), trials)
        logger.info('fraction %.3f: %d egos, mean recall %.4f', fraction, size, point.mean_recall)
        points.append(point)
    return points


def write_recall_csv(points, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['fraction', 'mean_recall', 'stddev', 'trials'])
    for p in points:
        writer.writerow(['{:.6f}'.format(p.fraction), '{:.6f}'.format(p.mean_recall),
                         '{:.6f}'.format(p.stddev), p.trials])
