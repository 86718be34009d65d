import io
import unittest

from hypothesis import assume, given, strategies as st
import pytest

from virtualmirror.exceptions import InputError, InputOutOfBounds, UndefinedMetricError
from virtualmirror.ingest import BarrierRating, SurveyResponse, parse_events, parse_kpi, parse_responses
from virtualmirror.insight import (
    RankedList, channel_summary, correlate_with_kpi, format_overlap, layer_betweenness_report, layer_networks,
    p_two_tailed, pearson, rank_barriers, rank_by, rank_platforms, read_ranked_lists, topk_overlap,
    write_correlations_csv, write_layer_rankings_csv
)
from virtualmirror.metrics import degree, read_metric_table

from .helpers import data_path, graph_from_edges, oracle_betweenness

REFERENCE_R = {'density': -0.83, 'core_periphery': 0.65, 'gbc': 0.90, 'gdc': 0.53, 'awvci': 0.80}


def _reference_windows():
    with open(data_path('metrics_windows.csv'), 'rb') as f:
        rows = read_metric_table(f)
    with open(data_path('kpi_cfu.csv'), 'rb') as f:
        kpi = parse_kpi(f)
    return rows, kpi


class TestPearson(unittest.TestCase):

    def test_reference_rows(self):
        rows, kpi = _reference_windows()
        self.assertAlmostEqual(pearson([r.density for r in rows], kpi.values), -0.83, delta=0.01)
        self.assertAlmostEqual(pearson([r.gbc for r in rows], kpi.values), 0.90, delta=0.01)

    def test_identical(self):
        self.assertAlmostEqual(pearson([1.0, 4.0, 2.0, 8.0], [1.0, 4.0, 2.0, 8.0]), 1.0)

    def test_zero_variance(self):
        with self.assertRaisesRegex(UndefinedMetricError, 'correlation undefined'):
            pearson([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with self.assertRaisesRegex(InputError, 'lengths 3 and 4'):
            pearson([1, 2, 3], [1, 2, 3, 4])
        with self.assertRaisesRegex(InputError, 'at least 3 points'):
            pearson([1, 2], [2, 1])


samples = st.lists(st.integers(-50, 50), min_size=3, max_size=10)


@given(samples, samples, st.integers(-5, 5).filter(lambda a: a != 0), st.integers(-20, 20))
def test_pearson_affine_and_symmetric(xs, ys, a, b):
    n = min(len(xs), len(ys))
    xs, ys = xs[:n], ys[:n]
    assume(len(set(xs)) > 1 and len(set(ys)) > 1)
    r = pearson(xs, ys)
    assert -1.0 <= r <= 1.0
    assert pearson(ys, xs) == pytest.approx(r, abs=1e-12)
    sign = 1 if a > 0 else -1
    assert pearson([a * x + b for x in xs], ys) == pytest.approx(sign * r, abs=1e-9)


def test_p_value():
    assert p_two_tailed(1.0, 3) == 0.0
    assert p_two_tailed(0.0, 5) == pytest.approx(1.0)
    # r = 0.80 with 5 points sits just above the 0.10 level
    assert p_two_tailed(0.80, 5) == pytest.approx(0.104, abs=0.002)


class TestCorrelateWithKpi(unittest.TestCase):

    def test_reference_windows(self):
        rows, kpi = _reference_windows()
        result = correlate_with_kpi(rows, kpi)
        self.assertEqual([c.metric for c in result], list(REFERENCE_R))
        for c in result:
            self.assertAlmostEqual(c.r, REFERENCE_R[c.metric], delta=0.01)
            self.assertEqual(c.n, 5)
        by_metric = dict((c.metric, c) for c in result)
        self.assertTrue(by_metric['gbc'].significant)
        self.assertTrue(by_metric['density'].significant)
        self.assertFalse(by_metric['gdc'].significant)

    def test_stars_at_alpha_020(self):
        rows, kpi = _reference_windows()
        flags = dict((c.metric, c.significant) for c in correlate_with_kpi(rows, kpi, alpha=0.20))
        self.assertEqual(flags, {'density': True, 'core_periphery': False, 'gbc': True, 'gdc': False,
                                 'awvci': True})

    def test_collinear(self):
        rows, kpi = _reference_windows()
        rows = [row._replace(density=float(i + 1)) for i, row in enumerate(rows[:3])]
        kpi = kpi._replace(points=tuple(p._replace(value=2.0 * (i + 1)) for i, p in enumerate(kpi.points[:3])))
        density = correlate_with_kpi(rows, kpi)[0]
        self.assertEqual(density.r, 1.0)
        self.assertEqual(density.p_two_tailed, 0.0)

    def test_misaligned(self):
        rows, kpi = _reference_windows()
        shifted = parse_kpi(
            b'window_start,window_end,value\n'
            b'2012-04-01,2012-04-15,1\n2012-04-15,2012-04-29,2\n2012-04-29,2012-05-13,3\n'
            b'2012-05-13,2012-05-27,4\n2012-05-27,2012-06-08,5\n'
        )
        with self.assertRaisesRegex(InputError, 'metric window 2012-05-27..2012-06-09'):
            correlate_with_kpi(rows, shifted)
        with self.assertRaisesRegex(InputError, 'has 4 windows but the KPI series has 5'):
            correlate_with_kpi(rows[:4], kpi)

    def test_absent_metric_values(self):
        rows, kpi = _reference_windows()
        rows[0] = rows[0]._replace(gbc=None)
        rows[1] = rows[1]._replace(gbc=None)
        rows[2] = rows[2]._replace(gbc=None)
        gbc = [c for c in correlate_with_kpi(rows, kpi) if c.metric == 'gbc'][0]
        self.assertIsNone(gbc.r)
        self.assertEqual(gbc.n, 2)
        self.assertIn('at least 3 points', gbc.reason)

    def test_alpha_bounds(self):
        rows, kpi = _reference_windows()
        with self.assertRaises(InputOutOfBounds):
            correlate_with_kpi(rows, kpi, alpha=1.5)


def test_correlations_csv():
    rows, kpi = _reference_windows()
    out = io.StringIO()
    write_correlations_csv(correlate_with_kpi(rows, kpi), out)
    lines = out.getvalue().splitlines()
    assert lines[0] == 'metric,r,p,significant,n'
    assert lines[3].startswith('gbc,')
    assert abs(float(lines[3].split(',')[1]) - 0.90) <= 0.01
    assert lines[3].endswith(',true,5')


class TestRankBy(unittest.TestCase):

    def test_top_two(self):
        self.assertEqual(rank_by({'a': 3, 'b': 1, 'c': 2}, 2).entries, (('a', 3), ('c', 2)))

    def test_ties(self):
        self.assertEqual([a for a, s in rank_by({'d': 1, 'b': 1, 'c': 1, 'a': 1}, 2).entries], ['a', 'b'])

    def test_short_population(self):
        self.assertEqual(len(rank_by(dict((x, 1.0) for x in 'abcde'), 10).entries), 5)

    def test_degree_ranking(self):
        graph = graph_from_edges([('c', 'a'), ('c', 'b'), ('c', 'd'), ('a', 'b')])
        self.assertEqual(rank_by(degree(graph), 2, 'connections').entries, (('c', 3), ('a', 2)))

    def test_invalid_k(self):
        with self.assertRaises(InputError):
            rank_by({'a': 1}, 0)


class TestTopkOverlap(unittest.TestCase):

    def test_key_individual_lists(self):
        with open(data_path('key_individual_lists.csv'), 'rb') as f:
            lists = read_ranked_lists(f)
        self.assertEqual([ranked.label for ranked in lists], ['core_group', 'full_ecosystem', 'survey_based'])
        self.assertEqual(len(lists[0].entries), 11)
        overlap = topk_overlap(lists, 10)
        self.assertEqual(overlap.size, 7)
        self.assertEqual(overlap.common, frozenset(['2', '6', '16', '27', '33', '37', '42']))

    def test_identical(self):
        ranked = rank_by(dict((x, float(i)) for i, x in enumerate('abcdef')), 6)
        self.assertEqual(topk_overlap([ranked, ranked], 4).size, 4)

    def test_disjoint(self):
        one = RankedList('one', (('a', 2.0), ('b', 1.0)))
        two = RankedList('two', (('c', 2.0), ('d', 1.0)))
        self.assertEqual(topk_overlap([one, two], 2).size, 0)

    def test_short_list(self):
        one = RankedList('one', (('a', 2.0),))
        with self.assertRaisesRegex(InputError, "'one' has 1 entries, fewer than k=2"):
            topk_overlap([one, one], 2)

    def test_single_list(self):
        with self.assertRaises(InputError):
            topk_overlap([RankedList('one', (('a', 1.0),))], 1)


actor_scores = st.dictionaries(st.sampled_from('abcdefghij'), st.integers(0, 9), min_size=5)


@given(st.lists(actor_scores, min_size=3, max_size=5), st.integers(1, 5))
def test_overlap_properties(score_maps, k):
    lists = [rank_by(scores, k) for scores in score_maps]
    assume(all(len(ranked.entries) >= k for ranked in lists))
    first = topk_overlap(lists[:2], k)
    assert 0 <= first.size <= k
    assert topk_overlap(lists, k).size <= first.size
    assert topk_overlap([lists[0], rank_by(score_maps[0], k)], k).size == k


def test_format_overlap():
    with open(data_path('key_individual_lists.csv'), 'rb') as f:
        lists = read_ranked_lists(f)
    text = format_overlap(topk_overlap(lists, 10), lists, 10)
    assert text == (
        'Top-10 overlap across 3 lists (core_group, full_ecosystem, survey_based)\n'
        'size: 7\n'
        'common: 16, 2, 27, 33, 37, 42, 6\n'
    )


def _advice(ego, alter, frequency):
    return SurveyResponse(ego, alter, 'advice', frequency, frozenset(['email']))


class TestLayers(unittest.TestCase):

    def test_single_arc(self):
        layers = layer_networks([_advice('a', 'b', 3)])
        self.assertEqual(layers['advice'].arcs, {('a', 'b'): 3})
        self.assertEqual(list(layers), ['people_finding', 'collaboration', 'advice', 'personal', 'innovation'])
        self.assertEqual(layers['personal'].arcs, {})

    def test_min_frequency(self):
        layers = layer_networks([_advice('a', 'b', 4)], min_frequency=5)
        self.assertEqual(layers['advice'].arcs, {})
        with self.assertRaises(InputOutOfBounds):
            layer_networks([], min_frequency=6)

    def test_two_relations(self):
        responses = [_advice('a', 'b', 3), SurveyResponse('c', 'd', 'personal', 2, frozenset())]
        layers = layer_networks(responses)
        self.assertEqual(layers['advice'].arcs, {('a', 'b'): 3})
        self.assertEqual(layers['personal'].arcs, {('c', 'd'): 2})

    def test_path_ranking(self):
        layers = layer_networks([_advice('a', 'b', 3), _advice('b', 'c', 2)])
        report = layer_betweenness_report(layers)
        self.assertEqual([a for a, s in report.rankings['advice'].entries], ['b', 'a', 'c'])
        self.assertIn('people_finding', report.omitted)

    def test_isomorphic_layers(self):
        responses = [_advice('a', 'b', 3), _advice('b', 'c', 3),
                     SurveyResponse('x', 'y', 'personal', 1, frozenset()),
                     SurveyResponse('z', 'y', 'personal', 1, frozenset())]
        report = layer_betweenness_report(layer_networks(responses))
        advice = sorted(s for a, s in report.rankings['advice'].entries)
        personal = sorted(s for a, s in report.rankings['personal'].entries)
        self.assertEqual(advice, personal)

    def test_fixture_layers_match_oracle(self):
        with open(data_path('survey_responses.csv'), 'rb') as f:
            layers = layer_networks(parse_responses(f))
        report = layer_betweenness_report(layers)
        self.assertEqual(list(report.rankings), ['people_finding', 'collaboration', 'advice'])
        self.assertEqual(list(report.omitted), ['personal', 'innovation'])
        for relation, ranked in report.rankings.items():
            expected, raw = oracle_betweenness(layers[relation])
            for actor, score in ranked.entries:
                self.assertAlmostEqual(score, expected[actor], places=9)
        self.assertEqual(report.rankings['advice'].entries[0][0], 'a')

    def test_layer_rankings_csv(self):
        layers = layer_networks([_advice('a', 'b', 3), _advice('b', 'c', 2)])
        out = io.StringIO()
        write_layer_rankings_csv(layer_betweenness_report(layers), out)
        self.assertEqual(out.getvalue(), 'relation,actor,betweenness,rank\n'
                                         'advice,b,1.000000,1\nadvice,a,0.000000,2\nadvice,c,0.000000,3\n')


class TestRankBarriers(unittest.TestCase):

    def test_single_respondent(self):
        ratings = [BarrierRating('r', 'time', 4), BarrierRating('r', 'search', 5)]
        self.assertEqual([b for b, m in rank_barriers(ratings)], ['search', 'time'])

    def test_all_equal(self):
        ratings = [BarrierRating('r', label, 3) for label in ('time', 'trust', 'search')]
        self.assertEqual([b for b, m in rank_barriers(ratings)], ['search', 'time', 'trust'])

    def test_mean_tie(self):
        ratings = [BarrierRating('r1', 'search', 5), BarrierRating('r2', 'search', 3),
                   BarrierRating('r1', 'time', 4), BarrierRating('r2', 'time', 4)]
        self.assertEqual(rank_barriers(ratings), [('search', 4.0), ('time', 4.0)])

    def test_empty(self):
        with self.assertRaises(InputError):
            rank_barriers([])


def test_rank_platforms():
    with open(data_path('survey_responses.csv'), 'rb') as f:
        responses = parse_responses(f)
    assert rank_platforms(responses) == [('email', 8), ('im', 4), ('f2f', 2), ('webconf', 2)]


def test_channel_summary():
    with open(data_path('events.jsonl'), 'rb') as f:
        summary = channel_summary(parse_events(f))
    assert list(summary) == ['email', 'social', 'content', 'im']
    assert (summary['email'].messages, summary['email'].senders) == (9, 4)
    assert (summary['content'].messages, summary['content'].senders) == (1, 1)
