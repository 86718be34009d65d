import argparse
import logging
import os
import sys

from .config import load_settings
from .exceptions import InputError, UndefinedMetricError, VirtualMirrorError
from .ingest import (
    EVENT_FORMATS, anonymize, parse_attributes, parse_barriers, parse_events, parse_kpi, parse_responses,
    serialize_events, write_mapping
)
from .insight import (
    channel_summary, correlate_with_kpi, format_overlap, layer_betweenness_report, layer_networks,
    rank_barriers, rank_platforms, read_ranked_lists, topk_overlap, write_correlations_csv,
    write_layer_rankings_csv, write_ranking_csv
)
from .metrics import metric_row, read_metric_table, write_metric_table
from .netbuild import (
    SCOPE_MODES, actor_stats, build_graph, export_dot, export_graphml, full_window, load_scope_presets,
    make_windows, parse_window_spec, scope_graph, top_n_by_betweenness
)
from .report import mirror_report, render_ci_scatter, render_layer_bars, render_series
from .sampling import TrafficParams, generate_traffic, run_sampling_experiment, write_recall_csv
from .temporal import betweenness_series, write_oscillation_csv, write_series_csv

logger = logging.getLogger(__name__)


def _read_events(path, fmt, args):
    if fmt is None:
        fmt = 'csv_edges' if path.lower().endswith('.csv') else 'jsonl'
    with open(path, 'rb') as f:
        events = parse_events(f, fmt, source=path)
    logger.info('Read %d event(s) from %s', len(events), path)
    if args.anonymize:
        if not args.salt:
            raise InputError('--anonymize needs --salt')
        try:
            salt = bytes.fromhex(args.salt)
        except ValueError:
            raise InputError('--salt must be hexadecimal')
        events, mapping = anonymize(events, salt)
        if args.mapping_out:
            with open(args.mapping_out, 'w', newline='') as f:
                write_mapping(mapping, f)
    return events


def _read_attrs(path):
    if path is None:
        return {}
    with open(path, 'rb') as f:
        return parse_attributes(f, source=path)


def _windows(settings, events):
    if settings['windows'] is None:
        return [full_window(events)]
    return make_windows(parse_window_spec(settings['windows']))


def _scope_settings(args, settings):
    """Apply the scope preset when asked, without overriding explicit flags."""
    scope, threshold, top_n = settings['scope'], settings['min_edge_weight'], settings['top_n']
    if getattr(args, 'preset', None):
        preset = load_scope_presets()[args.preset]
        if args.scope is None:
            scope = preset.mode
        if args.threshold is None:
            threshold = preset.min_edge_weight
        if settings['top_n'] is None:
            top_n = preset.top_n
    return scope, threshold, top_n


def _window_graphs(events, args, settings):
    attrs = _read_attrs(getattr(args, 'attrs', None))
    scope, threshold, top_n = _scope_settings(args, settings)
    channels = settings['channels']
    for window in _windows(settings, events):
        graph = scope_graph(build_graph(events, window, threshold, channels), attrs, scope)
        if top_n is not None:
            graph = top_n_by_betweenness(graph, top_n)
        yield window, graph, attrs


def _out(args, name):
    return os.path.join(args.out, name)


def cmd_ingest(args, settings):
    events = _read_events(args.events, args.format, args)
    with open(_out(args, 'events.' + ('csv' if args.out_format == 'csv_edges' else 'jsonl')), 'wb') as f:
        f.write(serialize_events(events, args.out_format))


def cmd_build(args, settings):
    events = _read_events(args.events, args.format, args)
    for i, (window, graph, attrs) in enumerate(_window_graphs(events, args, settings), start=1):
        with open(_out(args, 'graph_{}.graphml'.format(i)), 'wb') as f:
            export_graphml(graph, f, attrs)
        with open(_out(args, 'graph_{}.dot'.format(i)), 'w') as f:
            export_dot(graph, f)
        logger.info('Window %s: %d nodes, %d arcs', window.label, len(graph.nodes), len(graph.arcs))


def cmd_metrics(args, settings):
    events = _read_events(args.events, args.format, args)
    rows = []
    for window, graph, attrs in _window_graphs(events, args, settings):
        stats = [s for s in actor_stats(events, window, settings['channels']) if s.actor in graph.nodes]
        rows.append(metric_row(graph, stats, settings['restarts'], settings['seed'],
                               settings['core_periphery_method']))
    with open(_out(args, 'metrics.csv'), 'w', newline='') as f:
        write_metric_table(rows, f)


def cmd_timeseries(args, settings):
    events = _read_events(args.events, args.format, args)
    if settings['windows'] is None:
        raise InputError('timeseries needs --windows')
    series = betweenness_series(events, parse_window_spec(settings['windows']), settings['min_edge_weight'])
    with open(_out(args, 'series.csv'), 'w', newline='') as f:
        write_series_csv(series, f)
    with open(_out(args, 'oscillation.csv'), 'w', newline='') as f:
        write_oscillation_csv(series, f)


def _correlations(metrics_path, kpi_path, settings):
    with open(metrics_path, 'rb') as f:
        rows = read_metric_table(f, source=metrics_path)
    with open(kpi_path, 'rb') as f:
        kpi = parse_kpi(f, source=kpi_path)
    return rows, correlate_with_kpi(rows, kpi, settings['alpha'])


def cmd_correlate(args, settings):
    rows, correlations = _correlations(args.metrics, args.kpi, settings)
    with open(_out(args, 'correlations.csv'), 'w', newline='') as f:
        write_correlations_csv(correlations, f)


def cmd_compare(args, settings):
    with open(args.lists, 'rb') as f:
        lists = read_ranked_lists(f, source=args.lists)
    k = settings['k']
    overlap = topk_overlap(lists, k)
    with open(_out(args, 'overlap.txt'), 'w') as f:
        f.write(format_overlap(overlap, lists, k))


def _survey(responses_path, settings):
    frequency_range = (settings['frequency_min'], settings['frequency_max'])
    with open(responses_path, 'rb') as f:
        responses = parse_responses(f, frequency_range, source=responses_path)
    layers = layer_networks(responses, settings['min_frequency'], frequency_range)
    return responses, layer_betweenness_report(layers, directed=settings['directed'])


def _barriers(path, settings):
    with open(path, 'rb') as f:
        ratings = parse_barriers(f, (settings['frequency_min'], settings['frequency_max']), source=path)
    return rank_barriers(ratings)


def cmd_survey(args, settings):
    responses, layer_rankings = _survey(args.responses, settings)
    with open(_out(args, 'layer_rankings.csv'), 'w', newline='') as f:
        write_layer_rankings_csv(layer_rankings, f)
    if args.barriers:
        with open(_out(args, 'barriers.csv'), 'w', newline='') as f:
            write_ranking_csv(_barriers(args.barriers, settings), ['barrier', 'mean_score'], f, '{:.4f}')
    with open(_out(args, 'platforms.csv'), 'w', newline='') as f:
        write_ranking_csv(rank_platforms(responses), ['platform', 'ties'], f, '{:d}')


def cmd_sample(args, settings):
    if args.events:
        events = _read_events(args.events, args.format, args)
    else:
        params = TrafficParams(*[settings[name] for name in TrafficParams._fields])
        events = generate_traffic(params)
    points = run_sampling_experiment(events, settings['fractions'], settings['trials'], settings['seed'],
                                     settings['infer_corecipients'], settings['nested'])
    with open(_out(args, 'recall.csv'), 'w', newline='') as f:
        write_recall_csv(points, f)


def cmd_plot(args, settings):
    events = _read_events(args.events, args.format, args)
    with open(_out(args, 'ci_scatter.svg'), 'wb') as f:
        f.write(render_ci_scatter(actor_stats(events, None, settings['channels']), settings['highlight_top']))
    if settings['windows'] is not None:
        series = betweenness_series(events, parse_window_spec(settings['windows']), settings['min_edge_weight'])
        with open(_out(args, 'series.svg'), 'wb') as f:
            f.write(render_series(series))
    if args.survey:
        responses, layer_rankings = _survey(args.survey, settings)
        with open(_out(args, 'layer_bars.svg'), 'wb') as f:
            f.write(render_layer_bars(layer_rankings.rankings, settings['k']))


def cmd_report(args, settings):
    rows = correlations = rankings = series = barriers = platforms = channels = None
    if args.metrics:
        with open(args.metrics, 'rb') as f:
            rows = read_metric_table(f, source=args.metrics)
        if args.kpi:
            rows, correlations = _correlations(args.metrics, args.kpi, settings)
    elif args.kpi:
        raise InputError('--kpi needs --metrics')
    if args.lists:
        with open(args.lists, 'rb') as f:
            rankings = dict((ranked.label, ranked) for ranked in read_ranked_lists(f, source=args.lists))
    if args.survey:
        responses, layer_rankings = _survey(args.survey, settings)
        rankings = dict(rankings or {})
        for relation, ranked in layer_rankings.rankings.items():
            rankings[relation] = ranked._replace(entries=ranked.entries[:settings['k']])
        platforms = rank_platforms(responses)
    if args.barriers:
        barriers = _barriers(args.barriers, settings)
    if args.events:
        events = _read_events(args.events, args.format, args)
        channels = channel_summary(events)
        if settings['windows'] is not None:
            series = betweenness_series(events, parse_window_spec(settings['windows']), settings['min_edge_weight'])
    text = mirror_report(rows, correlations, rankings, series, barriers, platforms, channels)
    with open(_out(args, 'mirror_report.txt'), 'w') as f:
        f.write(text)


def _add_events_args(parser, required=True):
    if required:
        parser.add_argument('events', help='Event log (JSON lines or CSV edge list)')
    else:
        parser.add_argument('--events', help='Event log to sample from instead of generated traffic')
    parser.add_argument('--format', choices=EVENT_FORMATS,
                        help='Event log format. Default: csv_edges for .csv files, jsonl otherwise.')


def _add_scope_args(parser):
    parser.add_argument('--attrs', help='Actor attributes CSV with a scope column')
    parser.add_argument('--scope', choices=list(SCOPE_MODES), help='Actors to keep. Default: ecosystem')
    parser.add_argument('--top-n', type=int, help='Keep the N actors of highest betweenness')
    parser.add_argument('--preset', choices=list(SCOPE_MODES),
                        help='Use the preset threshold and top-N of this analysis level')
    parser.add_argument('--channels', type=lambda s: [c.strip() for c in s.split(',') if c.strip()],
                        help='Comma separated channels to include. Default: all')


def build_parser():
    parser = argparse.ArgumentParser(
        description='Build virtual mirror network analyses from communication and survey data')
    parser.add_argument('--config', help='key=value settings file')
    parser.add_argument('--seed', type=int, help='Random seed for core/periphery search and sampling')
    parser.add_argument('--out', default='.', help='Output directory. Default: current directory')
    parser.add_argument('--threshold', type=int,
                        help='Minimum messages per pair, both directions summed, to keep an edge. Default: 1')
    parser.add_argument('--windows', help='YYYY-MM-DD:<days>:<count> or a CSV file of start,end windows')
    parser.add_argument('--anonymize', action='store_true', help='Replace actor ids with keyed pseudonyms')
    parser.add_argument('--salt', help='Hex-encoded key for --anonymize')
    parser.add_argument('--mapping-out', help='Where to write the pseudonym,original mapping')
    parser.add_argument('--alpha', type=float, help='Significance level for correlations. Default: 0.10')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='More logging (-vv for debug)')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('ingest', help='Validate an event log and write it back as JSON lines or CSV')
    _add_events_args(p)
    p.add_argument('--out-format', choices=EVENT_FORMATS, default='jsonl')
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser('build', help='Export the graph of every window as GraphML and DOT')
    _add_events_args(p)
    _add_scope_args(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser('metrics', help='Group metrics per window')
    _add_events_args(p)
    _add_scope_args(p)
    p.add_argument('--restarts', type=int, help='Hill-climbing restarts for core/periphery. Default: 50')
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser('timeseries', help='Betweenness per actor over windows and its oscillation')
    _add_events_args(p)
    p.set_defaults(func=cmd_timeseries)

    p = sub.add_parser('correlate', help='Correlate a metric table with a KPI series')
    p.add_argument('--metrics', required=True, help='Metric table CSV')
    p.add_argument('--kpi', required=True, help='KPI CSV (window_start,window_end,value)')
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser('compare', help='Actors common to the top k of several ranked lists')
    p.add_argument('--lists', required=True, help='CSV with one ranked list per column')
    p.add_argument('-k', type=int, help='List depth. Default: 10')
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('survey', help='Per-relation betweenness, barrier and platform rankings')
    p.add_argument('responses', help='Survey responses CSV')
    p.add_argument('--barriers', help='Barrier ratings CSV')
    p.add_argument('--min-frequency', type=int, help='Drop ties reported less often than this')
    p.add_argument('--directed', action='store_true', default=None, help='Directed layer betweenness')
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser('sample', help='Edge recall of ego-mailbox samples')
    _add_events_args(p, required=False)
    p.add_argument('--trials', type=int)
    p.add_argument('--fractions', type=lambda s: [float(x) for x in s.split(',') if x.strip()])
    for name in ('n_actors', 'n_messages', 'group_count'):
        p.add_argument('--' + name.replace('_', '-'), dest=name, type=int)
    for name in ('mean_recipients', 'recipient_dispersion', 'in_group_bias'):
        p.add_argument('--' + name.replace('_', '-'), dest=name, type=float)
    p.add_argument('--infer-corecipients', action='store_true', default=None,
                   help='Also tie co-recipients of every observed message (ties are marked inferred)')
    p.add_argument('--nested', action='store_true', default=None,
                   help='Each trial takes every fraction as a prefix of one actor ordering')
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser('plot', help='Contribution index scatter, betweenness lines and layer bars as SVG')
    _add_events_args(p)
    p.add_argument('--survey', help='Survey responses CSV for the per-relation bars')
    p.add_argument('--highlight-top', type=int)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser('report', help='Plain-text virtual mirror report')
    p.add_argument('--metrics', help='Metric table CSV')
    p.add_argument('--kpi', help='KPI CSV to correlate with --metrics')
    p.add_argument('--lists', help='Ranked lists CSV')
    p.add_argument('--survey', help='Survey responses CSV')
    p.add_argument('--barriers', help='Barrier ratings CSV')
    p.add_argument('--events', help='Event log for channel activity and, with --windows, oscillation')
    p.add_argument('--format', choices=EVENT_FORMATS)
    p.set_defaults(func=cmd_report)
    return parser


SETTING_FLAGS = ('seed', 'threshold', 'windows', 'alpha', 'scope', 'top_n', 'channels', 'restarts', 'k',
                 'min_frequency', 'directed', 'trials', 'fractions', 'n_actors', 'n_messages', 'group_count',
                 'mean_recipients', 'recipient_dispersion', 'in_group_bias', 'highlight_top', 'infer_corecipients',
                 'nested')


def main(argv=sys.argv[1:]):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else (logging.INFO if args.verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s:%(message)s')

    overrides = dict((name, getattr(args, name, None)) for name in SETTING_FLAGS)
    overrides['min_edge_weight'] = overrides.pop('threshold')
    try:
        settings = load_settings(args.config, overrides)
        os.makedirs(args.out, exist_ok=True)
        args.func(args, settings)
    except (VirtualMirrorError, OSError) as ex:
        exclass = type(ex).__name__
        logging.error('%s:%s', exclass, str(ex))
        sys.exit(2 if isinstance(ex, UndefinedMetricError) else 1)
    except Exception:
        logging.exception('Unknown error')
        sys.exit(2)


if __name__ == '__main__':
    main()
