from collections import namedtuple
import logging

from lxml import etree
from lxml.builder import ElementMaker

from .exceptions import InputError
from .ingest import format_instant
from .metrics import METRIC_COLUMNS
from .temporal import group_oscillation, normalized_oscillation, oscillation

logger = logging.getLogger(__name__)

SVG_NS = 'http://www.w3.org/2000/svg'
WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 80
MARGIN_RIGHT = 160
MARGIN_TOP = 50
MARGIN_BOTTOM = 60
LABEL_FONT_SIZE = '10pt'
PALETTE = ('#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd',
           '#8c564b', '#e377c2', '#7f7f7f', '#bcbd22', '#17becf')
FIGURE_KINDS = ('ci_scatter', 'series_lines', 'layer_bars')

Figure = namedtuple('Figure', ['kind', 'title', 'data', 'path'])

E = ElementMaker(namespace=SVG_NS, nsmap={None: SVG_NS})


def _num(x):
    return '{:.2f}'.format(x)


class _Plot(object):
    """Linear mapping from data coordinates into the fixed plot area."""

    def __init__(self, xmin, xmax, ymin, ymax):
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = HEIGHT - MARGIN_BOTTOM
        self.xmin, self.xmax = xmin, (xmax if xmax > xmin else xmin + 1.0)
        self.ymin, self.ymax = ymin, (ymax if ymax > ymin else ymin + 1.0)

    def x(self, value):
        return self.left + (value - self.xmin) / (self.xmax - self.xmin) * (self.right - self.left)

    def y(self, value):
        return self.bottom - (value - self.ymin) / (self.ymax - self.ymin) * (self.bottom - self.top)


def _text(x, y, content, anchor='middle', **kwargs):
    # Attributes that are not Python identifiers go in as a dict child
    return E.text(content, {'font-size': LABEL_FONT_SIZE, 'text-anchor': anchor}, x=_num(x), y=_num(y), **kwargs)


def _line(x1, y1, x2, y2, stroke='#000000', extra=None, **kwargs):
    return E.line(extra or {}, x1=_num(x1), y1=_num(y1), x2=_num(x2), y2=_num(y2), stroke=stroke, **kwargs)


def _document(title, *children):
    svg = E.svg(
        E.title(title),
        E.rect(x='0', y='0', width=str(WIDTH), height=str(HEIGHT), fill='#ffffff'),
        E.text(title, {'font-size': '12pt', 'text-anchor': 'middle'}, x=_num(WIDTH / 2.0), y='25'),
        *children,
        width=str(WIDTH), height=str(HEIGHT), viewBox='0 0 {} {}'.format(WIDTH, HEIGHT), version='1.1'
    )
    return etree.tostring(svg, xml_declaration=True, encoding='UTF-8', pretty_print=True)


def _axes(plot, xlabel, ylabel, xticks, yticks, xfmt='{:g}', yfmt='{:g}'):
    group = E.g(
        _line(plot.left, plot.bottom, plot.right, plot.bottom),
        _line(plot.left, plot.top, plot.left, plot.bottom),
        {'class': 'axes'}
    )
    for tick in xticks:
        x = plot.x(tick)
        group.append(_line(x, plot.bottom, x, plot.bottom + 5))
        group.append(_text(x, plot.bottom + 18, xfmt.format(tick)))
    for tick in yticks:
        y = plot.y(tick)
        group.append(_line(plot.left - 5, y, plot.left, y))
        group.append(_text(plot.left - 8, y + 4, yfmt.format(tick), anchor='end'))
    group.append(_text((plot.left + plot.right) / 2.0, HEIGHT - 15, xlabel))
    group.append(_text(20, (plot.top + plot.bottom) / 2.0, ylabel,
                       transform='rotate(-90 20 {})'.format(_num((plot.top + plot.bottom) / 2.0))))
    return group


def _ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    step = (hi - lo) / float(count - 1)
    return [lo + i * step for i in range(count)]


def render_ci_scatter(stats, highlight_top=10, title='Actor Contribution Index'):
    """Contribution index (Y, -1..1) against messages sent (X) as SVG bytes.

    The ``highlight_top`` actors by total volume are drawn in the highlight
    color; the balanced-communication midline is drawn at 0.
    """
    points = [s for s in stats if s.ci is not None]
    if not points:
        raise InputError('No actor with a defined contribution index to plot')
    by_volume = sorted(points, key=lambda s: (-(s.sent + s.received), s.actor))
    highlighted = set(s.actor for s in by_volume[:max(highlight_top, 0)])
    xmax = max(s.sent for s in points)
    plot = _Plot(0.0, float(xmax) if xmax > 0 else 1.0, -1.0, 1.0)

    dots = E.g({'class': 'points'})
    for s in sorted(points, key=lambda s: s.actor):
        is_top = s.actor in highlighted
        dots.append(E.circle(
            E.title('{}: sent {}, received {}, CI {:.3f}'.format(s.actor, s.sent, s.received, s.ci)),
            {'class': 'highlight' if is_top else 'actor', 'data-actor': s.actor},
            cx=_num(plot.x(s.sent)), cy=_num(plot.y(s.ci)), r='4',
            fill=PALETTE[3] if is_top else PALETTE[7]
        ))
    midline = _line(plot.left, plot.y(0.0), plot.right, plot.y(0.0), stroke='#999999',
                    extra={'class': 'midline', 'stroke-dasharray': '4 4'})
    axes = _axes(plot, 'Messages sent', 'Contribution index', _ticks(0.0, plot.xmax), [-1.0, -0.5, 0.0, 0.5, 1.0],
                 xfmt='{:.0f}')
    return _document(title, axes, midline, dots)


def _check_aligned(series_list):
    windows = series_list[0].windows
    for s in series_list[1:]:
        if s.windows != windows:
            raise InputError('Series {} is not aligned with series {}'.format(s.label, series_list[0].label))
    return windows


def _legend(labels):
    legend = E.g({'class': 'legend'})
    x = WIDTH - MARGIN_RIGHT + 15
    for i, label in enumerate(labels):
        y = MARGIN_TOP + 10 + i * 16
        color = PALETTE[i % len(PALETTE)]
        legend.append(_line(x, y - 4, x + 20, y - 4, stroke=color, extra={'stroke-width': '2'}))
        legend.append(_text(x + 25, y, label, anchor='start'))
    return legend


def render_series(series_set, title='Change in betweenness over time'):
    """One polyline per actor over window midpoints; legend sorted by actor."""
    labels = sorted(series_set)
    if not labels:
        raise InputError('No series to plot')
    series_list = [series_set[label] for label in labels]
    windows = _check_aligned(series_list)
    if not windows:
        raise InputError('Series have no points')
    origin = windows[0].midpoint
    xs = [(w.midpoint - origin).total_seconds() / 86400.0 for w in windows]
    ymax = max(max(s.values) for s in series_list)
    plot = _Plot(xs[0], xs[-1], 0.0, ymax if ymax > 0 else 1.0)

    lines = E.g({'class': 'series'})
    for i, s in enumerate(series_list):
        coords = ' '.join('{},{}'.format(_num(plot.x(x)), _num(plot.y(v))) for x, v in zip(xs, s.values))
        lines.append(E.polyline({'stroke-width': '2', 'data-actor': s.label},
                                points=coords, fill='none', stroke=PALETTE[i % len(PALETTE)]))
    axes = E.g(
        _axes(plot, 'Window', 'Betweenness', [], _ticks(0.0, plot.ymax), yfmt='{:.2f}'),
        *[_text(plot.x(x), plot.bottom + 18, format_instant(w.start)) for x, w in zip(xs, windows)]
    )
    return _document(title, axes, lines, _legend(labels))


def render_layer_bars(rankings, top=10, title='Betweenness centrality in the different networks'):
    """Horizontal bar panel per relation with its ``top`` actors."""
    relations = [r for r, ranked in rankings.items() if ranked.entries]
    if not relations:
        raise InputError('No layer rankings to plot')
    panel_height = (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / float(len(relations))
    xmax = max(score for r in relations for actor, score in rankings[r].entries[:top])
    plot = _Plot(0.0, xmax if xmax > 0 else 1.0, 0.0, 1.0)
    panels = E.g({'class': 'layers'})
    for i, relation in enumerate(relations):
        entries = rankings[relation].entries[:top]
        y0 = MARGIN_TOP + i * panel_height
        bar_height = (panel_height - 20) / float(max(len(entries), 1))
        panel = E.g(_text(plot.left, y0 + 12, relation, anchor='start'), {'class': 'layer'})
        for j, (actor, score) in enumerate(entries):
            y = y0 + 16 + j * bar_height
            panel.append(E.rect({'data-actor': actor},
                                x=_num(plot.left), y=_num(y), width=_num(plot.x(score) - plot.left),
                                height=_num(max(bar_height - 2, 1)), fill=PALETTE[i % len(PALETTE)]))
            panel.append(_text(plot.left - 5, y + bar_height / 2.0 + 3, actor, anchor='end'))
        panels.append(panel)
    axis = _line(plot.left, HEIGHT - MARGIN_BOTTOM, plot.right, HEIGHT - MARGIN_BOTTOM)
    ticks = E.g(*[_text(plot.x(t), HEIGHT - MARGIN_BOTTOM + 18, '{:.2f}'.format(t)) for t in _ticks(0.0, plot.xmax)])
    return _document(title, panels, axis, ticks, _text((plot.left + plot.right) / 2.0, HEIGHT - 15, 'Betweenness'))


def render(figure):
    """Render a :class:`Figure` and write it to its path."""
    if figure.kind == 'ci_scatter':
        svg = render_ci_scatter(figure.data, title=figure.title)
    elif figure.kind == 'series_lines':
        svg = render_series(figure.data, title=figure.title)
    elif figure.kind == 'layer_bars':
        svg = render_layer_bars(figure.data, title=figure.title)
    else:
        raise InputError('Unknown figure kind: {}'.format(figure.kind))
    with open(figure.path, 'wb') as f:
        f.write(svg)
    logger.info('Wrote %s to %s', figure.kind, figure.path)
    return svg


def _heading(title, underline='-'):
    return [title, underline * len(title)]


def _cell(value, fmt='{:.4f}'):
    return '-' if value is None else fmt.format(value)


def _metrics_section(rows):
    lines = _heading('Group metrics per window')
    lines.append('{:<24} {:>8} {:>8} {:>8} {:>8} {:>8}'.format('window', 'density', 'c/p', 'GBC', 'GDC', 'AWVCI'))
    for row in rows:
        lines.append('{:<24} {:>8} {:>8} {:>8} {:>8} {:>8}'.format(
            row.window.label, *[_cell(row.value(name)) for name in METRIC_COLUMNS]))
        for name, reason in row.reasons.items():
            lines.append('    {} absent: {}'.format(name, reason))
    return lines


def _correlations_section(correlations):
    lines = _heading('Correlation with performance')
    lines.append('{:<16} {:>8} {:>8} {:>4}'.format('metric', 'r', 'p', 'n'))
    for c in correlations:
        if c.r is None:
            lines.append('{:<16} {:>8} {:>8} {:>4}  ({})'.format(c.metric, '-', '-', c.n, c.reason))
            continue
        mark = '*' if c.significant else ''
        lines.append('{:<16} {:>8} {:>8} {:>4}'.format(
            c.metric, '{:.2f}{}'.format(c.r, mark), '{:.3f}'.format(c.p_two_tailed), c.n))
    lines.append('* significant at the configured alpha')
    return lines


def _rankings_section(rankings):
    lines = _heading('Key individuals per network')
    for label, ranked in rankings.items():
        actors = ', '.join(actor for actor, score in ranked.entries)
        lines.append('{}: {}'.format(label, actors))
    return lines


def _oscillation_section(series_set):
    lines = _heading('Betweenness oscillation')
    lines.append('group oscillation: {:.4f}'.format(group_oscillation(series_set)))
    for actor in sorted(series_set):
        s = series_set[actor]
        lines.append('{:<16} reversals {:>3}  normalized {:.4f}'.format(
            actor, oscillation(s), normalized_oscillation(s)))
    return lines


def _barriers_section(barriers):
    lines = _heading('Barriers to collaboration')
    for i, (barrier, mean) in enumerate(barriers, start=1):
        lines.append('{:>2}. {:<32} {:.2f}'.format(i, barrier, mean))
    return lines


def _platforms_section(platforms):
    lines = _heading('Collaboration platforms')
    for platform, count in platforms:
        lines.append('{:<12} {:>6}'.format(platform, count))
    return lines


def _channels_section(channels):
    lines = _heading('Channel activity')
    for channel, usage in channels.items():
        lines.append('{:<12} {:>8} messages {:>6} senders'.format(channel, usage.messages, usage.senders))
    return lines


def mirror_report(rows=None, correlations=None, rankings=None, oscillation=None, barriers=None,
                  platforms=None, channels=None):
    """Plain-text report with a fixed section order.

    Sections without input are listed at the end as not available.
    """
    sections = [
        ('Group metrics per window', rows, _metrics_section),
        ('Correlation with performance', correlations, _correlations_section),
        ('Key individuals per network', rankings, _rankings_section),
        ('Betweenness oscillation', oscillation, _oscillation_section),
        ('Barriers to collaboration', barriers, _barriers_section),
        ('Collaboration platforms', platforms, _platforms_section),
        ('Channel activity', channels, _channels_section),
    ]
    if not any(data for title, data, builder in sections):
        raise InputError('Nothing to report: every input is empty')
    lines = _heading('Virtual mirror report', '=')
    missing = []
    for title, data, builder in sections:
        if not data:
            missing.append(title)
            continue
        lines.append('')
        lines.extend(builder(data))
    if missing:
        lines.append('')
        lines.extend(_heading('Not available'))
        lines.extend('- {}'.format(title) for title in missing)
    return '\n'.join(lines) + '\n'
