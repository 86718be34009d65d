from collections import OrderedDict, namedtuple
import csv
import datetime as dt
import hashlib
import hmac
import io
import json
import logging
import math
import os

from jsonschema import Draft7Validator, FormatChecker

from .exceptions import InputError, ParseError

logger = logging.getLogger(__name__)

thisdir = os.path.dirname(os.path.abspath(__file__))

CHANNELS = ('email', 'social', 'content', 'im', 'webconf', 'f2f', 'video')
RELATIONS = ('people_finding', 'collaboration', 'advice', 'personal', 'innovation')
WORK_TYPES = ('office', 'remote')
SCOPES = ('core', 'peer', 'ecosystem')
EVENT_FORMATS = ('jsonl', 'csv_edges')

DEFAULT_FREQUENCY_RANGE = (1, 5)

InteractionEvent = namedtuple('InteractionEvent', ['ts', 'sender', 'recipients', 'channel', 'msg_id'],
                              defaults=('email', None))
ActorAttrs = namedtuple('ActorAttrs', ['longevity_org', 'longevity_group', 'work_type', 'location', 'scope'],
                        defaults=(None, None, None, None, 'ecosystem'))
SurveyResponse = namedtuple('SurveyResponse', ['ego', 'alter', 'relation', 'frequency', 'platforms'])
BarrierRating = namedtuple('BarrierRating', ['respondent', 'barrier', 'score'])
KpiPoint = namedtuple('KpiPoint', ['window_start', 'window_end', 'value', 'label'], defaults=('CFU',))


class KpiSeries(namedtuple('KpiSeries', ['points'])):
    """Performance indicator values per window, sorted by window start.

    ``window_end`` is exclusive, the same convention used for graph windows.
    """

    @property
    def values(self):
        return [p.value for p in self.points]

    @property
    def label(self):
        return self.points[0].label if self.points else 'CFU'


def read_text(stream, source):
    if isinstance(stream, (bytes, bytearray)):
        data = bytes(stream)
    elif isinstance(stream, str):
        return stream
    else:
        data = stream.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode('utf-8-sig')
    except UnicodeDecodeError as ex:
        raise ParseError(source, None, 'stream is not valid UTF-8 ({})'.format(ex.reason))


def parse_timestamp(value):
    """Parse an ISO-8601 instant into an aware UTC datetime at second resolution.

    Naive timestamps are taken to be UTC already.
    """
    text = value.strip()
    if text.endswith('Z') or text.endswith('z'):
        text = text[:-1] + '+00:00'
    ts = dt.datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc).replace(microsecond=0)


def format_timestamp(ts):
    return ts.astimezone(dt.timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


def parse_instant(value):
    """Parse a window bound: a plain date means midnight UTC."""
    text = value.strip()
    if len(text) == 10:
        day = dt.date.fromisoformat(text)
        return dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc)
    return parse_timestamp(text)


def format_instant(ts):
    ts = ts.astimezone(dt.timezone.utc)
    if (ts.hour, ts.minute, ts.second) == (0, 0, 0):
        return ts.date().isoformat()
    return format_timestamp(ts)


def _load_schema(name):
    with open(os.path.join(thisdir, 'schemas', name), 'r') as f:
        return json.load(f)


_event_validator = None


def event_validator():
    global _event_validator
    if _event_validator is None:
        _event_validator = Draft7Validator(_load_schema('event.schema.json'), format_checker=FormatChecker())
    return _event_validator


def _schema_reason(error):
    try:
        msg = error.schema['error_msg']
    except KeyError:
        return error.message
    return '{}: {!r}'.format(msg, error.instance)


def _check_actor(actor, source, line_no, what):
    if actor is None or actor.strip() == '':
        raise ParseError(source, line_no, 'empty {} id'.format(what))
    return actor.strip()


def _parse_jsonl(text, source):
    validator = event_validator()
    events = []
    # Records end at '\n' only; ids may hold other Unicode line separators
    for line_no, line in enumerate(text.split('\n'), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as ex:
            raise ParseError(source, line_no, 'invalid JSON ({})'.format(ex.msg))
        if not isinstance(record, dict):
            raise ParseError(source, line_no, 'record is not an object')
        errors = sorted(validator.iter_errors(record), key=lambda e: (list(e.path), str(e)))
        if errors:
            raise ParseError(source, line_no, _schema_reason(errors[0]))
        try:
            ts = parse_timestamp(record['ts'])
        except ValueError:
            raise ParseError(source, line_no, 'invalid timestamp {!r}'.format(record['ts']))
        sender = _check_actor(record['from'], source, line_no, 'sender')
        recipients = tuple(_check_actor(r, source, line_no, 'recipient') for r in record['to'])
        events.append(InteractionEvent(ts, sender, recipients, record.get('channel', 'email'), record.get('id')))
    return events


def dict_reader(text, source, required):
    reader = csv.DictReader(io.StringIO(text))
    fieldnames = [x.strip() for x in (reader.fieldnames or [])]
    if reader.fieldnames is None:
        return reader, []
    reader.fieldnames = fieldnames
    missing = [x for x in required if x not in fieldnames]
    if missing:
        raise ParseError(source, 1, 'missing columns: {}'.format(', '.join(missing)))
    return reader, fieldnames


def _parse_csv_edges(text, source):
    reader, fieldnames = dict_reader(text, source, ('ts', 'from', 'to'))
    events = []
    for row in reader:
        line_no = reader.line_num
        if row.get('to') is None or row['to'].strip() == '':
            raise ParseError(source, line_no, 'recipients empty')
        try:
            ts = parse_timestamp(row['ts'] or '')
        except ValueError:
            raise ParseError(source, line_no, 'invalid timestamp {!r}'.format(row['ts']))
        channel = (row.get('channel') or 'email').strip()
        if channel not in CHANNELS:
            raise ParseError(source, line_no, 'unknown channel: {!r}'.format(channel))
        sender = _check_actor(row['from'], source, line_no, 'sender')
        recipient = _check_actor(row['to'], source, line_no, 'recipient')
        events.append(InteractionEvent(ts, sender, (recipient,), channel, None))
    return events


def parse_events(stream, format='jsonl', source='events'):
    """Parse interaction events from a UTF-8 byte stream.

    :param stream: bytes, str or a file-like object
    :param format: ``jsonl`` or ``csv_edges``
    :returns: list of :class:`InteractionEvent` in input order
    :raises ParseError: on the first malformed record
    """
    if format not in EVENT_FORMATS:
        raise InputError('Unknown event format: {}'.format(format))
    text = read_text(stream, source)
    if format == 'jsonl':
        events = _parse_jsonl(text, source)
    else:
        events = _parse_csv_edges(text, source)
    logger.debug('Parsed %d events from %s', len(events), source)
    return events


def serialize_events(events, format='jsonl'):
    """Write events in one of the parseable formats and return the bytes."""
    out = io.StringIO()
    if format == 'jsonl':
        for ev in events:
            record = OrderedDict()
            record['ts'] = format_timestamp(ev.ts)
            record['from'] = ev.sender
            record['to'] = list(ev.recipients)
            record['channel'] = ev.channel
            if ev.msg_id is not None:
                record['id'] = ev.msg_id
            out.write(json.dumps(record, ensure_ascii=False))
            out.write('\n')
    elif format == 'csv_edges':
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['ts', 'from', 'to', 'channel'])
        for ev in events:
            for r in ev.recipients:
                writer.writerow([format_timestamp(ev.ts), ev.sender, r, ev.channel])
    else:
        raise InputError('Unknown event format: {}'.format(format))
    return out.getvalue().encode('utf-8')


def _parse_int_in_range(value, name, bounds, source, line_no):
    try:
        number = int(str(value).strip())
    except (TypeError, ValueError):
        raise ParseError(source, line_no, '{} is not an integer: {!r}'.format(name, value))
    if number < bounds[0] or number > bounds[1]:
        raise ParseError(source, line_no, '{} {} outside {}..{}'.format(name, number, bounds[0], bounds[1]))
    return number


def parse_responses(stream, frequency_range=DEFAULT_FREQUENCY_RANGE, source='survey'):
    """Parse name-generator survey rows.

    Duplicate (ego, alter, relation) rows merge into one response with the
    maximum frequency and the union of platforms. The result is grouped by
    relation, then sorted by ego and alter.
    """
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ('ego', 'alter', 'relation', 'frequency'))
    merged = OrderedDict()
    for row in reader:
        line_no = reader.line_num
        ego = _check_actor(row['ego'], source, line_no, 'ego')
        alter = _check_actor(row['alter'], source, line_no, 'alter')
        if ego == alter:
            raise ParseError(source, line_no, 'self-nomination of {}'.format(ego))
        relation = (row['relation'] or '').strip()
        if relation not in RELATIONS:
            raise ParseError(source, line_no, 'unknown relation: {!r}'.format(relation))
        frequency = _parse_int_in_range(row['frequency'], 'frequency', frequency_range, source, line_no)
        platforms = set()
        for token in (row.get('platforms') or '').split(';'):
            token = token.strip()
            if not token:
                continue
            if token not in CHANNELS:
                raise ParseError(source, line_no, 'unknown platform: {!r}'.format(token))
            platforms.add(token)
        key = (ego, alter, relation)
        if key in merged:
            prev = merged[key]
            frequency = max(frequency, prev.frequency)
            platforms |= prev.platforms
        merged[key] = SurveyResponse(ego, alter, relation, frequency, frozenset(platforms))
    return sorted(merged.values(), key=lambda r: (RELATIONS.index(r.relation), r.ego, r.alter))


def _parse_months(value, name, source, line_no):
    if value is None or value.strip() == '':
        return None
    try:
        months = float(value)
    except ValueError:
        raise ParseError(source, line_no, '{} is not a number: {!r}'.format(name, value))
    if months < 0 or not math.isfinite(months):
        raise ParseError(source, line_no, '{} must be >= 0 months: {}'.format(name, value))
    return months


def parse_attributes(stream, source='attributes'):
    """Parse the actor attribute table into a dict keyed by actor id."""
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ('actor',))
    attrs = OrderedDict()
    for row in reader:
        line_no = reader.line_num
        actor = _check_actor(row['actor'], source, line_no, 'actor')
        work_type = (row.get('work_type') or '').strip() or None
        if work_type is not None and work_type not in WORK_TYPES:
            raise ParseError(source, line_no, 'unknown work_type: {!r}'.format(work_type))
        scope = (row.get('scope') or '').strip()
        if scope not in SCOPES:
            if scope:
                logger.warning('%s line %d: unknown scope %r treated as ecosystem', source, line_no, scope)
            scope = 'ecosystem'
        attrs[actor] = ActorAttrs(
            _parse_months(row.get('longevity_org'), 'longevity_org', source, line_no),
            _parse_months(row.get('longevity_group'), 'longevity_group', source, line_no),
            work_type,
            (row.get('location') or '').strip() or None,
            scope
        )
    return attrs


def parse_barriers(stream, score_range=DEFAULT_FREQUENCY_RANGE, source='barriers'):
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ('respondent', 'barrier', 'score'))
    ratings = []
    for row in reader:
        line_no = reader.line_num
        respondent = _check_actor(row['respondent'], source, line_no, 'respondent')
        barrier = (row['barrier'] or '').strip()
        if not barrier:
            raise ParseError(source, line_no, 'empty barrier label')
        score = _parse_int_in_range(row['score'], 'score', score_range, source, line_no)
        ratings.append(BarrierRating(respondent, barrier, score))
    return ratings


def parse_survey(stream, attributes=None, barriers=None, frequency_range=DEFAULT_FREQUENCY_RANGE):
    """Parse the survey exports.

    :param stream: responses CSV (ego,alter,relation,frequency,platforms)
    :param attributes: optional attributes CSV stream
    :param barriers: optional barriers CSV stream
    :returns: (responses, barrier ratings, attributes by actor)
    """
    responses = parse_responses(stream, frequency_range)
    ratings = [] if barriers is None else parse_barriers(barriers, frequency_range)
    attrs = OrderedDict() if attributes is None else parse_attributes(attributes)
    return responses, ratings, attrs


def parse_number(value):
    """Parse a real number, accepting a decimal comma (``71,8``)."""
    text = value.strip()
    if ',' in text and '.' not in text:
        text = text.replace(',', '.')
    number = float(text)
    if not math.isfinite(number):
        raise ValueError('not finite')
    return number


def parse_kpi(stream, label='CFU', source='kpi'):
    """Parse a KPI series CSV with columns window_start,window_end,value.

    Rows may come in any order; the series is returned sorted by start.
    ``window_end`` is exclusive.
    """
    text = read_text(stream, source)
    reader, fieldnames = dict_reader(text, source, ('window_start', 'window_end', 'value'))
    points = []
    for row in reader:
        line_no = reader.line_num
        try:
            start = dt.date.fromisoformat((row['window_start'] or '').strip())
            end = dt.date.fromisoformat((row['window_end'] or '').strip())
        except ValueError:
            raise ParseError(source, line_no, 'invalid window dates {!r}, {!r}'.format(
                row['window_start'], row['window_end']))
        if not start < end:
            raise ParseError(source, line_no, 'window_start must precede window_end')
        try:
            value = parse_number(row['value'] or '')
        except ValueError:
            raise ParseError(source, line_no, 'non-numeric value: {!r}'.format(row['value']))
        points.append(KpiPoint(start, end, value, row.get('label') or label))
    points.sort(key=lambda p: p.window_start)
    for prev, cur in zip(points, points[1:]):
        if cur.window_start < prev.window_end:
            raise ParseError(source, None, 'windows overlap: {}..{} and {}..{}'.format(
                prev.window_start, prev.window_end, cur.window_start, cur.window_end))
    return KpiSeries(tuple(points))


def anonymize(events, salt):
    """Replace actor ids with deterministic pseudonyms.

    Pseudonyms ``A-0001``, ``A-0002``, ... are handed out in ascending order
    of the HMAC-SHA256 of each id keyed by ``salt``, so the assignment does
    not reveal the order in which actors appear in the input.

    :returns: (pseudonymized events, OrderedDict pseudonym -> original id)
    """
    if not salt:
        raise InputError('Anonymization salt must not be empty')
    if isinstance(salt, str):
        salt = salt.encode('utf-8')
    actors = set()
    for ev in events:
        actors.add(ev.sender)
        actors.update(ev.recipients)

    def keyed_hash(actor):
        return hmac.new(salt, actor.encode('utf-8'), hashlib.sha256).hexdigest()

    ordered = sorted(actors, key=lambda a: (keyed_hash(a), a))
    width = max(4, len(str(len(ordered))))
    pseudonyms = {actor: 'A-{:0{}d}'.format(i, width) for i, actor in enumerate(ordered, start=1)}
    mapping = OrderedDict((pseudonyms[a], a) for a in ordered)
    anonymized = [
        ev._replace(sender=pseudonyms[ev.sender], recipients=tuple(pseudonyms[r] for r in ev.recipients))
        for ev in events
    ]
    return anonymized, mapping


def write_mapping(mapping, outfile):
    writer = csv.writer(outfile, lineterminator='\n')
    writer.writerow(['pseudonym', 'original'])
    for pseudonym, original in mapping.items():
        writer.writerow([pseudonym, original])
