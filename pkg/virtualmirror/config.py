"""Settings from built-in defaults, an optional key=value file and CLI flags."""
from collections import OrderedDict
import json
import logging
import os

from jsonschema import Draft7Validator, FormatChecker

from .exceptions import ConfigError
from .ingest import read_text

logger = logging.getLogger(__name__)

thisdir = os.path.dirname(os.path.abspath(__file__))

DEFAULTS = OrderedDict([
    ('seed', 42),
    ('restarts', 50),
    ('core_periphery_method', 'auto'),
    ('min_edge_weight', 1),
    ('windows', None),
    ('scope', 'ecosystem'),
    ('top_n', None),
    ('channels', None),
    ('directed', False),
    ('alpha', 0.10),
    ('k', 10),
    ('highlight_top', 10),
    ('frequency_min', 1),
    ('frequency_max', 5),
    ('min_frequency', 1),
    ('n_actors', 42),
    ('n_messages', 5000),
    ('mean_recipients', 3.0),
    ('recipient_dispersion', 1.0),
    ('group_count', 3),
    ('in_group_bias', 0.8),
    ('trials', 30),
    ('fractions', [0.05, 0.1, 0.15, 0.2, 0.25, 0.5, 0.75, 1.0]),
    ('infer_corecipients', False),
    ('nested', False),
])

TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')

_schema = None


def config_schema():
    global _schema
    if _schema is None:
        with open(os.path.join(thisdir, 'schemas', 'config.schema.json'), 'r') as f:
            _schema = json.load(f)
    return _schema


def _coerce_scalar(text, json_type, key, line_no, source):
    try:
        if json_type == 'integer':
            return int(text)
        if json_type == 'number':
            return float(text)
    except ValueError:
        raise ConfigError('{} line {}: {} expects a {}, got {!r}'.format(source, line_no, key, json_type, text))
    if json_type == 'boolean':
        if text.lower() in TRUE_WORDS:
            return True
        if text.lower() in FALSE_WORDS:
            return False
        raise ConfigError('{} line {}: {} expects true or false, got {!r}'.format(source, line_no, key, text))
    return text


def _coerce(key, text, source, line_no):
    properties = config_schema()['properties']
    if key not in properties:
        raise ConfigError('{} line {}: unknown setting {!r}'.format(source, line_no, key))
    prop = properties[key]
    if prop.get('type') == 'array':
        item_type = prop['items'].get('type', 'string')
        return [_coerce_scalar(item.strip(), item_type, key, line_no, source)
                for item in text.split(',') if item.strip()]
    return _coerce_scalar(text, prop.get('type', 'string'), key, line_no, source)


def parse_config(stream, source='config'):
    """Read a ``key=value`` settings file into a dict of typed values.

    Blank lines and lines starting with ``#`` are skipped. Values are typed
    after the settings schema; lists are comma separated.
    """
    text = read_text(stream, source)
    settings = OrderedDict()
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError('{} line {}: expected key=value, got {!r}'.format(source, line_no, line))
        key, value = [part.strip() for part in line.split('=', 1)]
        settings[key] = _coerce(key, value, source, line_no)
    validate_settings(settings)
    return settings


def validate_settings(settings):
    validator = Draft7Validator(config_schema(), format_checker=FormatChecker())
    errors = sorted(validator.iter_errors(dict(settings)), key=lambda e: list(e.path))
    if errors:
        error = errors[0]
        reason = error.schema.get('error_msg', error.message) if isinstance(error.schema, dict) else error.message
        where = '.'.join(str(p) for p in error.path) or 'settings'
        raise ConfigError('{}: {} ({!r})'.format(where, reason, error.instance))
    if settings.get('frequency_min', 1) > settings.get('frequency_max', 5):
        raise ConfigError('frequency_min must not exceed frequency_max')


def load_settings(config_path=None, overrides=None):
    """Defaults, then the config file, then explicit overrides.

    ``None`` values in ``overrides`` mean the flag was not given.
    """
    settings = OrderedDict(DEFAULTS)
    if config_path is not None:
        try:
            with open(config_path, 'rb') as f:
                from_file = parse_config(f, config_path)
        except OSError as ex:
            raise ConfigError('Cannot read config file {}: {}'.format(config_path, ex.strerror))
        logger.info('Read %d setting(s) from %s', len(from_file), config_path)
        settings.update(from_file)
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    validate_settings(OrderedDict((k, v) for k, v in settings.items() if v is not None))
    return settings
