import io
import os
import tempfile
import unittest

import pytest

from virtualmirror.config import DEFAULTS, config_schema, load_settings, parse_config, validate_settings
from virtualmirror.exceptions import ConfigError, InputError


class TestParseConfig(unittest.TestCase):

    def test_typed_values(self):
        settings = parse_config(io.BytesIO(
            b'# analysis settings\n'
            b'seed = 7\n'
            b'\n'
            b'alpha=0.2\n'
            b'directed = yes\n'
            b'scope = core_plus_peer\n'
            b'channels = email, im\n'
            b'fractions = 0.25,0.5, 1\n'
        ))
        self.assertEqual(dict(settings), {
            'seed': 7,
            'alpha': 0.2,
            'directed': True,
            'scope': 'core_plus_peer',
            'channels': ['email', 'im'],
            'fractions': [0.25, 0.5, 1.0],
        })

    def test_boolean_words(self):
        self.assertIs(parse_config('nested = off\n')['nested'], False)
        self.assertIs(parse_config('nested = TRUE\n')['nested'], True)
        with self.assertRaisesRegex(ConfigError, 'expects true or false'):
            parse_config('nested = maybe\n')

    def test_unknown_key(self):
        with self.assertRaisesRegex(ConfigError, r"line 2: unknown setting 'colour'"):
            parse_config('seed = 1\ncolour = blue\n', 'run.cfg')

    def test_not_key_value(self):
        with self.assertRaisesRegex(ConfigError, 'expected key=value'):
            parse_config('seed 1\n')

    def test_wrong_type(self):
        with self.assertRaisesRegex(ConfigError, 'restarts expects a integer'):
            parse_config('restarts = many\n')

    def test_schema_messages(self):
        with self.assertRaisesRegex(ConfigError, r'alpha: alpha must lie in \(0, 1\)'):
            parse_config('alpha = 1.5\n')
        with self.assertRaisesRegex(ConfigError, 'unknown core/periphery method'):
            parse_config('core_periphery_method = spectral\n')
        with self.assertRaisesRegex(ConfigError, 'unknown channel'):
            parse_config('channels = email, pigeon\n')
        with self.assertRaisesRegex(ConfigError, r'sampling fraction must lie in \(0, 1\]'):
            parse_config('fractions = 0.5, 0\n')

    def test_config_error_is_input_error(self):
        with self.assertRaises(InputError):
            parse_config('min_edge_weight = 0\n')


@pytest.mark.parametrize('settings', [
    {'frequency_min': 4, 'frequency_max': 2},
    {'seed': -1},
    {'trials': 0},
    {'in_group_bias': 1.5},
    {'scope': 'everyone'},
])
def test_validate_rejects(settings):
    with pytest.raises(ConfigError):
        validate_settings(settings)


def test_defaults_are_valid():
    validate_settings(dict((k, v) for k, v in DEFAULTS.items() if v is not None))
    assert set(DEFAULTS) == set(config_schema()['properties'])


class TestLoadSettings(unittest.TestCase):

    def test_defaults(self):
        settings = load_settings()
        self.assertEqual(settings['seed'], 42)
        self.assertEqual(settings['restarts'], 50)
        self.assertEqual(settings['alpha'], 0.10)
        self.assertEqual(settings['fractions'], [0.05, 0.1, 0.15, 0.2, 0.25, 0.5, 0.75, 1.0])
        self.assertIs(settings['infer_corecipients'], False)
        self.assertIs(settings['nested'], False)

    def test_precedence(self):
        with tempfile.NamedTemporaryFile('w', suffix='.cfg', delete=False) as f:
            f.write('seed = 3\nrestarts = 10\n')
            path = f.name
        self.addCleanup(os.remove, path)
        settings = load_settings(path, {'seed': 99, 'restarts': None, 'k': 5})
        self.assertEqual(settings['seed'], 99)
        self.assertEqual(settings['restarts'], 10)
        self.assertEqual(settings['k'], 5)
        self.assertEqual(settings['min_edge_weight'], 1)

    def test_invalid_override(self):
        with self.assertRaisesRegex(ConfigError, 'alpha must lie'):
            load_settings(overrides={'alpha': 0.0})

    def test_missing_file(self):
        with self.assertRaisesRegex(ConfigError, 'Cannot read config file'):
            load_settings('/nonexistent/virtualmirror.cfg')
