# Licensed under a 3-clause BSD style license - see LICENSE.rst
"""
Experiment configuration files.

A configuration is a TOML document::

    schema_version = "1.0"
    defaults = "v1"

    [experiment]
    kind = "filter_stability"
    seed = 20240101
    replicas = 20
    horizon = 200

    [model]
    fixture = "mixing3_hmm"   # or: name = "heat"

    [model.params]

    [parameters]
    threshold = 0.1

    [output]
    formats = ["csv"]
    plot = true

Every problem found is reported with the line it comes from, and all of
them are raised together as one `~ergolab.exceptions.ConfigError`.
"""
import glob
import os
import re
from dataclasses import dataclass, field

from packaging.version import InvalidVersion, Version

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..conf import AVAILABLE, load_defaults
from ..exceptions import ConfigError
from ..models import FIXTURES, MODELS, check_forcing_set
from .experiments import EXPERIMENTS, build_target, target_category
from .records import FORMATS

__all__ = ['SCHEMA_VERSION', 'ExperimentConfig', 'load_config',
           'parse_override', 'example_configs', 'example_path']

SCHEMA_VERSION = Version('1.0')

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'data')

_TOP = ('schema_version', 'defaults', 'experiment', 'model', 'parameters',
        'output')
_EXPERIMENT = ('kind', 'seed', 'name', 'replicas', 'horizon')
_OUTPUT = ('dir', 'formats', 'plot')

_HEADER = re.compile(r'^\s*\[\s*([A-Za-z0-9_.\- ]+?)\s*\]\s*(#.*)?$')
_KEY = re.compile(r'^\s*([A-Za-z0-9_.\-]+)\s*=')
_DECODE_LINE = re.compile(r'at line (\d+)')


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A validated experiment configuration with every default filled in."""

    kind: str
    name: str
    seed: int
    replicas: int
    horizon: int
    source: str
    target: str
    target_params: dict
    parameters: dict
    out_dir: str = None
    formats: tuple = ('csv',)
    plot: bool = False
    defaults: str = 'v1'
    schema_version: str = str(SCHEMA_VERSION)
    path: str = None
    defaults_table: dict = field(default=None, repr=False)

    @property
    def experiment(self):
        return EXPERIMENTS[self.kind]


def example_configs():
    """``{name: path}`` for the example configurations shipped as data."""
    paths = glob.glob(os.path.join(DATA_DIR, '*.toml'))
    return {os.path.splitext(os.path.basename(p))[0]: p
            for p in sorted(paths)}


def example_path(name):
    try:
        return example_configs()[name]
    except KeyError:
        raise ValueError("No example configuration named {0!r}".format(
            name)) from None


class _Locator:
    """Line numbers of the tables and keys of a TOML text."""

    def __init__(self, text, source, overrides=()):
        self.source = source
        self.lines = {}
        self.overrides = set(overrides)
        table = ()
        for number, line in enumerate(text.splitlines(), start=1):
            header = _HEADER.match(line)
            if header:
                table = tuple(part.strip()
                              for part in header.group(1).split('.'))
                self.lines.setdefault('.'.join(table), number)
                continue
            key = _KEY.match(line)
            if key:
                path = table + tuple(key.group(1).split('.'))
                self.lines.setdefault('.'.join(path), number)

    def __call__(self, key, message):
        if key in self.overrides:
            return '{0}: --set {1}: {2}'.format(self.source, key, message)
        parts = key.split('.') if key else []
        while parts:
            line = self.lines.get('.'.join(parts))
            if line is not None:
                return '{0}:{1}: {2}'.format(self.source, line, message)
            parts.pop()
        return '{0}: {1}'.format(self.source, message)


def parse_override(text):
    """
    Split ``KEY=VALUE``; the value is read as a TOML value when it parses
    as one and kept as a string otherwise.

    >>> parse_override('experiment.horizon=50')
    ('experiment.horizon', 50)
    >>> parse_override('model.name=heat')
    ('model.name', 'heat')
    """
    key, sep, raw = text.partition('=')
    key = key.strip()
    if not sep or not key:
        raise ConfigError("--set {0}: expected KEY=VALUE".format(text))
    try:
        value = tomllib.loads('value = ' + raw.strip())['value']
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


def _apply_override(data, key, value):
    node = data
    parts = key.split('.')
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError("--set {0}: {1} is not a table".format(
                key, part))
        node = child
    node[parts[-1]] = value


def _coerce(value, kind):
    """Return ``(ok, value)`` for a parameter of type ``kind``."""
    number = (int, float)
    if kind == 'int':
        return isinstance(value, int) and not isinstance(value, bool), value
    if kind == 'float':
        ok = isinstance(value, number) and not isinstance(value, bool)
        return ok, float(value) if ok else value
    if kind == 'bool':
        return isinstance(value, bool), value
    if kind == 'str':
        return isinstance(value, str), value
    if kind == 'int-list':
        ok = isinstance(value, list) and all(
            isinstance(v, int) and not isinstance(v, bool) for v in value)
        return ok, tuple(value) if ok else value
    if kind == 'float-list':
        ok = isinstance(value, list) and all(
            isinstance(v, number) and not isinstance(v, bool) for v in value)
        return ok, tuple(float(v) for v in value) if ok else value
    if kind == 'float-table':
        ok = isinstance(value, list) and all(
            _coerce(row, 'float-list')[0] for row in value)
        return ok, tuple(_coerce(row, 'float-list')[1]
                         for row in value) if ok else value
    raise ValueError("Unknown parameter type {0!r}".format(kind))


def _unknown(table, allowed, where, problems):
    for key in table:
        if key not in allowed:
            problems.append((where + '.' + key if where else key,
                             "Unknown key {0!r}{1}".format(
                                 key, ' in [{0}]'.format(where)
                                 if where else '')))


def _table(data, key, problems, required=True):
    value = data.get(key, {} if not required else None)
    if value is None:
        problems.append((key, "Missing required table [{0}]".format(key)))
        return {}
    if not isinstance(value, dict):
        problems.append((key, "{0} must be a table".format(key)))
        return {}
    return value


def _int_field(table, where, key, default, problems, minimum=1):
    value = table.get(key, default)
    if value is None:
        problems.append((where, "{0}.{1} is required".format(where, key)))
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append((where + '.' + key,
                         "{0}.{1} must be an integer".format(where, key)))
        return None
    if value < minimum:
        problems.append((where + '.' + key, "{0}.{1} must be at least {2}"
                         .format(where, key, minimum)))
        return None
    return value


def _check_header(data, problems):
    _unknown(data, _TOP, '', problems)
    version = data.get('schema_version')
    if version is None:
        problems.append(('schema_version', "schema_version is required"))
    else:
        try:
            parsed = Version(str(version))
        except InvalidVersion:
            problems.append(('schema_version',
                             "schema_version {0!r} is not a version".format(
                                 version)))
        else:
            if parsed.major != SCHEMA_VERSION.major:
                problems.append(('schema_version',
                                 "schema_version {0} is not supported "
                                 "(supported: {1}.x)".format(
                                     version, SCHEMA_VERSION.major)))
    defaults = data.get('defaults', AVAILABLE[-1])
    if defaults not in AVAILABLE:
        problems.append(('defaults', "Unknown defaults version {0!r}; "
                         "available: {1}".format(defaults,
                                                 ', '.join(AVAILABLE))))
        defaults = AVAILABLE[-1]
    return str(version), defaults


def _check_model(data, defaults_table, problems):
    model = _table(data, 'model', problems)
    _unknown(model, ('fixture', 'name', 'params'), 'model', problems)
    params = model.get('params', {})
    if not isinstance(params, dict):
        problems.append(('model.params', "model.params must be a table"))
        params = {}
    if ('fixture' in model) == ('name' in model):
        if model or 'model' in data:
            problems.append(('model', "[model] needs exactly one of "
                             "'fixture' or 'name'"))
        return None, None, params
    if 'fixture' in model:
        source, target = 'fixture', model['fixture']
        if target not in FIXTURES:
            problems.append(('model.fixture', "Unknown fixture {0!r}; known "
                             "fixtures: {1}".format(
                                 target, ', '.join(sorted(FIXTURES)))))
            return None, None, params
    else:
        source, target = 'model', model['name']
        if target not in MODELS:
            problems.append(('model.name', "Unknown model {0!r}; known "
                             "models: {1}".format(
                                 target, ', '.join(sorted(MODELS)))))
            return None, None, params
    if target == 'navier_stokes':
        ns = defaults_table['NAVIER_STOKES']
        forced = params.get('forced', ns['forced'])
        k_max = params.get('k_max', ns['k_max'])
        try:
            issues = check_forcing_set(forced, (2 * int(k_max)) // 3)
        except (TypeError, ValueError):
            issues = ["forced must be a list of integer pairs"]
        for issue in issues:
            problems.append(('model.params.forced', issue))
    return source, target, params


def _check_parameters(data, experiment, defaults_table, problems):
    table = _table(data, 'parameters', problems, required=False)
    spec = experiment.parameters
    _unknown(table, spec, 'parameters', problems)
    resolved = {}
    for name, param in spec.items():
        if name not in table:
            resolved[name] = param.resolve_default(defaults_table)
            continue
        ok, value = _coerce(table[name], param.type)
        if not ok:
            problems.append(('parameters.' + name,
                             "parameters.{0} must be of type {1}".format(
                                 name, param.type)))
            continue
        if param.choices is not None and value not in param.choices:
            problems.append(('parameters.' + name,
                             "parameters.{0} must be one of {1}".format(
                                 name, ', '.join(param.choices))))
            continue
        resolved[name] = value
    return resolved


def _check_output(data, problems):
    table = _table(data, 'output', problems, required=False)
    _unknown(table, _OUTPUT, 'output', problems)
    formats = table.get('formats', ['csv'])
    if (not isinstance(formats, list) or not formats
            or any(f not in FORMATS for f in formats)):
        problems.append(('output.formats', "output.formats must list some "
                         "of: {0}".format(', '.join(FORMATS))))
        formats = ['csv']
    plot = table.get('plot', False)
    if not isinstance(plot, bool):
        problems.append(('output.plot', "output.plot must be true or false"))
        plot = False
    out_dir = table.get('dir')
    if out_dir is not None and not isinstance(out_dir, str):
        problems.append(('output.dir', "output.dir must be a string"))
        out_dir = None
    return out_dir, tuple(dict.fromkeys(formats)), plot


def _validate(data, source):
    problems = []
    version, defaults = _check_header(data, problems)
    defaults_table = load_defaults(defaults)

    exp = _table(data, 'experiment', problems)
    _unknown(exp, _EXPERIMENT, 'experiment', problems)
    kind = exp.get('kind')
    experiment = None
    if kind is None:
        if 'experiment' in data:
            problems.append(('experiment', "experiment.kind is required"))
    elif kind not in EXPERIMENTS:
        problems.append(('experiment.kind', "Unknown experiment kind {0!r}; "
                         "known kinds: {1}".format(
                             kind, ', '.join(EXPERIMENTS))))
    else:
        experiment = EXPERIMENTS[kind]
    seed = _int_field(exp, 'experiment', 'seed', None, problems, minimum=0)
    replicas = _int_field(exp, 'experiment', 'replicas', 1, problems)
    horizon = None
    if experiment is not None:
        horizon = _int_field(exp, 'experiment', 'horizon',
                             experiment.default_horizon(defaults_table),
                             problems)
    name = exp.get('name', kind)
    if name is not None and not isinstance(name, str):
        problems.append(('experiment.name', "experiment.name must be a "
                         "string"))

    model_source, target, target_params = _check_model(data, defaults_table,
                                                       problems)
    parameters = {}
    if experiment is not None:
        parameters = _check_parameters(data, experiment, defaults_table,
                                       problems)
    out_dir, formats, plot = _check_output(data, problems)
    if problems:
        return None, problems

    cfg = ExperimentConfig(kind, name, seed, replicas, horizon, model_source,
                           target, dict(target_params), parameters, out_dir,
                           formats, plot, defaults, version, source,
                           defaults_table)
    try:
        built = build_target(model_source, target, cfg.target_params)
    except (TypeError, ValueError) as exc:
        return None, [('model.params', "Cannot build {0!r}: {1}".format(
            target, exc))]
    category = target_category(built)
    if category not in experiment.targets:
        return None, [('model', "{0} runs on {1}, not on {2!r} ({3})".format(
            kind, ', '.join(experiment.targets), target, category))]
    if experiment.check is not None:
        problems = experiment.check(cfg, built)
    return cfg, problems


def load_config(path, overrides=(), seed=None):
    """
    Read, override and validate a configuration file.

    Parameters
    ----------
    path : str
    overrides : sequence of str
        ``KEY=VALUE`` strings applied on top of the file.
    seed : int, optional
        Replaces ``experiment.seed``.

    Returns
    -------
    `ExperimentConfig`
    """
    source = str(path)
    try:
        with open(path, 'rb') as f:
            raw = f.read()
    except OSError as exc:
        raise ConfigError("{0}: cannot read the file: {1}".format(
            source, exc.strerror or exc)) from None
    text = raw.decode('utf-8', errors='replace')
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _DECODE_LINE.search(str(exc))
        where = '{0}:{1}'.format(source, match.group(1)) if match else source
        raise ConfigError("{0}: invalid TOML: {1}".format(where,
                                                          exc)) from None
    keys = []
    for text_override in overrides:
        key, value = parse_override(text_override)
        _apply_override(data, key, value)
        keys.append(key)
    if seed is not None:
        data.setdefault('experiment', {})['seed'] = int(seed)
        keys.append('experiment.seed')
    locate = _Locator(text, source, keys)
    cfg, problems = _validate(data, source)
    if problems:
        raise ConfigError([locate(key, message) for key, message in problems])
    return cfg
