"""Experiment configuration.

A configuration is flat dotted ``key = value`` text::

    # ZT, SCH with RT 3
    scenario = ZT
    policy.name = sch
    policy.theta_i = 3

Every key is declared once in :py:data:`KEYS` with its default, its value
type and its admissible range; a :py:class:`SimConfig` always holds a value
for each of them."""

__all__ = ['ConfigError', 'Key', 'KEYS', 'SimConfig', 'parse_config',
           'flag_name']

import logging
import re
from collections import OrderedDict, namedtuple

log = logging.getLogger(__name__)


class ConfigError(Exception):
    """Raised for unknown keys, unparsable or out-of-range values and
    inconsistent configurations."""

    def __init__(self, message, key=None):
        super(ConfigError, self).__init__(message)
        self.key = key


def _bool(raw):
    if isinstance(raw, bool):
        return raw
    value = str(raw).strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: %r' % (raw,))


def _int(raw):
    if isinstance(raw, float) and not raw.is_integer():
        raise ValueError('not an integer: %r' % (raw,))
    return int(raw)


def _str(raw):
    return str(raw)


def _choice(*options):
    folded = dict((o.lower(), o) for o in options)

    def convert(raw):
        try:
            return folded[str(raw).strip().lower()]
        except KeyError:
            raise ValueError('expected one of %s, got %r' %
                             (', '.join(options), raw))
    convert.options = options
    return convert


class Key(namedtuple('Key', 'name default convert low high help')):
    """Key(name, default, convert, low, high, help)

    One configuration key. `low` and `high` bound numeric values (inclusive);
    None leaves that side open."""

    __slots__ = ()

    def parse(self, raw):
        try:
            value = self.convert(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError('%s: %s' % (self.name, e), key=self.name)
        if self.low is not None and value < self.low:
            raise ConfigError('%s: %r is below %r' % (self.name, value,
                                                      self.low), key=self.name)
        if self.high is not None and value > self.high:
            raise ConfigError('%s: %r is above %r' % (self.name, value,
                                                      self.high), key=self.name)
        return value


def _key(name, default, convert, low=None, high=None, help=''):
    return Key(name, default, convert, low, high, help)


KEYS = OrderedDict((k.name, k) for k in [
    _key('area.width', 1000.0, float, 1, None, 'area width (m)'),
    _key('area.height', 1000.0, float, 1, None, 'area height (m)'),
    _key('grid.rows', 4, _int, 1, None, 'grid rows'),
    _key('grid.cols', 4, _int, 1, None, 'grid columns'),
    _key('channels.count', 4, _int, 1, None, 'number of channels'),
    _key('channels.items', 100, _int, 1, None, 'items per channel'),
    _key('channels.zipf_exp', 1.0, float, 0, None,
         'Zipf exponent of channel popularity'),
    _key('communities.count', 4, _int, 1, None, 'number of communities'),
    _key('communities.nodes', 25, _int, 1, None, 'nodes per community'),
    _key('mobility.speed_min', 1.0, float, 0.01, None, 'minimum speed (m/s)'),
    _key('mobility.speed_max', 1.86, float, 0.01, None, 'maximum speed (m/s)'),
    _key('mobility.step_s', 1, _int, 1, None, 'time step (s)'),
    _key('mobility.stay_prob', 0.5, float, 0, 1,
         'probability a traveller keeps visiting'),
    _key('mobility.home_stay_prob', 0.0, float, 0, 1,
         'probability a traveller at home moves there once more'),
    _key('mobility.zipf_exp', 1.0, float, 0, None,
         'Zipf exponent of ZT traveller preferences'),
    _key('radio.range', 20.0, float, 0, None, 'transmission range (m)'),
    _key('sim.duration', 50000, _int, 0, None, 'simulated seconds'),
    _key('sim.seed', 1, _int, 0, None, 'random seed'),
    _key('oc.size', 10, _int, 1, 10000, 'opportunistic cache slots'),
    _key('policy.name', 'sch', _choice('sch', 'rh'), None, None,
         'selection policy'),
    _key('policy.theta_c', 3, _int, 1, None, 'channel recognition threshold'),
    _key('policy.theta_i', 3, _int, 1, None,
         'item recognition threshold (RT)'),
    _key('scenario', 'ZT', _choice('OT', 'ZT', 'TT'), None, None,
         'inter-community connectivity'),
    _key('placement', 'uniform', _choice('uniform', 'popularity', 'inverse'),
         None, None, 'initial item placement'),
    _key('dynamics.kind', 'none',
         _choice('none', 'rotation', 'new_channel', 'doubling', 'periodic'),
         None, None, 'dynamic event'),
    _key('dynamics.at', 10000, _int, 0, None, 'time of the (first) event'),
    _key('dynamics.period', 30000, _int, 1, None,
         'period of periodic injections'),
    _key('dynamics.items', 100, _int, 1, None,
         'items created per channel by an injection or a new channel'),
    _key('dynamics.subscribers', 15, _int, 1, None,
         'new-channel subscribers per community'),
    _key('ttl.enabled', False, _bool, None, None, 'expire items'),
    _key('ttl.mean', 10000.0, float, 1, None, 'mean item lifetime (s)'),
    _key('ttl.sigma', 1500.0, float, 0, None, 'item lifetime deviation (s)'),
    _key('ttl.floor', 60.0, float, None, None, 'shortest item lifetime (s)'),
    _key('selfish.kind', 'none', _choice('none', 'uniform', 'social'),
         None, None, 'exchange gate'),
    _key('selfish.p', 1.0, float, 0, 1, 'joint exchange probability'),
    _key('selfish.p0', 1.0, float, 0, 1, 'social gate base probability'),
    _key('selfish.direction', 'direct', _choice('direct', 'inverse'),
         None, None, 'social gate ranking'),
    _key('community.mode', 'oracle', _choice('oracle', 'activation'),
         None, None, 'social group source'),
    _key('community.decay', 0.5, float, None, None, 'activation decay'),
    _key('community.gap_ratio', 2.0, float, None, None,
         'activation gap ratio'),
    _key('community.refresh_period_s', 1000, _int, 1, None,
         'activation group refresh period (s)'),
    _key('community.max_groups', 8, _int, 1, None, 'most peer groups kept'),
    _key('metrics.period', 500, _int, 1, None, 'sampling period (s)'),
    _key('debug.events', '', _str, None, None,
         'JSON-lines event log path ({seed} is expanded)'),
    _key('debug.checks', False, _bool, None, None,
         'check cache capacity and provenance on every tick'),
    _key('debug.trace', '', _str, None, None,
         'mobility trace CSV path ({seed} is expanded)'),
])


def flag_name(key):
    """The command line flag of a key: area.width -> --area-width."""
    return '--' + key.replace('.', '-').replace('_', '-')


line_re = re.compile(r'^(?P<key>[A-Za-z_][\w.]*)\s*=\s*(?P<value>.*)$')


def _unquote(value):
    if len(value) >= 2 and value[0] == value[-1] and value[0] in '"\'':
        return value[1:-1]
    return value


def parse_config(text):
    """Parse key = value text into an ordered mapping of raw strings. Comments
    start with '#'; the last assignment of a key wins."""
    mapping = OrderedDict()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split('#', 1)[0].strip()
        if not stripped:
            continue
        match = line_re.match(stripped)
        if match is None:
            raise ConfigError('line %d: expected "key = value", got %r' %
                              (lineno, line.strip()))
        mapping[match.group('key')] = _unquote(match.group('value').strip())
    log.debug('Parsed %d configuration keys', len(mapping))
    return mapping


class SimConfig(object):
    """A complete, validated experiment configuration.

    Values are read with item access on dotted keys, eg.
    ``config['policy.theta_i']``."""

    def __init__(self, values=None):
        self._values = OrderedDict((name, key.default)
                                   for name, key in KEYS.items())
        if values:
            for name, value in values.items():
                if name not in KEYS:
                    raise ConfigError('Unknown key %r' % name, key=name)
                self._values[name] = KEYS[name].parse(value)

    @classmethod
    def from_mapping(cls, mapping, base=None):
        """Build a config from raw or typed values, on top of `base` (the
        defaults when None), and validate it."""
        values = OrderedDict(base._values if base is not None else ())
        for name, raw in mapping.items():
            if name not in KEYS:
                raise ConfigError('Unknown key %r' % name, key=name)
            values[name] = raw
        config = cls(values)
        config.validate()
        return config

    def replace(self, mapping=None, **overrides):
        """A new config with some values changed. Keyword names use '__' for
        '.', eg. ``policy__theta_i=12``."""
        changes = OrderedDict(mapping or ())
        for name, value in sorted(overrides.items()):
            changes[name.replace('__', '.')] = value
        return SimConfig.from_mapping(changes, base=self)

    def __getitem__(self, name):
        try:
            return self._values[name]
        except KeyError:
            raise ConfigError('Unknown key %r' % name, key=name)

    def keys(self):
        return self._values.keys()

    def as_mapping(self):
        return OrderedDict(self._values)

    def __eq__(self, other):
        if isinstance(other, SimConfig):
            return self._values == other._values
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return NotImplemented
        return not eq

    __hash__ = None

    def __repr__(self):
        changed = ['%s=%r' % (name, value)
                   for name, value in self._values.items()
                   if value != KEYS[name].default]
        return 'SimConfig(%s)' % ', '.join(changed)

    def validate(self):
        """Check the cross-key constraints. Raises ConfigError."""
        from oppsim.mobility import home_cells

        v = self._values
        if v['mobility.speed_min'] > v['mobility.speed_max']:
            raise ConfigError('mobility.speed_min above mobility.speed_max',
                              key='mobility.speed_min')
        if v['metrics.period'] % v['mobility.step_s']:
            raise ConfigError('mobility.step_s must divide metrics.period',
                              key='mobility.step_s')
        if v['sim.duration'] % v['metrics.period']:
            raise ConfigError('metrics.period must divide sim.duration',
                              key='metrics.period')
        if v['community.mode'] == 'activation' and \
                v['community.refresh_period_s'] % v['mobility.step_s']:
            raise ConfigError('mobility.step_s must divide '
                              'community.refresh_period_s',
                              key='community.refresh_period_s')
        try:
            home_cells(v['grid.rows'], v['grid.cols'], v['communities.count'])
        except ValueError as e:
            raise ConfigError(str(e), key='communities.count')
        travellers = {'OT': 1, 'ZT': 1, 'TT': v['communities.count'] - 1}
        if v['communities.count'] > 1 and \
                travellers[v['scenario']] >= v['communities.nodes']:
            raise ConfigError('%d nodes per community leave no room for %d '
                              'traveller(s)' % (v['communities.nodes'],
                                                travellers[v['scenario']]),
                              key='communities.nodes')
        if v['dynamics.kind'] != 'none' and \
                v['dynamics.at'] >= v['sim.duration']:
            raise ConfigError('dynamics.at must come before the end of the '
                              'run', key='dynamics.at')
        if v['dynamics.kind'] == 'new_channel' and \
                v['dynamics.subscribers'] > v['communities.nodes'] - \
                (travellers[v['scenario']] if v['communities.count'] > 1
                 else 0):
            raise ConfigError('More new-channel subscribers than '
                              'non-travellers', key='dynamics.subscribers')
        if v['ttl.floor'] <= 0:
            raise ConfigError('ttl.floor must be positive', key='ttl.floor')
        for name in ('community.decay', 'community.gap_ratio'):
            if v[name] <= 0:
                raise ConfigError('%s must be positive' % name, key=name)
        return self

    @property
    def policy(self):
        from oppsim.engine import PolicyDescriptor
        return PolicyDescriptor(self['policy.name'], self['policy.theta_c'],
                                self['policy.theta_i'])

    @property
    def dynamics(self):
        from oppsim.engine import DynamicsDescriptor
        return DynamicsDescriptor(self['dynamics.kind'], self['dynamics.at'],
                                  self['dynamics.period'],
                                  self['dynamics.items'],
                                  self['dynamics.subscribers'])

    @property
    def ttl(self):
        from oppsim.engine import TtlDescriptor
        return TtlDescriptor(self['ttl.enabled'], self['ttl.mean'],
                             self['ttl.sigma'], self['ttl.floor'])

    @property
    def selfishness(self):
        from oppsim.engine import SelfishnessDescriptor
        return SelfishnessDescriptor(self['selfish.kind'], self['selfish.p'],
                                     self['selfish.p0'],
                                     self['selfish.direction'])
