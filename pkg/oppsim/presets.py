"""Ready-made experiments, one per figure tag (fig1 to fig23).

Each preset is a set of configuration overrides shared by all its points and
the list of sweep points (policy, threshold and gate variants) to compare."""

__all__ = ['Preset', 'SweepPoint', 'PRESETS', 'preset_tags']

import re
from collections import OrderedDict, namedtuple

Preset = namedtuple('Preset', 'description overrides points')
SweepPoint = namedtuple('SweepPoint', 'variant overrides')


def _policy(name, rt, variant=None, **extra):
    overrides = OrderedDict([('policy.name', name), ('policy.theta_i', rt)])
    for key, value in sorted(extra.items()):
        overrides[key.replace('__', '.')] = value
    return SweepPoint(variant, overrides)


SCH3 = _policy('sch', 3)
RH30 = _policy('rh', 30)
RH75 = _policy('rh', 75)
STATIC = [SCH3, RH30, RH75]


def _uniform(p):
    return OrderedDict([('selfish.kind', 'uniform'), ('selfish.p', p)])


def _social(direction, p0):
    return OrderedDict([('selfish.kind', 'social'),
                        ('selfish.direction', direction), ('selfish.p0', p0)])


def _gate_points(gates, policies=(('sch', 3), ('rh', 75))):
    """Every policy under every gate; `gates` maps variant names to
    overrides."""
    points = []
    for variant, gate in gates:
        for name, rt in policies:
            overrides = _policy(name, rt).overrides
            overrides.update(gate)
            points.append(SweepPoint(variant, overrides))
    return points


def _social_vs_uniform(direction, p0, p):
    return _gate_points([('%s-p0_%s' % (direction, p0), _social(direction, p0)),
                         ('uniform-p%s' % p, _uniform(p))])


PRESETS = OrderedDict([
    ('fig1', Preset('OT static scenario', {'scenario': 'OT'},
                    [SCH3, _policy('sch', 12), RH30, RH75])),
    ('fig2', Preset('ZT static scenario', {'scenario': 'ZT'}, STATIC)),
    ('fig2b', Preset('ZT static scenario, SCH and RH at the same RT',
                     {'scenario': 'ZT'}, [SCH3, _policy('rh', 3)])),
    ('fig3', Preset('TT static scenario', {'scenario': 'TT'}, STATIC)),
    ('fig4', Preset('subscription rotation at 10000 s',
                    {'dynamics.kind': 'rotation', 'dynamics.at': 10000},
                    [SCH3, _policy('sch', 5), RH30, RH75])),
    ('fig5', Preset('new channel at 10000 s, 15 subscribers per community',
                    {'dynamics.kind': 'new_channel', 'dynamics.at': 10000,
                     'dynamics.items': 100, 'dynamics.subscribers': 15},
                    STATIC)),
    ('fig6', Preset('items doubled at 10000 s',
                    {'dynamics.kind': 'doubling', 'dynamics.at': 10000},
                    STATIC)),
    ('fig7', Preset('100 items per channel every 30000 s from 10000 s',
                    {'dynamics.kind': 'periodic', 'dynamics.at': 10000,
                     'dynamics.period': 30000, 'dynamics.items': 100,
                     'sim.duration': 100000},
                    STATIC)),
    ('fig8', Preset('OC of 2 slots', {'oc.size': 2}, STATIC)),
    ('fig9', Preset('OC of 5 slots', {'oc.size': 5}, STATIC)),
    ('fig10', Preset('items placed where their channel is popular',
                     {'placement': 'popularity'}, STATIC)),
    ('fig11', Preset('items placed where their channel is unpopular',
                     {'placement': 'inverse'}, STATIC)),
    ('fig12', Preset('mean item TTL 7500 s',
                     {'ttl.enabled': True, 'ttl.mean': 7500}, STATIC)),
    ('fig13', Preset('mean item TTL 10000 s',
                     {'ttl.enabled': True, 'ttl.mean': 10000}, STATIC)),
    ('fig14', Preset('mean item TTL 15000 s',
                     {'ttl.enabled': True, 'ttl.mean': 15000}, STATIC)),
    ('fig15', Preset('uniform gate, joint p 0.9', _uniform(0.9), STATIC)),
    ('fig16', Preset('uniform gate, joint p 0.5', _uniform(0.5), STATIC)),
    ('fig17', Preset('uniform gate, joint p 0.33', _uniform(0.33), STATIC)),
    ('fig18', Preset('SCH RT 3 under uniform gates of decreasing p', {},
                     _gate_points([('p%s' % p, _uniform(p))
                                   for p in (1.0, 0.9, 0.5, 0.33)],
                                  policies=[('sch', 3)]))),
    ('fig19', Preset('SCH RT 3 under direct and inverse social gates', {},
                     _gate_points([('%s-p0_%s' % (d, p0), _social(d, p0))
                                   for d in ('direct', 'inverse')
                                   for p0 in (1.0, 0.75)],
                                  policies=[('sch', 3)]))),
    ('fig20', Preset('social direct p0 1 against uniform p 0.58', {},
                     _social_vs_uniform('direct', 1.0, 0.58))),
    ('fig21', Preset('social direct p0 0.75 against uniform p 0.33', {},
                     _social_vs_uniform('direct', 0.75, 0.33))),
    ('fig22', Preset('social inverse p0 1 against uniform p 0.21', {},
                     _social_vs_uniform('inverse', 1.0, 0.21))),
    ('fig23', Preset('social inverse p0 0.75 against uniform p 0.12', {},
                     _social_vs_uniform('inverse', 0.75, 0.12))),
])


def _natural(tag):
    return [int(part) if part.isdigit() else part
            for part in re.split(r'(\d+)', tag)]


def preset_tags():
    return sorted(PRESETS, key=_natural)
