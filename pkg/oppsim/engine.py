"""The simulation loop.

One :py:class:`Simulation` is one seeded run. Every tick it applies the
scheduled dynamic events, expires items past their TTL, refreshes
activation-based social groups when due, samples the metrics, moves the nodes
and lets every pair that just came into range exchange, subject to the
selfishness gate."""

__all__ = ['RunError', 'PolicyDescriptor', 'DynamicsDescriptor',
           'TtlDescriptor', 'SelfishnessDescriptor', 'ContactOutcome',
           'Simulation', 'run', 'handle_contact', 'exchange_gate',
           'side_acceptance', 'equivalent_uniform_p', 'apply_dynamics',
           'rotate_subscriptions', 'expire_ttl', 'check_capacity',
           'social_connection_means']

import contextlib
import logging
import math
from collections import OrderedDict, namedtuple

import numpy as np

from oppsim.community import (connection_sizes, oracle_groups,
                              preference_ranks, refresh_groups)
from oppsim.core import Channel, ContractError, ItemCatalog, NodeState
from oppsim.heuristics import GroupMeanProvider, rh_select, select_oc_contents
from oppsim.metrics import (MetricsSample, MetricsSeries, OverheadCounter,
                            hit_rate)
from oppsim.mobility import (ContactDetector, MobilityWorld, Topology,
                             TraceWriter, step_positions)
from oppsim.serializers import EventLog
from oppsim.util import largest_remainder, make_rng, zipf_weights

log = logging.getLogger(__name__)


class RunError(Exception):
    """Raised by batch drivers when one run fails; carries the label and
    seed of the run and the original exception."""

    def __init__(self, label, seed, error):
        super(RunError, self).__init__('run %s (seed %s) failed: %s: %s' % (
            label, seed, type(error).__name__, error))
        self.label = label
        self.seed = seed
        self.error = error


PolicyDescriptor = namedtuple('PolicyDescriptor', 'name theta_c theta_i')


class DynamicsDescriptor(namedtuple('DynamicsDescriptor',
                                    'kind at period items subscribers')):
    """DynamicsDescriptor(kind, at, period, items, subscribers)

    kind is one of none, rotation, new_channel, doubling or periodic."""

    __slots__ = ()

    def event_times(self, duration):
        if self.kind == 'none':
            return []
        if self.kind == 'periodic':
            return list(range(self.at, duration, self.period))
        return [self.at] if self.at < duration else []


class TtlDescriptor(namedtuple('TtlDescriptor', 'enabled mean sigma floor')):
    """TtlDescriptor(enabled, mean, sigma, floor)

    Item lifetimes are Gaussian, clamped from below at `floor`."""

    __slots__ = ()

    def sample(self, rng, size=None):
        return np.maximum(rng.normal(self.mean, self.sigma, size), self.floor)

    def expiry(self, created_at, rng):
        if not self.enabled:
            return None
        return created_at + float(self.sample(rng))


SelfishnessDescriptor = namedtuple('SelfishnessDescriptor',
                                   'kind p p0 direction')

ContactOutcome = namedtuple('ContactOutcome', 'control data delivered')


def side_acceptance(node, peer_id, descriptor):
    """The probability that `node` agrees to an exchange with `peer_id`."""
    if descriptor.kind == 'none':
        return 1.0
    if descriptor.kind == 'uniform':
        return math.sqrt(descriptor.p)
    ranks = preference_ranks(node, inverse=descriptor.direction == 'inverse')
    group = node.groups.group_of(peer_id)
    if group in ranks:
        rank = ranks[group]
    else:
        # unknown peers rank with the least preferred group
        rank = max(len(ranks) - 1, 0)
    return descriptor.p0 * 2.0 ** -rank


def exchange_gate(a, b, descriptor, rng):
    """Does the contact between `a` and `b` lead to an exchange? Each side
    accepts independently."""
    if descriptor.kind == 'none':
        return True
    accept_a = rng.random() < side_acceptance(a, b.node_id, descriptor)
    accept_b = rng.random() < side_acceptance(b, a.node_id, descriptor)
    return accept_a and accept_b


def equivalent_uniform_p(group_sizes, group_probs):
    """The joint probability of a uniform gate equivalent to a social gate
    whose groups have mean sizes `group_sizes` and acceptance probabilities
    `group_probs`: the square of the size-weighted mean acceptance."""
    group_sizes = list(group_sizes)
    group_probs = list(group_probs)
    if not group_sizes or len(group_sizes) != len(group_probs):
        raise ValueError('Need one probability per group, got %d sizes and '
                         '%d probabilities' % (len(group_sizes),
                                               len(group_probs)))
    total = math.fsum(group_sizes)
    if total <= 0:
        raise ValueError('Groups are all empty.')
    root = math.fsum(n * p for n, p in zip(group_sizes, group_probs)) / total
    return root ** 2


def social_connection_means(nodes, inverse=False, met_only=False):
    """Mean size of the peer group at each preference rank, over all
    `nodes`. With `met_only` a group only counts the members its node has
    met."""
    sums = []
    for node in nodes:
        if met_only:
            sizes = connection_sizes(node)
        else:
            sizes = node.groups.sizes()[1:]
        for group, rank in preference_ranks(node, inverse).items():
            while len(sums) <= rank:
                sums.append(0)
            sums[rank] += sizes[group - 1]
    if not nodes:
        return []
    return [float(s) / len(nodes) for s in sums]


def _select(local, peer_summary, policy, catalog, rng):
    channel_of = catalog.channel_array()
    if policy.name == 'rh':
        return rh_select(local, peer_summary, channel_of, policy.theta_c,
                         policy.theta_i, rng)
    views = GroupMeanProvider(local.groups, local.peer_views,
                              local.recognition.vector(catalog.channel_count),
                              channel_of)
    return select_oc_contents(local, peer_summary, views, policy.theta_c,
                              policy.theta_i, rng)


def handle_contact(a, b, t, policy, catalog, rng, checks=False):
    """Run one exchange between `a` and `b` at `t`.

    Both sides first snapshot what they hold and their recognition levels,
    then each in turn updates its knowledge from the other's snapshot,
    consumes the items of its channel, and rebuilds its OC. Returns a
    :py:class:`ContactOutcome` with the messages spent and the items each
    side consumed."""
    channels = catalog.channel_count
    held = (a.held(), b.held())
    vectors = (a.recognition.vector(channels), b.recognition.vector(channels))
    data = 0
    delivered = []
    for local, peer, own, other in ((a, b, 0, 1), (b, a, 1, 0)):
        peer_summary = held[other]
        local.recognition.record_contact_knowledge(
            peer.node_id, peer.subscription, peer_summary)
        local.peer_views[peer.node_id] = vectors[other]
        local.record_contact(peer.node_id, t)
        # own items injected since the last exchange
        local.deliver(held[own], catalog)
        fresh = local.deliver(peer_summary, catalog)
        new_oc = _select(local, peer_summary, policy, catalog, rng)
        if checks and not new_oc <= (peer_summary | local.oc.contents):
            raise ContractError('Node %d selected items it was never offered: '
                                '%r' % (local.node_id, sorted(
                                    new_oc - peer_summary - local.oc.contents)))
        local.oc.replace(new_oc)
        data += len((new_oc | fresh) - held[own])
        delivered.append(fresh)
    return ContactOutcome(2, data, tuple(delivered))


def rotate_subscriptions(nodes, catalog):
    """Move every non-traveller to the next channel. Item counters of the
    new channel start over. Returns the nodes that changed."""
    changed = []
    for node in nodes:
        if node.is_traveller:
            continue
        channel = (node.subscription + 1) % catalog.channel_count
        node.recognition.reset_items(catalog.items_of(channel))
        node.resubscribe(channel, catalog)
        changed.append(node)
    return changed


def apply_dynamics(state, t, descriptor, rng):
    """Apply the event `descriptor` describes to the simulation `state`."""
    catalog = state.catalog
    if descriptor.kind == 'rotation':
        changed = rotate_subscriptions(state.nodes, catalog)
        detail = {'resubscribed': len(changed)}
    elif descriptor.kind == 'new_channel':
        channel = catalog.add_channel()
        state.place_items(channel, descriptor.items, t)
        chosen = set()
        for k in range(state.topology.community_count):
            candidates = [m for m in state.topology.members(k)
                          if not state.nodes[m].is_traveller]
            picks = rng.choice(len(candidates), size=descriptor.subscribers,
                               replace=False)
            chosen.update(candidates[int(i)] for i in picks)
        for node_id in sorted(chosen):
            state.nodes[node_id].resubscribe(channel, catalog)
        state.population = chosen
        detail = {'channel': int(channel), 'resubscribed': len(chosen)}
    elif descriptor.kind in ('doubling', 'periodic'):
        counts = [catalog.count(c) for c in range(catalog.channel_count)]
        for channel, count in enumerate(counts):
            items = count if descriptor.kind == 'doubling' else \
                descriptor.items
            state.place_items(Channel(channel), items, t)
        detail = {'items': len(catalog) - sum(counts)}
    else:
        return
    log.info('t=%d: %s event, %s', t, descriptor.kind, detail)
    state.emit(t, 'dynamics', event=descriptor.kind, **detail)


def expire_ttl(nodes, catalog, t):
    """Drop the items whose lifetime ended by `t` from every cache and return
    their ids. Consumed items stay consumed."""
    expired = catalog.pop_expired(t)
    if expired:
        for node in nodes:
            node.expire(expired)
    return expired


def check_capacity(nodes):
    for node in nodes:
        if len(node.oc) > node.oc.capacity:
            raise ContractError('Node %d holds %d items in %d OC slots' %
                                (node.node_id, len(node.oc),
                                 node.oc.capacity))


class Simulation(object):
    """A single run of a configuration."""

    def __init__(self, config, label=None):
        config.validate()
        self.config = config
        self.label = label or 'run'
        self.policy = config.policy
        self.dynamics = config.dynamics
        self.ttl = config.ttl
        self.selfishness = config.selfishness
        self.rng = make_rng(config['sim.seed'])
        self.topology = Topology(config['scenario'],
                                 config['communities.count'],
                                 config['communities.nodes'],
                                 config['mobility.zipf_exp'])
        self.catalog = ItemCatalog(config['channels.count'])
        self.overhead = OverheadCounter()
        self.population = None
        self.contacts = 0
        self.skipped = 0
        self.events = None
        self.trace = None
        self.nodes = [NodeState(i, self.topology.community_of(i), 0,
                                config['oc.size'],
                                self.topology.is_traveller(i))
                      for i in range(self.topology.node_count)]
        self._assign_subscriptions()
        for channel in range(config['channels.count']):
            self.place_items(Channel(channel), config['channels.items'], 0,
                             config['placement'], consume=True)
        self.world = MobilityWorld.from_config(config, self.topology, self.rng)
        for node in self.nodes:
            node.bind(self.world)
            if config['community.mode'] == 'oracle':
                node.groups = oracle_groups(node, self.topology)
        self.detector = ContactDetector(config['radio.range'])
        self.series = MetricsSeries(metadata=self.metadata())

    def metadata(self):
        times = self.dynamics.event_times(self.config['sim.duration'])
        return OrderedDict([
            ('tag', self.label),
            ('scenario', self.config['scenario']),
            ('policy', self.policy.name),
            ('rt', self.policy.theta_i),
            ('seed', self.config['sim.seed']),
            ('community_mode', self.config['community.mode']),
            ('event_at', times[0] if times else None),
        ])

    def _assign_subscriptions(self):
        """Zipf subscription counts per community, rotated so that every
        community has a different most popular channel."""
        channels = self.config['channels.count']
        size = self.config['communities.nodes']
        counts = largest_remainder(
            zipf_weights(channels, self.config['channels.zipf_exp']), size)
        self.subscription_weights = np.zeros(
            (self.topology.community_count, channels))
        for k in range(self.topology.community_count):
            slots = []
            for rank, count in enumerate(counts):
                channel = (rank + k) % channels
                slots.extend([channel] * count)
                self.subscription_weights[k, channel] += count
            members = self.topology.members(k)
            order = self.rng.permutation(len(members))
            for slot, index in zip(slots, order):
                self.nodes[members[index]].subscription = Channel(slot)

    def _creators(self, channel, count, placement):
        n = self.topology.nodes_per_community
        if placement == 'uniform' or \
                channel >= self.subscription_weights.shape[1]:
            return self.rng.integers(self.topology.node_count, size=count)
        weights = self.subscription_weights[:, channel]
        if placement == 'inverse':
            weights = np.where(weights > 0, 1.0 / np.maximum(weights, 1e-12),
                               0.0)
        communities = self.rng.choice(len(weights), size=count,
                                      p=weights / weights.sum())
        return communities * n + self.rng.integers(n, size=count)

    def place_items(self, channel, count, t, placement='uniform',
                    consume=False):
        """Create `count` items of `channel` at `t` in the LIs of nodes chosen
        by `placement`. With `consume` a creator subscribed to `channel`
        consumes its item at once; otherwise it does so at its next exchange,
        so an injection lowers every node's Hit Rate term by exactly
        old count / new count at the event tick."""
        created = []
        for creator in self._creators(channel, count, placement):
            item = self.catalog.create(channel, t,
                                       self.ttl.expiry(t, self.rng))
            node = self.nodes[int(creator)]
            node.li.add(item.id)
            if consume and node.subscription == channel:
                node.delivered.add(item.id)
            created.append(item)
        return created

    def emit(self, t, kind, **payload):
        if self.events is not None:
            self.events.emit(t, kind, **payload)

    def sample(self, t):
        self.series.append(MetricsSample(
            t, hit_rate(self.nodes, self.catalog, self.population),
            self.overhead.total, self.overhead.data, self.overhead.control))

    def contact(self, a_id, b_id, t):
        a, b = self.nodes[a_id], self.nodes[b_id]
        if not exchange_gate(a, b, self.selfishness, self.rng):
            self.skipped += 1
            self.emit(t, 'skip', a=a_id, b=b_id)
            return None
        outcome = handle_contact(a, b, t, self.policy, self.catalog, self.rng,
                                 checks=self.config['debug.checks'])
        self.overhead.add(data=outcome.data, control=outcome.control)
        self.contacts += 1
        self.emit(t, 'contact', a=a_id, b=b_id, data=outcome.data)
        return outcome

    def tick(self, t, events=()):
        config = self.config
        for _ in events:
            apply_dynamics(self, t, self.dynamics, self.rng)
        if self.ttl.enabled:
            expired = expire_ttl(self.nodes, self.catalog, t)
            if expired:
                self.emit(t, 'expire', items=len(expired))
        if config['community.mode'] == 'activation' and t > 0 and \
                t % config['community.refresh_period_s'] == 0:
            for node in self.nodes:
                refresh_groups(node, t, config['community.decay'],
                               config['community.gap_ratio'],
                               config['community.max_groups'])
        if t % config['metrics.period'] == 0:
            self.sample(t)
        if t >= config['sim.duration']:
            return
        step_positions(self.world, config['mobility.step_s'])
        if self.trace is not None:
            self.trace.write(t, self.world.positions)
        started, _ = self.detector.update(self.world.positions, t)
        for event in started:
            self.contact(int(event.a), int(event.b), t)
        if config['debug.checks']:
            check_capacity(self.nodes)

    def _debug_path(self, key):
        return self.config[key].format(seed=self.config['sim.seed'],
                                       label=self.label)

    def run(self):
        """Simulate the whole duration and return the metrics series."""
        config = self.config
        duration = config['sim.duration']
        step = config['mobility.step_s']
        pending = self.dynamics.event_times(duration)
        log.info('Run %s: seed %d, %s RT=%d, scenario %s, %d nodes',
                 self.label, config['sim.seed'], self.policy.name.upper(),
                 self.policy.theta_i, config['scenario'], len(self.nodes))
        with contextlib.ExitStack() as stack:
            if config['debug.events']:
                self.events = EventLog(stack.enter_context(
                    open(self._debug_path('debug.events'), 'w')))
            if config['debug.trace']:
                self.trace = TraceWriter(stack.enter_context(
                    open(self._debug_path('debug.trace'), 'w', newline='')))
            for t in range(0, duration + 1, step):
                due = [e for e in pending if e <= t]
                pending = pending[len(due):]
                self.tick(t, due)
            self.events = None
            self.trace = None
        log.info('Run %s seed %d done: HR %.3f, %d messages, %d contacts '
                 '(%d skipped)', self.label, config['sim.seed'],
                 self.series.final.hit_rate, self.overhead.total,
                 self.contacts, self.skipped)
        return self.series

    def summary(self):
        """Final figures of the run."""
        final = self.series.final
        summary = OrderedDict([
            ('final_hit_rate', final.hit_rate if final else None),
            ('final_overhead', final.overhead_total if final else None),
            ('contacts', self.contacts),
            ('skipped_contacts', self.skipped),
            ('items', len(self.catalog)),
        ])
        if self.selfishness.kind == 'social':
            inverse = self.selfishness.direction == 'inverse'
            for key, met_only in (('', False), ('_met', True)):
                means = social_connection_means(self.nodes, inverse, met_only)
                probs = [self.selfishness.p0 * 2.0 ** -k
                         for k in range(len(means))]
                try:
                    p = equivalent_uniform_p(means, probs)
                except ValueError:
                    p = None
                summary['equivalent_uniform_p' + key] = p
                summary['social_connections' + key] = means
        return summary


def run(config, label=None):
    """Run `config` once and return its :py:class:`MetricsSeries`."""
    return Simulation(config, label).run()
