"""Social groups of a node.

Every node orders the peers it knows into groups G_0..G_n, G_0 being the node
itself and lower indices meaning stronger ties. Groups come either from the
ground truth of the scenario (oracle mode) or from memory activation: the
activation of a peer grows with the frequency and recency of the contacts
with it, and peers are split into groups wherever their sorted activations
show a marked gap."""

__all__ = ['SocialGroups', 'ActivationRecord', 'update_activation',
           'detect_groups', 'oracle_groups', 'refresh_groups',
           'preference_ranks', 'connection_sizes']

import logging
import math

import numpy as np

log = logging.getLogger(__name__)


class SocialGroups(object):
    """An ordered partition of the peers a node knows. Group 0 holds the
    owner only."""

    def __init__(self, owner, groups=()):
        self.owner = owner
        own = frozenset() if owner is None else frozenset([owner])
        self._groups = [own] + [frozenset(g) for g in groups]
        self._index = {}
        for j, group in enumerate(self._groups):
            for peer in group:
                if peer in self._index:
                    raise ValueError('Peer %r appears in groups %d and %d' %
                                     (peer, self._index[peer], j))
                self._index[peer] = j

    @classmethod
    def solitary(cls, owner):
        return cls(owner)

    def group_of(self, peer):
        """Index of the group `peer` belongs to, or None."""
        return self._index.get(peer)

    def sizes(self):
        return [len(g) for g in self._groups]

    def __len__(self):
        return len(self._groups)

    def __getitem__(self, j):
        return self._groups[j]

    def __iter__(self):
        return iter(self._groups)

    def __eq__(self, other):
        if isinstance(other, SocialGroups):
            return self.owner == other.owner and \
                self._groups == other._groups
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return NotImplemented
        return not eq

    __hash__ = None

    def __repr__(self):
        return 'SocialGroups(owner=%r, groups=%r)' % (
            self.owner, [sorted(g) for g in self._groups[1:]])


class ActivationRecord(object):
    """The contact history of a node with one peer."""

    def __init__(self, peer, timestamps=()):
        self.peer = peer
        self.timestamps = []
        self.activation = float('-inf')
        for t in timestamps:
            self.add_contact(t)

    def add_contact(self, t):
        if self.timestamps and t <= self.timestamps[-1]:
            raise ValueError('Contact at %r does not follow the last one at %r'
                             % (t, self.timestamps[-1]))
        self.timestamps.append(t)

    def __len__(self):
        return len(self.timestamps)

    def __repr__(self):
        return 'ActivationRecord(peer=%r, contacts=%d, activation=%r)' % (
            self.peer, len(self.timestamps), self.activation)


def update_activation(record, now, decay=0.5):
    """Compute, cache and return the activation of `record` at `now`:
    ln(sum((now - t_k) ** -decay)) over its contact times. A record without
    contacts has activation -inf."""
    if not record.timestamps:
        record.activation = float('-inf')
        return record.activation
    if now <= record.timestamps[-1]:
        raise ValueError('Activation evaluated at %r, not after the last '
                         'contact at %r' % (now, record.timestamps[-1]))
    ages = now - np.asarray(record.timestamps, dtype=float)
    record.activation = float(np.log(np.sum(ages ** -decay)))
    return record.activation


def detect_groups(activations, max_groups, gap_ratio, owner=None):
    """Split peers into social groups from their activation values.

    Peers are sorted by descending activation (ties by peer id). A boundary
    goes after position k when the drop to the next value exceeds
    `gap_ratio` times the mean of the other drops; if that gives more than
    `max_groups` groups only the largest drops are kept. Peers at -inf are
    left out."""
    ranked = sorted(((value, peer) for peer, value in activations.items()
                     if value > float('-inf')),
                    key=lambda pair: (-pair[0], pair[1]))
    if not ranked:
        raise ValueError('No finite activation to group.')
    values = [value for value, _ in ranked]
    drops = [values[k] - values[k + 1] for k in range(len(values) - 1)]
    total = sum(drops)
    cuts = []
    if len(drops) > 1:
        for k, drop in enumerate(drops):
            baseline = (total - drop) / (len(drops) - 1)
            if drop > 0 and drop > gap_ratio * baseline:
                cuts.append(k)
    if len(cuts) > max_groups - 1:
        largest = sorted(cuts, key=lambda k: (-drops[k], k))
        cuts = sorted(largest[:max(max_groups - 1, 0)])

    groups = []
    start = 0
    for k in cuts + [len(ranked) - 1]:
        groups.append(set(peer for _, peer in ranked[start:k + 1]))
        start = k + 1
    return SocialGroups(owner, groups)


def oracle_groups(node, topology):
    """Ground-truth groups: the node's own community first, then the other
    communities in the order the scenario connects them to the node's
    community."""
    own = set(topology.members(node.community_id)) - set([node.node_id])
    groups = [own]
    for community in topology.visit_order(node.community_id):
        groups.append(set(topology.members(community)))
    return SocialGroups(node.node_id, groups)


def refresh_groups(node, now, decay=0.5, gap_ratio=2.0, max_groups=8):
    """Recompute the activation-based groups of `node` at `now`."""
    activations = {}
    for peer, record in node.contact_history.items():
        activations[peer] = update_activation(record, now, decay)
    if not any(math.isfinite(v) for v in activations.values()):
        node.groups = SocialGroups.solitary(node.node_id)
    else:
        node.groups = detect_groups(activations, max_groups, gap_ratio,
                                    owner=node.node_id)
    log.debug('Node %d at %s: group sizes %s', node.node_id, now,
              node.groups.sizes())
    return node.groups


def preference_ranks(node, inverse=False):
    """Rank the peer groups (G_1 on) of `node` by how often their members were
    met, most met first (least met first when `inverse`). Returns a map from
    group index to rank; ties keep the closer group first."""
    counts = []
    for j in range(1, len(node.groups)):
        met = sum(len(node.contact_history[p]) for p in node.groups[j]
                  if p in node.contact_history)
        counts.append((j, met))
    sign = 1 if inverse else -1
    ordered = sorted(counts, key=lambda jc: (sign * jc[1], jc[0]))
    return dict((j, rank) for rank, (j, _) in enumerate(ordered))


def connection_sizes(node):
    """Per peer group, the number of its members the node has actually met."""
    return [sum(1 for p in node.groups[j] if p in node.contact_history)
            for j in range(1, len(node.groups))]
