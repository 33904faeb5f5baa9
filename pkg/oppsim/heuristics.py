"""Recognition counters and the two selection policies a node can apply to
its Opportunistic Cache when it meets another node.

The Recognition Heuristic (RH) keeps an item iff its channel is recognised
(enough distinct subscribers of it have been met) and the item itself is not
(it has been seen fewer than theta_I times). The Social Circle Heuristic (SCH)
applies RH first and, when that does not fill the cache exactly, keeps
discriminating with the mean recognition levels of the node's social groups,
closest group first, ending with a uniform random choice."""

__all__ = ['RecognitionStore', 'RecognitionVector', 'GroupMeanProvider',
           'r_lev', 'rh_relevant', 'rh_select', 'select_oc_contents',
           'sch_filter', 'group_mean_levels', 'bucket_index', 'random_subset']

import math
from collections import defaultdict, namedtuple
from fractions import Fraction

import numpy as np

from oppsim.core import Channel


def _lookup(levels, ids):
    """Index `levels` with `ids`, reading 0 for ids past its end."""
    out = np.zeros(len(ids), dtype=float)
    if len(levels):
        inside = ids < len(levels)
        out[inside] = levels[ids[inside]]
    return out


class RecognitionVector(namedtuple('RecognitionVector', 'channels items')):
    """RecognitionVector(channels, items)

    The recognition levels of one node at one instant, as exchanged upon a
    contact: an array of channel levels indexed by channel id and an array of
    item levels indexed by item id. Subjects past the end of an array have
    level 0."""

    __slots__ = ()

    def level(self, subject):
        levels = self.channels if isinstance(subject, Channel) else self.items
        if 0 <= subject < len(levels):
            return int(levels[subject])
        return 0


class RecognitionStore(object):
    """Per-node recognition counters.

    Channel counters hold the distinct subscribers met per channel; item
    counters hold how many encountered nodes carried each item."""

    def __init__(self):
        self.channel_subscribers = defaultdict(set)
        self._sightings = np.zeros(0, dtype=np.int64)

    def _grow(self, size):
        if size > len(self._sightings):
            self._sightings = np.concatenate(
                (self._sightings,
                 np.zeros(size - len(self._sightings), dtype=np.int64)))

    @property
    def item_sightings(self):
        """Sightings of every item seen at least once, as a dict."""
        seen = np.flatnonzero(self._sightings)
        return dict((int(i), int(self._sightings[i])) for i in seen)

    def channel_level(self, channel):
        return len(self.channel_subscribers.get(channel, ()))

    def item_level(self, item_id):
        if 0 <= item_id < len(self._sightings):
            return int(self._sightings[item_id])
        return 0

    def level(self, subject):
        if isinstance(subject, Channel):
            return self.channel_level(subject)
        return self.item_level(subject)

    def record_contact_knowledge(self, peer_id, peer_subscription, peer_items):
        """Account for one encountered node: its subscription and the items
        it advertised. Each distinct item counts once however many of the
        peer's caches hold it. This method returns the store it was called
        on."""
        self.channel_subscribers[Channel(peer_subscription)].add(peer_id)
        ids = np.fromiter(set(peer_items), dtype=np.int64)
        if len(ids):
            self._grow(int(ids.max()) + 1)
            self._sightings[ids] += 1
        return self

    def reset_items(self, item_ids):
        """Forget the sightings of the given items."""
        ids = np.fromiter(item_ids, dtype=np.int64)
        ids = ids[ids < len(self._sightings)]
        self._sightings[ids] = 0
        return self

    def _channel_levels(self, channel_count=0):
        size = max([channel_count] +
                   [int(c) + 1 for c in self.channel_subscribers])
        channels = np.zeros(size, dtype=np.int64)
        for channel, subscribers in self.channel_subscribers.items():
            channels[channel] = len(subscribers)
        return channels

    def vector(self, channel_count=0):
        """A snapshot of the current levels."""
        return RecognitionVector(self._channel_levels(channel_count),
                                 self._sightings.copy())

    def relevant(self, item_ids, channel_of, theta_c, theta_i):
        """The subset of `item_ids` that RH judges relevant; `channel_of` maps
        item ids to channels (an array indexed by item id)."""
        if not item_ids:
            return set()
        ids = np.fromiter(sorted(item_ids), dtype=np.int64)
        channel_levels = _lookup(self._channel_levels(),
                                 np.asarray(channel_of)[ids])
        item_levels = _lookup(self._sightings, ids)
        keep = (channel_levels >= theta_c) & (item_levels < theta_i)
        return set(int(i) for i in ids[keep])


def r_lev(store, subject):
    """The recognition level of an item id or a :py:class:`Channel` in a
    store (or a :py:class:`RecognitionVector`). Unknown subjects are at 0."""
    return store.level(subject)


def rh_relevant(item, store, theta_c, theta_i):
    """Is `item` relevant according to the Recognition Heuristic?"""
    return (r_lev(store, item.channel) >= theta_c and
            r_lev(store, item.id) < theta_i)


def bucket_index(mean, theta_i):
    """Discretize a (generally non-integral) mean item level: floor, clamped
    to theta_I."""
    if mean < 0:
        raise ValueError('Recognition levels are non-negative, got %r' % mean)
    return min(int(math.floor(mean)), theta_i)


def random_subset(items, size, rng):
    """A uniformly chosen `size`-subset of `items`, or all of them if there
    are not more than `size`."""
    ordered = sorted(items)
    if len(ordered) <= size:
        return set(ordered)
    if size <= 0:
        return set()
    chosen = rng.choice(len(ordered), size=size, replace=False)
    return set(ordered[i] for i in chosen)


def group_mean_levels(group_members, peer_views, self_vector, subject, j):
    """The mean recognition level of `subject` inside social group `j`.

    Group 0 is the node itself. For other groups only the members whose
    recognition vector has been received count; a group with none of them
    has mean 0."""
    if j == 0:
        return Fraction(self_vector.level(subject))
    levels = [peer_views[m].level(subject) for m in group_members
              if m in peer_views]
    if not levels:
        return Fraction(0)
    return Fraction(sum(levels), len(levels))


class GroupMeanProvider(object):
    """Mean channel and item levels of the social groups of one node.

    Means are computed lazily, one group at a time, and cached: a provider is
    meant to live for a single selection."""

    def __init__(self, groups, peer_views, self_vector, channel_of):
        self.groups = groups
        self.peer_views = peer_views
        self.self_vector = self_vector
        self.channel_of = np.asarray(channel_of, dtype=np.int64)
        self._means = {}

    def __len__(self):
        return len(self.groups)

    def levels(self, j):
        """(channel means, item means) of group `j` as float arrays."""
        if j not in self._means:
            self._means[j] = self._compute(j)
        return self._means[j]

    def _compute(self, j):
        if j == 0:
            return (self.self_vector.channels.astype(float),
                    self.self_vector.items.astype(float))
        vectors = [self.peer_views[m] for m in sorted(self.groups[j])
                   if m in self.peer_views]
        if not vectors:
            return np.zeros(0), np.zeros(0)
        channels = np.zeros(max(len(v.channels) for v in vectors))
        items = np.zeros(max(len(v.items) for v in vectors))
        for vector in vectors:
            channels[:len(vector.channels)] += vector.channels
            items[:len(vector.items)] += vector.items
        return channels / len(vectors), items / len(vectors)

    def channel_means(self, item_ids, j):
        """Group-j mean level of the channel of each item."""
        return _lookup(self.levels(j)[0], self.channel_of[item_ids])

    def item_means(self, item_ids, j):
        return _lookup(self.levels(j)[1], item_ids)

    def mean(self, subject, j):
        channels, items = self.levels(j)
        levels = channels if isinstance(subject, Channel) else items
        return float(levels[subject]) if 0 <= subject < len(levels) else 0.0


def sch_filter(items, slots, j, group_views, theta_c, theta_i, rng):
    """Prune `items` down to at most `slots` using the knowledge of social
    group `j` and, for ties, of the following groups.

    Items whose channel is recognised in the group are bucketed by their
    (floored) mean item level; buckets fill the selection from the least
    recognised up, and the first bucket that would overflow is handed down
    whole to the next group. Past the last group a uniform random choice
    decides."""
    items = sorted(set(items))
    if slots <= 0 or not items:
        return set()
    if j >= len(group_views):
        return random_subset(items, slots, rng)

    ids = np.asarray(items, dtype=np.int64)
    channel_means = group_views.channel_means(ids, j)
    item_means = group_views.item_means(ids, j)
    buckets = defaultdict(list)
    for item_id, channel_mean, item_mean in zip(items, channel_means,
                                                item_means):
        if channel_mean < theta_c:
            continue
        level = bucket_index(item_mean, theta_i)
        if level < theta_i:
            buckets[level].append(item_id)

    selected = set()
    for level in sorted(buckets):
        bucket = buckets[level]
        if len(selected) + len(bucket) > slots:
            return selected | sch_filter(bucket, slots - len(selected), j + 1,
                                         group_views, theta_c, theta_i, rng)
        selected.update(bucket)
    return selected


def select_oc_contents(local, encountered_items, group_views, theta_c,
                       theta_i, rng):
    """SCH selection of the new OC contents of `local` after meeting a node
    that advertised `encountered_items`.

    The candidates are the advertised items plus the current OC. RH picks the
    individually relevant ones; too many of them are pruned starting from the
    node's own view, too few are topped up with the candidates its social
    groups still find relevant, starting from the closest group."""
    pool = set(encountered_items) | local.oc.contents
    capacity = local.oc.capacity
    relevant = local.recognition.relevant(pool, group_views.channel_of,
                                          theta_c, theta_i)
    if len(relevant) == capacity:
        return relevant
    if len(relevant) > capacity:
        return sch_filter(relevant, capacity, 0, group_views, theta_c,
                          theta_i, rng)
    return relevant | sch_filter(pool - relevant, capacity - len(relevant), 1,
                                 group_views, theta_c, theta_i, rng)


def rh_select(local, encountered_items, channel_of, theta_c, theta_i, rng):
    """RH selection: keep the relevant candidates, dropping a random surplus
    when they do not fit."""
    pool = set(encountered_items) | local.oc.contents
    relevant = local.recognition.relevant(pool, channel_of, theta_c, theta_i)
    if len(relevant) > local.oc.capacity:
        return random_subset(relevant, local.oc.capacity, rng)
    return relevant
