"""Domain types shared by every part of the simulator: channels, data items,
the two caches a node carries, the run-wide item catalog and the per-node
state.

A node keeps the items it generated in its Local Items cache (LI), which is
never evicted, and donates a small Opportunistic Cache (OC) to carry items for
others. Everything a node knows about its surroundings (recognition counters,
the last recognition vector received from each peer, its contact history and
social groups) hangs off its :py:class:`NodeState`."""

__all__ = ['Channel', 'DataItem', 'ContractError', 'OpportunisticCache',
           'LocalItemsCache', 'ItemCatalog', 'NodeState', 'oc_replace']

import heapq
from collections import namedtuple

import numpy as np


class ContractError(Exception):
    """Raised when an internal contract is broken, eg. an OC receiving more
    items than it has slots for."""
    pass


class Channel(int):
    """Channel(id)

    A channel identifier. Channels are small non-negative integers; the
    subclass exists so that recognition lookups can tell a channel apart from
    an item id."""

    __slots__ = ()

    def __new__(cls, value):
        channel = int.__new__(cls, value)
        if channel < 0:
            raise ValueError('Channel ids are non-negative, got %r' % value)
        return channel

    def __repr__(self):
        return 'Channel(%d)' % int(self)


class DataItem(namedtuple('DataItem', 'id channel created_at expires_at')):
    """DataItem(id, channel, created_at, expires_at=None)

    An identified content unit of one channel. `expires_at` is None for items
    that live for the whole run."""

    __slots__ = ()

    def __new__(cls, id, channel, created_at, expires_at=None):
        if expires_at is not None and expires_at <= created_at:
            raise ValueError('Item %r expires at %r, not after its creation '
                             'at %r' % (id, expires_at, created_at))
        return super(DataItem, cls).__new__(cls, int(id), Channel(channel),
                                            created_at, expires_at)

    def expired(self, t):
        return self.expires_at is not None and self.expires_at <= t


class OpportunisticCache(object):
    """A bounded set of item ids carried on behalf of other nodes."""

    def __init__(self, capacity, contents=()):
        if capacity < 0:
            raise ValueError('OC capacity must be non-negative, got %r' %
                             capacity)
        self.capacity = capacity
        self.contents = set()
        self.replace(contents)

    def replace(self, new_contents):
        """Replace the whole contents of the cache. This method returns the
        cache it was called on."""
        new_contents = set(new_contents)
        if len(new_contents) > self.capacity:
            raise ContractError('%d items offered to an OC of %d slots' %
                                (len(new_contents), self.capacity))
        self.contents = new_contents
        return self

    def discard(self, item_id):
        self.contents.discard(item_id)

    def __contains__(self, item_id):
        return item_id in self.contents

    def __len__(self):
        return len(self.contents)

    def __iter__(self):
        return iter(self.contents)

    def __repr__(self):
        return 'OpportunisticCache(capacity=%r, contents=%r)' % (
            self.capacity, sorted(self.contents))


def oc_replace(oc, new_contents):
    """Materialize a selection as the new contents of `oc`. Raises
    ContractError when the selection does not fit."""
    return oc.replace(new_contents)


class LocalItemsCache(object):
    """The unbounded store of the items a node generated (or was assigned)."""

    def __init__(self, contents=()):
        self.contents = set(contents)

    def add(self, item_id):
        self.contents.add(item_id)

    def discard(self, item_id):
        self.contents.discard(item_id)

    def __contains__(self, item_id):
        return item_id in self.contents

    def __len__(self):
        return len(self.contents)

    def __iter__(self):
        return iter(self.contents)


class ItemCatalog(object):
    """Every item created during one run.

    Item ids are dense integers handed out in creation order, so the channel
    of every item can be looked up by indexing :py:meth:`channel_array`."""

    def __init__(self, channels=0):
        self._items = []
        self._by_channel = [[] for _ in range(channels)]
        self._channel_array = None
        self._expiry = []

    @property
    def channel_count(self):
        return len(self._by_channel)

    def add_channel(self):
        """Define a fresh channel and return its id."""
        self._by_channel.append([])
        return Channel(len(self._by_channel) - 1)

    def create(self, channel, created_at, expires_at=None):
        """Create an item of `channel` and return it."""
        if not 0 <= channel < self.channel_count:
            raise ValueError('Unknown channel %r (%d defined)' %
                             (channel, self.channel_count))
        item = DataItem(len(self._items), channel, created_at, expires_at)
        self._items.append(item)
        self._by_channel[item.channel].append(item.id)
        self._channel_array = None
        if expires_at is not None:
            heapq.heappush(self._expiry, (expires_at, item.id))
        return item

    def channel_of(self, item_id):
        return self._items[item_id].channel

    def channel_array(self):
        """The channel of every item as an integer array indexed by item id."""
        if self._channel_array is None:
            self._channel_array = np.fromiter(
                (item.channel for item in self._items), dtype=np.int64,
                count=len(self._items))
        return self._channel_array

    def count(self, channel):
        """Number of items ever created in `channel`, expired ones included."""
        if not 0 <= channel < self.channel_count:
            return 0
        return len(self._by_channel[channel])

    def items_of(self, channel):
        return list(self._by_channel[channel])

    def pop_expired(self, t):
        """Return the ids of the items whose expiry is at or before `t` and
        that were not returned by an earlier call."""
        expired = []
        while self._expiry and self._expiry[0][0] <= t:
            expired.append(heapq.heappop(self._expiry)[1])
        return expired

    def __getitem__(self, item_id):
        return self._items[item_id]

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


class NodeState(object):
    """A mobile node and everything it carries.

    `delivered` holds the items of the subscribed channel the node has
    consumed so far; it is reset whenever the subscription changes."""

    def __init__(self, node_id, community_id, subscription, oc_capacity,
                 is_traveller=False, position=(0.0, 0.0)):
        from oppsim.heuristics import RecognitionStore
        from oppsim.community import SocialGroups
        self.node_id = node_id
        self.community_id = community_id
        self.is_traveller = is_traveller
        self.subscription = Channel(subscription)
        self.li = LocalItemsCache()
        self.oc = OpportunisticCache(oc_capacity)
        self.recognition = RecognitionStore()
        self.peer_views = {}
        self.delivered = set()
        self.contact_history = {}
        self.groups = SocialGroups.solitary(node_id)
        self._position = tuple(position)
        self._world = None

    def bind(self, world):
        """Read positions from a mobility world from now on."""
        self._world = world
        return self

    @property
    def position(self):
        if self._world is not None:
            x, y = self._world.positions[self.node_id]
            return (float(x), float(y))
        return self._position

    def held(self):
        """Ids of every item the node can hand out: LI and OC together."""
        return self.li.contents | self.oc.contents

    def deliver(self, item_ids, catalog):
        """Mark the items of the subscribed channel among `item_ids` as
        consumed and return the ones that were new."""
        fresh = set(i for i in item_ids if i not in self.delivered and
                    catalog.channel_of(i) == self.subscription)
        self.delivered |= fresh
        return fresh

    def resubscribe(self, channel, catalog):
        """Switch to `channel`. Delivery starts over; items already held count
        as delivered for the new channel."""
        self.subscription = Channel(channel)
        self.delivered = set()
        self.deliver(self.held(), catalog)

    def record_contact(self, peer_id, t):
        from oppsim.community import ActivationRecord
        record = self.contact_history.get(peer_id)
        if record is None:
            record = self.contact_history[peer_id] = ActivationRecord(peer_id)
        record.add_contact(t)
        return record

    def expire(self, item_ids):
        for item_id in item_ids:
            self.li.discard(item_id)
            self.oc.discard(item_id)

    def __repr__(self):
        return 'NodeState(node_id=%r, community_id=%r, subscription=%r)' % (
            self.node_id, self.community_id, self.subscription)
