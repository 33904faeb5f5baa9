import itertools
import math
from fractions import Fraction
from unittest import TestCase

from nose.tools import *
import numpy as np
from scipy.stats import chisquare

from oppsim.community import SocialGroups
from oppsim.core import Channel, DataItem, ItemCatalog, NodeState
from oppsim.heuristics import *


class LevelTable(object):
    """Group means given explicitly: one dict per group for channel means
    (keyed by item) and one for item means."""

    def __init__(self, channel_means, item_means):
        self.channels = channel_means
        self.items = item_means

    def __len__(self):
        return len(self.items)

    def channel_means(self, ids, j):
        return np.array([self.channels[j][int(i)] for i in ids], dtype=float)

    def item_means(self, ids, j):
        return np.array([self.items[j][int(i)] for i in ids], dtype=float)


def table(*item_levels):
    """Every channel recognised; item means as given, one dict per group."""
    return LevelTable([dict((i, 10.0) for i in levels)
                       for levels in item_levels], list(item_levels))


def vector(channels, items):
    return RecognitionVector(np.array(channels), np.array(items))


def test_r_lev_unknown_item():
    assert r_lev(RecognitionStore(), 42) == 0
    assert r_lev(RecognitionStore(), Channel(3)) == 0


def test_r_lev_distinct_subscribers():
    store = RecognitionStore()
    for peer in (1, 2, 3):
        store.record_contact_knowledge(peer, 2, [])
    assert r_lev(store, Channel(2)) == 3


def test_record_contact_knowledge_first_meeting():
    store = RecognitionStore()
    assert store.record_contact_knowledge(9, 2, []) is store
    assert r_lev(store, Channel(2)) == 1


def test_record_contact_knowledge_same_subscriber_twice():
    store = RecognitionStore()
    store.record_contact_knowledge(9, 2, [])
    store.record_contact_knowledge(9, 2, [])
    assert r_lev(store, Channel(2)) == 1


def test_record_contact_knowledge_deduplicates_items():
    store = RecognitionStore()
    peer = NodeState(9, 0, 2, 10)
    peer.li.add(7)
    peer.oc.replace([7])
    store.record_contact_knowledge(peer.node_id, peer.subscription,
                                   list(peer.li) + list(peer.oc))
    assert r_lev(store, 7) == 1
    assert store.item_sightings == {7: 1}


def test_item_level_does_not_confuse_channels():
    store = RecognitionStore()
    store.record_contact_knowledge(1, 0, [0])
    assert r_lev(store, 0) == 1
    assert r_lev(store, Channel(0)) == 1
    store.record_contact_knowledge(2, 0, [])
    assert r_lev(store, 0) == 1
    assert r_lev(store, Channel(0)) == 2


def test_reset_items():
    store = RecognitionStore()
    store.record_contact_knowledge(1, 0, [0, 1, 2])
    store.reset_items([1, 2, 99])
    assert store.item_sightings == {0: 1}


def test_rh_relevant():
    item = DataItem(0, 0, 0)
    assert rh_relevant(item, vector([3], [0]), 3, 3)
    assert not rh_relevant(item, vector([2], [0]), 3, 3)
    assert not rh_relevant(item, vector([5], [3]), 3, 3)


def test_bucket_index():
    assert bucket_index(0.0, 3) == 0
    assert bucket_index(1.5, 3) == 1
    assert bucket_index(7.2, 3) == 3
    assert bucket_index(Fraction(5, 2), 3) == 2


def test_bucket_index_monotone():
    rng = np.random.default_rng(11)
    means = np.sort(rng.random(500) * 20)
    buckets = [bucket_index(m, 7) for m in means]
    assert buckets == sorted(buckets)


def test_group_mean_levels_self():
    self_vector = vector([0], [0, 0, 4])
    assert group_mean_levels(set([0]), {}, self_vector, 2, 0) == 4


def test_group_mean_levels_mean():
    views = {1: vector([0], [2]), 2: vector([0], [4])}
    assert group_mean_levels(set([1, 2]), views, None, 0, 1) == 3


def test_group_mean_levels_excludes_unknown_members():
    views = {1: vector([0], [5])}
    assert group_mean_levels(set([1, 2, 3]), views, None, 0, 1) == 5


def test_group_mean_levels_empty_group():
    assert group_mean_levels(set([1, 2]), {}, None, 0, 1) == 0


def test_group_mean_provider_pads_short_vectors():
    groups = SocialGroups(0, [[1, 2]])
    views = {1: vector([4], [2]), 2: vector([2, 6], [4, 8])}
    provider = GroupMeanProvider(groups, views, vector([1, 1], [0, 0]),
                                 np.array([0, 1]))
    assert provider.mean(Channel(0), 1) == 3.0
    assert provider.mean(Channel(1), 1) == 3.0
    assert provider.mean(1, 1) == 4.0
    assert provider.mean(1, 0) == 0.0
    assert list(provider.item_means(np.array([0, 1]), 1)) == [3.0, 4.0]
    assert list(provider.channel_means(np.array([0, 1]), 1)) == [3.0, 3.0]


def test_group_mean_provider_matches_group_mean_levels():
    rng = np.random.default_rng(5)
    groups = SocialGroups(0, [[1, 2, 3], [4, 5]])
    views = {}
    for peer in (1, 2, 4):
        views[peer] = vector(rng.integers(0, 6, 3),
                             rng.integers(0, 6, rng.integers(1, 8)))
    self_vector = vector(rng.integers(0, 6, 3), rng.integers(0, 6, 8))
    provider = GroupMeanProvider(groups, views, self_vector,
                                 np.zeros(8, dtype=int))
    for j in range(len(groups)):
        for item in range(8):
            expected = group_mean_levels(groups[j], views, self_vector, item, j)
            assert abs(provider.mean(item, j) - float(expected)) < 1e-12
        for channel in range(3):
            expected = group_mean_levels(groups[j], views, self_vector,
                                         Channel(channel), j)
            assert abs(provider.mean(Channel(channel), j) -
                       float(expected)) < 1e-12


def test_sch_filter_fills_buckets_exactly():
    rng = np.random.default_rng(0)
    levels = table({0: 0, 1: 0, 2: 1, 3: 2})
    assert sch_filter([0, 1, 2, 3], 3, 0, levels, 3, 3, rng) == set([0, 1, 2])


def test_sch_filter_recurses_into_overflowing_bucket():
    levels = table({0: 0, 1: 1, 2: 1, 3: 1})
    seen = set()
    for seed in range(50):
        result = sch_filter([0, 1, 2, 3], 2, 0, levels, 3, 3,
                            np.random.default_rng(seed))
        assert len(result) == 2
        assert 0 in result
        seen.add(frozenset(result))
    assert seen == set([frozenset([0, 1]), frozenset([0, 2]),
                        frozenset([0, 3])])


def test_sch_filter_next_group_decides():
    levels = table({0: 0, 1: 1, 2: 1, 3: 1}, {1: 2, 2: 0, 3: 1})
    result = sch_filter([0, 1, 2, 3], 2, 0, levels, 3, 3,
                        np.random.default_rng(0))
    assert result == set([0, 2])


def test_sch_filter_excludes_unrecognised_channels():
    levels = LevelTable([{0: 3.0, 1: 2.999, 2: 5.0}], [{0: 0, 1: 0, 2: 0}])
    assert sch_filter([0, 1, 2], 3, 0, levels, 3, 3,
                      np.random.default_rng(0)) == set([0, 2])


def test_sch_filter_drops_recognised_items():
    levels = table({0: 0, 1: 3, 2: 9.5})
    assert sch_filter([0, 1, 2], 3, 0, levels, 3, 3,
                      np.random.default_rng(0)) == set([0])


def test_sch_filter_degenerate_inputs():
    rng = np.random.default_rng(0)
    levels = table({0: 0})
    assert sch_filter([], 3, 0, levels, 3, 3, rng) == set()
    assert sch_filter([0], 0, 0, levels, 3, 3, rng) == set()


def test_sch_filter_single_bucket_terminates():
    levels = table(dict((i, 0) for i in range(6)), dict((i, 1) for i in range(6)))
    result = sch_filter(range(6), 4, 0, levels, 3, 3, np.random.default_rng(2))
    assert len(result) == 4


def test_sch_filter_past_last_group_is_uniform():
    items = ['a', 'b', 'c', 'd', 'e']
    subsets = [frozenset(s) for s in itertools.combinations(items, 2)]
    counts = dict((s, 0) for s in subsets)
    rng = np.random.default_rng(1234)
    for _ in range(5000):
        result = sch_filter(items, 2, 1, LevelTable([{}], [{}]), 3, 3, rng)
        counts[frozenset(result)] += 1
    assert sum(counts.values()) == 5000
    assert chisquare([counts[s] for s in subsets]).pvalue > 0.01


def test_sch_filter_is_deterministic():
    levels = table(dict((i, i % 3) for i in range(10)))
    first = sch_filter(range(10), 4, 0, levels, 3, 3, np.random.default_rng(9))
    second = sch_filter(range(10), 4, 0, levels, 3, 3, np.random.default_rng(9))
    assert first == second


def trace_oracle(items, slots, j, channel_levels, item_levels, theta_c,
                 theta_i):
    """Walk the social filtering by hand: returns (forced, pool, k), meaning
    the result is `forced` plus k items drawn at random from `pool`."""
    items = set(items)
    if slots <= 0 or not items:
        return set(), set(), 0
    if j >= len(item_levels):
        if len(items) <= slots:
            return items, set(), 0
        return set(), items, slots
    filled = set()
    for level in range(theta_i):
        bucket = set(s for s in items
                     if channel_levels[j][s] >= theta_c and
                     math.floor(item_levels[j][s]) == level)
        if len(filled) + len(bucket) > slots:
            forced, pool, k = trace_oracle(bucket, slots - len(filled), j + 1,
                                           channel_levels, item_levels,
                                           theta_c, theta_i)
            return filled | forced, pool, k
        filled |= bucket
    return filled, set(), 0


def test_sch_filter_matches_trace_oracle():
    rng = np.random.default_rng(2024)
    for case in range(10000):
        size = int(rng.integers(0, 9))
        slots = int(rng.integers(0, 5))
        groups = int(rng.integers(1, 4))
        j = int(rng.integers(0, 2))
        theta_c = int(rng.integers(1, 4))
        theta_i = int(rng.integers(1, 4))
        items = list(range(size))
        channel_levels = [dict((i, rng.integers(0, 9) / 2.0) for i in items)
                          for _ in range(groups)]
        item_levels = [dict((i, rng.integers(0, 9) / 2.0) for i in items)
                       for _ in range(groups)]
        levels = LevelTable(channel_levels, item_levels)
        result = sch_filter(items, slots, j, levels, theta_c, theta_i, rng)
        forced, pool, k = trace_oracle(items, slots, j, channel_levels,
                                       item_levels, theta_c, theta_i)
        assert len(result) <= slots, case
        assert result <= set(items), case
        assert forced <= result, case
        assert result - forced <= pool, case
        assert len(result - forced) == k, case


class TestSelection(TestCase):
    """One node with three items of channel 0 at item levels 0, 1 and 2."""

    def setUp(self):
        self.catalog = ItemCatalog(1)
        for _ in range(3):
            self.catalog.create(0, 0)
        self.node = NodeState(0, 0, 0, 2)
        store = self.node.recognition
        store.record_contact_knowledge(10, 0, [1, 2])
        store.record_contact_knowledge(11, 0, [2])
        store.record_contact_knowledge(12, 0, [])

    def views(self):
        return GroupMeanProvider(self.node.groups, self.node.peer_views,
                                 self.node.recognition.vector(1),
                                 self.catalog.channel_array())

    def test_empty_pool(self):
        result = select_oc_contents(self.node, set(), self.views(), 3, 3,
                                    np.random.default_rng(0))
        self.assertEqual(result, set())

    def test_too_many_relevant(self):
        result = select_oc_contents(self.node, set([0, 1, 2]), self.views(),
                                    3, 3, np.random.default_rng(0))
        self.assertEqual(result, set([0, 1]))

    def test_exactly_full(self):
        self.node.oc = self.node.oc.__class__(3)
        result = select_oc_contents(self.node, set([0, 1, 2]), self.views(),
                                    3, 3, np.random.default_rng(0))
        self.assertEqual(result, set([0, 1, 2]))

    def test_current_oc_is_a_candidate(self):
        self.node.oc.replace([0])
        result = select_oc_contents(self.node, set([1, 2]), self.views(),
                                    3, 3, np.random.default_rng(0))
        self.assertEqual(result, set([0, 1]))

    def test_top_up_from_closest_group(self):
        # with RT 1 only item 0 is individually relevant
        self.node.groups = SocialGroups(0, [[10]])
        self.node.peer_views[10] = vector([3], [0, 0, 5])
        result = select_oc_contents(self.node, set([0, 1, 2]), self.views(),
                                    3, 1, np.random.default_rng(0))
        self.assertEqual(result, set([0, 1]))

    def test_rh_keeps_relevant_only(self):
        self.node.oc = self.node.oc.__class__(10)
        result = rh_select(self.node, set([0, 1, 2]),
                           self.catalog.channel_array(), 3, 2,
                           np.random.default_rng(0))
        self.assertEqual(result, set([0, 1]))

    def test_rh_random_surplus(self):
        result = rh_select(self.node, set([0, 1, 2]),
                           self.catalog.channel_array(), 3, 3,
                           np.random.default_rng(0))
        self.assertEqual(len(result), 2)
        self.assertTrue(result <= set([0, 1, 2]))

    def test_unrecognised_channel_without_groups_is_random(self):
        result = select_oc_contents(self.node, set([0, 1, 2]), self.views(),
                                    4, 3, np.random.default_rng(0))
        self.assertEqual(len(result), 2)

    def test_unrecognised_channel_in_every_group(self):
        self.node.groups = SocialGroups(0, [[10]])
        self.node.peer_views[10] = vector([3], [0, 0, 0])
        result = select_oc_contents(self.node, set([0, 1, 2]), self.views(),
                                    4, 3, np.random.default_rng(0))
        self.assertEqual(result, set())
