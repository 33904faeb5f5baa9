import math
import random
from unittest import TestCase

from nose.tools import *

from oppsim.core import ItemCatalog, NodeState
from oppsim.metrics import *


def catalog_with(counts):
    catalog = ItemCatalog(len(counts))
    for channel, count in enumerate(counts):
        for _ in range(count):
            catalog.create(channel, 0)
    return catalog


def node_with(node_id, channel, delivered):
    node = NodeState(node_id, 0, channel, 10)
    node.delivered = set(delivered)
    return node


def series(points, seed=1):
    return MetricsSeries([MetricsSample(t, hr, d + c, d, c)
                          for t, hr, d, c in points],
                         {'seed': seed, 'policy': 'sch'})


def test_hit_rate_everything_delivered():
    catalog = catalog_with([3, 2])
    nodes = [node_with(0, 0, catalog.items_of(0)),
             node_with(1, 1, catalog.items_of(1))]
    assert hit_rate(nodes, catalog) == 1.0


def test_hit_rate_two_nodes():
    catalog = catalog_with([100])
    items = catalog.items_of(0)
    nodes = [node_with(0, 0, items[:50]), node_with(1, 0, items)]
    assert hit_rate(nodes, catalog) == 0.75


def test_hit_rate_restricted_population():
    catalog = catalog_with([4])
    items = catalog.items_of(0)
    nodes = [node_with(0, 0, items), node_with(1, 0, []),
             node_with(2, 0, items[:2])]
    assert hit_rate(nodes, catalog, population=set([0, 2])) == 0.75


def test_hit_rate_empty_channel():
    catalog = catalog_with([2, 0])
    nodes = [node_with(0, 0, catalog.items_of(0)), node_with(1, 1, [])]
    assert hit_rate(nodes, catalog) == 0.5


def test_hit_rate_no_nodes():
    assert hit_rate([], catalog_with([1])) == 0.0


def test_hit_rate_matches_recomputation():
    rng = random.Random(99)
    for _ in range(100):
        counts = [rng.randint(1, 50) for _ in range(rng.randint(1, 5))]
        catalog = catalog_with(counts)
        nodes = []
        for node_id in range(rng.randint(1, 40)):
            channel = rng.randrange(len(counts))
            items = catalog.items_of(channel)
            nodes.append(node_with(node_id, channel,
                                   rng.sample(items, rng.randint(0, len(items)))))
        expected = math.fsum(float(len(n.delivered)) / counts[n.subscription]
                             for n in nodes) / len(nodes)
        assert hit_rate(nodes, catalog) == expected
        rng.shuffle(nodes)
        assert hit_rate(nodes, catalog) == expected


def test_series_window():
    s = series([(0, 0.1, 0, 0), (500, 0.2, 1, 2), (1000, 0.3, 4, 4)])
    window = s.window(500)
    assert window.times() == [500, 1000]
    assert window.metadata['window_start'] == 500
    assert s.final.hit_rate == 0.3


def test_empty_series_has_no_final():
    assert MetricsSeries().final is None


def test_overhead_counter():
    counter = OverheadCounter()
    counter.add(control=2).add(data=3, control=2)
    assert (counter.data, counter.control, counter.total) == (3, 4, 7)


def test_average_identical_series():
    s = series([(0, 0.25, 1, 2), (500, 0.5, 3, 4)])
    averaged = average_runs([s, s])
    assert averaged.samples == s.samples
    assert averaged.metadata['seed'] == 'avg'
    assert averaged.metadata['runs'] == 2


def test_average_hit_rates():
    a = series([(0, 0.4, 2, 2)], seed=1)
    b = series([(0, 0.6, 4, 2)], seed=2)
    sample = average_runs([a, b]).final
    assert abs(sample.hit_rate - 0.5) < 1e-12
    assert sample.overhead_data == 3.0
    assert sample.overhead_total == 5.0


def test_average_ten_runs():
    rng = random.Random(10)
    runs = []
    for seed in range(10):
        points = [(t, rng.random(), rng.randint(0, 100), rng.randint(0, 100))
                  for t in (0, 500, 1000)]
        runs.append(series(points, seed))
    averaged = average_runs(runs)
    for k in range(3):
        column = [r[k] for r in runs]
        expected = sum(s.hit_rate for s in column) / 10.0
        assert abs(averaged[k].hit_rate - expected) < 1e-12
        expected = sum(s.overhead_total for s in column) / 10.0
        assert abs(averaged[k].overhead_total - expected) < 1e-9


class TestMetricsErrors(TestCase):
    def test_times_must_increase(self):
        s = series([(0, 0.1, 0, 0)])
        self.assertRaises(MetricsError, s.append, MetricsSample(0, 0.1, 0, 0, 0))

    def test_mismatched_instants(self):
        a = series([(0, 0.1, 0, 0), (500, 0.2, 0, 0)])
        b = series([(0, 0.1, 0, 0), (600, 0.2, 0, 0)])
        self.assertRaises(MetricsError, average_runs, [a, b])

    def test_nothing_to_average(self):
        self.assertRaises(MetricsError, average_runs, [])

    def test_counts_only_grow(self):
        self.assertRaises(ValueError, OverheadCounter().add, -1)
