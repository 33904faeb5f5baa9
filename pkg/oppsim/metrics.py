"""Hit Rate and message overhead.

The Hit Rate at time t is the mean, over the nodes, of the fraction of the
items of its subscribed channel a node has received so far. Overhead counts
every message exchanged in the network, data items and control messages
alike."""

__all__ = ['MetricsError', 'MetricsSample', 'MetricsSeries', 'OverheadCounter',
           'hit_rate', 'average_runs']

import math
from collections import OrderedDict, namedtuple


class MetricsError(Exception):
    """Raised for series whose sample times do not increase or that do not
    share their sampling instants."""
    pass


MetricsSample = namedtuple('MetricsSample', 't hit_rate overhead_total '
                           'overhead_data overhead_control')


class MetricsSeries(object):
    """Time-ordered samples of one run (or of an average of runs) plus the
    metadata identifying it."""

    def __init__(self, samples=(), metadata=None):
        self.samples = []
        self.metadata = OrderedDict(metadata or ())
        for sample in samples:
            self.append(sample)

    def append(self, sample):
        """Add a sample after the last one. This method returns the series it
        was called on."""
        sample = MetricsSample(*sample)
        if self.samples and sample.t <= self.samples[-1].t:
            raise MetricsError('Sample at t=%r does not follow t=%r' %
                               (sample.t, self.samples[-1].t))
        self.samples.append(sample)
        return self

    def window(self, start):
        """The samples from `start` on, eg. from a subscription change."""
        metadata = OrderedDict(self.metadata)
        metadata['window_start'] = start
        return MetricsSeries((s for s in self.samples if s.t >= start),
                             metadata)

    @property
    def final(self):
        return self.samples[-1] if self.samples else None

    def times(self):
        return [s.t for s in self.samples]

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, index):
        return self.samples[index]

    def __eq__(self, other):
        if isinstance(other, MetricsSeries):
            return self.samples == other.samples and \
                self.metadata == other.metadata
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        if eq is NotImplemented:
            return NotImplemented
        return not eq

    __hash__ = None

    def __repr__(self):
        return '<MetricsSeries %s, %d samples>' % (dict(self.metadata),
                                                   len(self.samples))


class OverheadCounter(object):
    """Running message counts of one run."""

    def __init__(self):
        self.data = 0
        self.control = 0

    @property
    def total(self):
        return self.data + self.control

    def add(self, data=0, control=0):
        if data < 0 or control < 0:
            raise ValueError('Message counts only grow.')
        self.data += data
        self.control += control
        return self


def hit_rate(nodes, catalog, population=None):
    """Mean over `nodes` (restricted to the ids in `population` when given)
    of delivered items over items created in the subscribed channel. A node
    whose channel has no item contributes 0; no node at all gives 0."""
    if population is not None:
        nodes = [n for n in nodes if n.node_id in population]
    else:
        nodes = list(nodes)
    if not nodes:
        return 0.0
    terms = []
    for node in nodes:
        count = catalog.count(node.subscription)
        terms.append(float(len(node.delivered)) / count if count else 0.0)
    return math.fsum(terms) / len(terms)


def average_runs(series_list):
    """Pointwise mean of runs sampled at the same instants."""
    series_list = list(series_list)
    if not series_list:
        raise MetricsError('Nothing to average.')
    times = series_list[0].times()
    for series in series_list[1:]:
        if series.times() != times:
            raise MetricsError('Runs %r and %r were sampled at different '
                               'instants' % (series_list[0].metadata.get('seed'),
                                             series.metadata.get('seed')))
    metadata = OrderedDict(series_list[0].metadata)
    metadata['seed'] = 'avg'
    metadata['runs'] = len(series_list)
    averaged = MetricsSeries(metadata=metadata)
    n = float(len(series_list))
    for k, t in enumerate(times):
        column = [series[k] for series in series_list]
        averaged.append(MetricsSample(
            t,
            math.fsum(s.hit_rate for s in column) / n,
            math.fsum(s.overhead_total for s in column) / n,
            math.fsum(s.overhead_data for s in column) / n,
            math.fsum(s.overhead_control for s in column) / n))
    return averaged
