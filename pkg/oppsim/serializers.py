__all__ = ['series_filename', 'serialize_csv', 'serialize_gnuplot',
           'serialize_summary', 'EventLog', 'utc_timestamp', 'CSV_HEADER']

import csv
import datetime

import numpy as np
import pytz
import simplejson

CSV_HEADER = ['t', 'hit_rate', 'overhead_total', 'overhead_data',
              'overhead_control']


def utc_timestamp():
    return datetime.datetime.now(pytz.UTC).isoformat()


def _number(value):
    """Fixed formatting so that reruns write identical bytes."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return '%d' % value
    return '%.6f' % value


def series_filename(meta, suffix='.csv'):
    """File name of a run (or of an average, whose seed is 'avg'):
    <tag>_<scenario>_<policy>_rt<RT>_seed<seed><suffix>. Windowed series get
    _from<start> before the suffix."""
    name = '%s_%s_%s_rt%s_seed%s' % (meta.get('tag', 'run'), meta['scenario'],
                                     meta['policy'], meta['rt'], meta['seed'])
    if meta.get('window_start') is not None:
        name += '_from%s' % meta['window_start']
    return name + suffix


def serialize_csv(series, f):
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for sample in series:
        writer.writerow([_number(v) for v in sample])


def serialize_gnuplot(series, f):
    """Write a series as whitespace separated columns under a commented
    header, ready for gnuplot's plot command."""
    for key, value in series.metadata.items():
        f.write('# %s: %s\n' % (key, value))
    f.write('# ' + ' '.join(CSV_HEADER) + '\n')
    for sample in series:
        f.write(' '.join(_number(v) for v in sample) + '\n')


def _plain(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('%r is not JSON serializable' % (value,))


def serialize_summary(summary, f):
    simplejson.dump(summary, f, indent=2, sort_keys=True, default=_plain)
    f.write('\n')


class EventLog(object):
    """Write simulation events as JSON lines: one object per event with the
    time, the kind of event and its payload."""

    def __init__(self, f):
        self.f = f

    def emit(self, t, kind, **payload):
        record = dict(payload)
        record['t'] = t
        record['kind'] = kind
        self.f.write(simplejson.dumps(record, sort_keys=True, default=_plain))
        self.f.write('\n')
