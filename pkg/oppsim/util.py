"""Utility functions used throughout oppsim."""

__all__ = ['zipf_weights', 'largest_remainder', 'make_rng', 'rotate']

import numpy as np


def zipf_weights(n, exponent=1.0):
    """Return the normalized Zipf probabilities for ranks 1..n, eg. 6/11,
    3/11 and 2/11 for three ranks with exponent 1."""
    if n <= 0:
        return np.zeros(0)
    raw = 1.0 / np.arange(1, n + 1) ** exponent
    return raw / raw.sum()


def largest_remainder(weights, total):
    """Apportion the integer `total` proportionally to `weights` using the
    largest remainder method. Ties in the remainders go to the lower index, so
    the result is deterministic."""
    weights = np.asarray(weights, dtype=float)
    if total < 0:
        raise ValueError('Cannot apportion a negative total: %r' % total)
    if weights.sum() <= 0:
        raise ValueError('Weights must have a positive sum.')
    quotas = weights / weights.sum() * total
    counts = np.floor(quotas + 1e-9).astype(int)
    remainders = np.maximum(quotas - counts, 0.0)
    missing = total - counts.sum()
    # stable sort keeps the lower index first among equal remainders
    for index in np.argsort(-remainders, kind='stable')[:missing]:
        counts[index] += 1
    return [int(c) for c in counts]


def make_rng(seed):
    """The single source of randomness for one run."""
    return np.random.default_rng(seed)


def rotate(values, k):
    """Rotate a sequence left by k positions."""
    values = list(values)
    if not values:
        return values
    k %= len(values)
    return values[k:] + values[:k]
