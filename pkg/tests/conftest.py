import itertools

import numpy as np
import pytest

from ftnlcc.pulse_shaping import RrcParams, sample_taps, truncate_taps


def naive_codebook(n_p, taps):
    """Canonical-order windows and samples by explicit loops, independent of the library."""
    h = list(taps)
    nt = len(h)
    ht = (nt - 1) // 2
    lo = -((n_p - 1) // 2)
    offsets = list(range(lo - ht, lo + n_p + ht))
    windows, samples, labels = [], [], []
    for bits in itertools.product([0, 1], repeat=len(offsets)):
        sym = dict(zip(offsets, [2 * b - 1 for b in bits]))
        row = []
        for j in range(lo, lo + n_p):
            row.append(sum(h[ht + l] * sym[j - l] for l in range(-ht, ht + 1)))
        windows.append([sym[o] for o in offsets])
        samples.append(row)
        labels.append(sym[0])
    return np.array(windows), np.array(samples), np.array(labels)


def brute_min_distance(samples, labels):
    pos = samples[labels > 0]
    neg = samples[labels < 0]
    best = np.inf
    for s in pos:
        best = min(best, np.sqrt(((neg - s) ** 2).sum(axis=1)).min())
    return best


def brute_knn(samples, query, k, labels=None, label=None):
    diff = samples - query
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if label is not None:
        d = np.where(labels == label, d, np.inf)
    order = np.lexsort((np.arange(d.size), d))[:k]
    return order, d[order]


@pytest.fixture(scope="session")
def rrc06():
    return sample_taps(RrcParams(0.35), 0.6)


@pytest.fixture(scope="session")
def rrc06_nt5(rrc06):
    return truncate_taps(rrc06, 5)
