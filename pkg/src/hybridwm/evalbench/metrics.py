"""Ranking metrics: AUROC (Mann-Whitney with tie credit), percentile labels,
and percentile-bootstrap confidence intervals."""

import numpy as np

from ..errors import UndefinedMetricError


def auroc(scores, labels):
    """P(score of a random positive > score of a random negative), ties count 1/2.

    Computed from the Mann-Whitney U statistic via average ranks; single-class
    inputs are undefined and raise rather than silently returning 0.5.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    n1 = int(y.sum())
    n0 = len(y) - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedMetricError("AUROC needs both classes present")
    ranks = _average_ranks(s)
    u = ranks[y].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def _average_ranks(s):
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[order[j + 1]] == s[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc_bruteforce(scores, labels):
    """O(n^2) pair enumeration; the oracle the fast path is tested against."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    pos = s[y]
    neg = s[~y]
    if len(pos) == 0 or len(neg) == 0:
        raise UndefinedMetricError("AUROC needs both classes present")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (len(pos) * len(neg)))


def label_by_percentile(errors, pct=75):
    """1 iff error exceeds the nearest-rank pct-quantile of the same set."""
    e = np.asarray(errors, dtype=np.float64)
    if len(e) < 4:
        raise UndefinedMetricError(f"need at least 4 samples to label, got {len(e)}")
    srt = np.sort(e)
    idx = int(np.ceil(pct / 100.0 * len(e))) - 1
    thr = srt[max(0, min(idx, len(e) - 1))]
    return (e > thr).astype(int)


def bootstrap_ci(scores, labels, resamples=1000, level=0.95, rng=None):
    """Percentile bootstrap over trajectory resampling; deterministic given rng."""
    rng = rng if rng is not None else np.random.default_rng(0)
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    auroc(s, y)  # propagate Undefined before resampling
    n = len(s)
    values = np.empty(resamples)
    for i in range(resamples):
        for _ in range(1000):
            idx = rng.integers(0, n, size=n)
            if y[idx].any() and not y[idx].all():
                break
        else:
            raise UndefinedMetricError("could not draw a two-class bootstrap resample")
        values[i] = auroc(s[idx], y[idx])
    alpha = (1.0 - level) / 2.0
    return float(np.percentile(values, 100 * alpha)), float(np.percentile(values, 100 * (1 - alpha)))
