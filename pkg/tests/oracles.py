"""Slow, obviously-correct reference implementations used as test oracles."""

import math

import numpy as np


def gini(labels) -> float:
    n = len(labels)
    if n == 0:
        return 0.0
    p1 = sum(labels) / n
    return 1.0 - p1 * p1 - (1.0 - p1) ** 2


def variance(values) -> float:
    n = len(values)
    if n == 0:
        return 0.0
    m = sum(values) / n
    return sum((v - m) ** 2 for v in values) / n


def brute_force_split(X, y, mode="classification", tol=1e-12):
    """Enumerate every (feature, midpoint) pair and score it from scratch.

    Returns ``(feature, threshold, score)`` or None. Ties (within ``tol``
    times max(1, parent impurity)) go to the lowest feature, then the
    smallest threshold.
    """
    X = np.asarray(X, dtype=float)
    y = [float(v) for v in y]
    imp = gini if mode == "classification" else variance
    n = len(y)
    parent = imp(y)
    candidates = []
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values, values[1:]):
            t = (lo + hi) / 2
            if t >= hi:
                t = lo
            left = [y[i] for i in range(n) if X[i, f] <= t]
            right = [y[i] for i in range(n) if X[i, f] > t]
            score = parent - (len(left) * imp(left) + len(right) * imp(right)) / n
            candidates.append((f, t, score))
    if not candidates:
        return None
    slack = tol * max(1.0, parent)
    best = max(c[2] for c in candidates)
    if best <= slack:
        return None
    return min((c for c in candidates if c[2] >= best - slack), key=lambda c: (c[0], c[1]))


def brute_force_knn(train, labels, query, k):
    """Sort every training row by (distance, index) and take a majority vote
    (a tied vote goes to class 0)."""
    out = []
    for q in query:
        dists = [(math.dist(q, row), i) for i, row in enumerate(train)]
        dists.sort()
        ones = sum(labels[i] for _, i in dists[:k])
        out.append(1 if 2 * ones > k else 0)
    return np.array(out)


def logistic_objective(w, b, X, y, C, penalty):
    total = 0.0
    for xi, yi in zip(X, y):
        s = 2 * yi - 1
        d = sum(wj * xj for wj, xj in zip(w, xi)) + b
        total += math.log1p(math.exp(-s * d)) if -s * d < 700 else -s * d
    pen = 0.5 * sum(wj * wj for wj in w) if penalty == "l2" else sum(abs(wj) for wj in w)
    return pen + C * total


def hinge_objective(w, b, Z, y, C):
    total = 0.0
    for zi, yi in zip(Z, y):
        s = 2 * yi - 1
        total += max(0.0, 1.0 - s * (float(np.dot(w, zi)) + b))
    return 0.5 * float(np.dot(w, w)) + C * total


def mean_log_loss(y, logits):
    total = 0.0
    for yi, f in zip(y, logits):
        p = 1.0 / (1.0 + math.exp(-f))
        total -= math.log(p) if yi == 1 else math.log(1.0 - p)
    return total / len(y)

