"""Bottleneck and p-Wasserstein distances between persistence diagrams.

Both diagrams are augmented with the diagonal projections of the other's
points, giving a square assignment problem under the L-infinity ground
metric. A point (b, d) costs (d - b) / 2 to send to the diagonal and
diagonal-to-diagonal matches are free.
"""
import itertools
import math

import numpy as np

from . import _assignment
from .errors import PtsError
from .persistence import PersistenceDiagram

__all__ = [
    "augmented_costs",
    "bottleneck",
    "wasserstein",
    "brute_force_distance",
    "diagram_distance",
    "BRUTE_FORCE_LIMIT",
]

BRUTE_FORCE_LIMIT = 8


def _points(X, Y, include_essential):
    """Pull (n, 2) point arrays out of two diagrams, checking compatibility."""
    if isinstance(X, PersistenceDiagram) and isinstance(Y, PersistenceDiagram):
        if X.dim != Y.dim:
            raise PtsError(f"cannot compare H{X.dim} with H{Y.dim}")
        if include_essential:
            if X.essential.any() and Y.essential.any() and X.cap != Y.cap:
                raise PtsError(
                    f"essential points capped at different values ({X.cap} vs {Y.cap})"
                )
            return X.points, Y.points
        return X.finite().points, Y.finite().points
    conv = lambda D: D.points if isinstance(D, PersistenceDiagram) else np.asarray(D, float).reshape(-1, 2)
    return conv(X), conv(Y)


def augmented_costs(a, b):
    """Square (n1+n2) cost matrix of the diagonal-augmented matching.

    Rows are the points of ``a`` followed by diagonal slots for ``b``;
    columns are the points of ``b`` followed by diagonal slots for ``a``.
    Forbidden cells (a point sent to another point's diagonal slot) are inf.
    """
    n1, n2 = a.shape[0], b.shape[0]
    n = n1 + n2
    C = np.full((n, n), np.inf)
    if n1 and n2:
        C[:n1, :n2] = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    idx1, idx2 = np.arange(n1), np.arange(n2)
    C[idx1, n2 + idx1] = (a[:, 1] - a[:, 0]) / 2.0
    C[n1 + idx2, idx2] = (b[:, 1] - b[:, 0]) / 2.0
    C[n1:, n2:] = 0.0
    return C


def bottleneck(X, Y, include_essential=False):
    """Bottleneck distance.

    The answer is always one of the finite entries of the augmented cost
    matrix, so a binary search over those values with a perfect-matching test
    at each threshold gives the exact value.
    """
    a, b = _points(X, Y, include_essential)
    if a.shape[0] + b.shape[0] == 0:
        return 0.0
    C = augmented_costs(a, b)
    cand = np.unique(C[np.isfinite(C)])
    n = C.shape[0]
    lo, hi = 0, cand.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _assignment.hopcroft_karp(C <= cand[mid]) == n:
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def wasserstein(X, Y, p=1.0, include_essential=False):
    """p-Wasserstein distance with L-infinity ground metric, via Hungarian."""
    if not p >= 1 or not np.isfinite(p):
        raise PtsError(f"p must be a finite number >= 1, got {p}")
    a, b = _points(X, Y, include_essential)
    if a.shape[0] + b.shape[0] == 0:
        return 0.0
    C = augmented_costs(a, b)
    finite = np.isfinite(C)
    W = np.where(finite, C, 0.0) ** p
    # forbidden cells get a cost no optimal assignment can afford
    W[~finite] = W.sum() + 1.0
    cols = _assignment.hungarian(W)
    # correctly rounded, so swapping the arguments gives the same bits
    total = math.fsum(W[np.arange(W.shape[0]), cols])
    return float(total ** (1.0 / p))


def brute_force_distance(X, Y, mode="bottleneck", p=1.0, include_essential=False):
    """Reference distance by enumerating every partial matching.

    Points left unmatched go to the diagonal. Only meant for tiny diagrams
    (at most ``BRUTE_FORCE_LIMIT`` points in total).
    """
    a, b = _points(X, Y, include_essential)
    n1, n2 = a.shape[0], b.shape[0]
    if n1 + n2 > BRUTE_FORCE_LIMIT:
        raise PtsError(f"brute force is limited to {BRUTE_FORCE_LIMIT} points, got {n1 + n2}")
    if mode not in ("bottleneck", "wasserstein"):
        raise PtsError(f"unknown mode {mode!r}")
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    best = np.inf
    for k in range(min(n1, n2) + 1):
        for rows in itertools.combinations(range(n1), k):
            for cols in itertools.permutations(range(n2), k):
                costs = [max(abs(a[i, 0] - b[j, 0]), abs(a[i, 1] - b[j, 1]))
                         for i, j in zip(rows, cols)]
                costs += [diag_a[i] for i in range(n1) if i not in rows]
                costs += [diag_b[j] for j in range(n2) if j not in cols]
                if not costs:
                    val = 0.0
                elif mode == "bottleneck":
                    val = max(costs)
                else:
                    val = sum(c ** p for c in costs)
                best = min(best, val)
    if mode == "wasserstein":
        best = best ** (1.0 / p)
    return float(best)


def parse_pd_metric(name):
    """Map ``bottleneck``, ``w1``, ``w2`` or ``wp:<p>`` to (kind, p)."""
    if name == "bottleneck":
        return "bottleneck", None
    if name in ("w1", "w2"):
        return "wasserstein", float(name[1])
    if name.startswith("wp:"):
        try:
            p = float(name[3:])
        except ValueError:
            raise PtsError(f"bad Wasserstein order in {name!r}") from None
        return "wasserstein", p
    raise PtsError(f"unknown diagram metric {name!r}")


def diagram_distance(X, Y, metric="w1", include_essential=False):
    kind, p = parse_pd_metric(metric)
    if kind == "bottleneck":
        return bottleneck(X, Y, include_essential)
    return wasserstein(X, Y, p, include_essential)
