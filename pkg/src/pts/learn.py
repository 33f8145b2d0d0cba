"""Nearest-neighbour classification and Gram-matrix export."""
import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PtsError
from .grassmann import GrassmannPoint, grassmann_kernel, grassmann_metric, projection_kernel
from .matching import diagram_distance, parse_pd_metric
from .persistence import PersistenceDiagram

__all__ = [
    "LabeledSet",
    "resolve_metric",
    "knn_classify",
    "gram_matrix",
    "export_gram",
    "random_split",
]


def _kind(feature):
    if isinstance(feature, (list, tuple)):
        kinds = {_kind(f) for f in feature}
        if len(kinds) != 1:
            raise PtsError("a composite feature must hold one kind of object")
        return kinds.pop()
    if isinstance(feature, PersistenceDiagram):
        return "diagram"
    if isinstance(feature, GrassmannPoint):
        return "grassmann"
    raise PtsError(f"unsupported feature type {type(feature).__name__}")


@dataclass
class LabeledSet:
    features: list
    labels: np.ndarray
    names: list = None

    def __post_init__(self):
        self.features = list(self.features)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if not self.features:
            raise PtsError("a labeled set must not be empty")
        if self.labels.shape != (len(self.features),):
            raise PtsError("need exactly one label per feature")
        if np.any(self.labels < 0):
            raise PtsError("labels must be nonnegative")
        kinds = {_kind(f) for f in self.features}
        if len(kinds) != 1:
            raise PtsError("all features of a set must be of one kind")
        self.kind = kinds.pop()

    def __len__(self):
        return len(self.features)


def resolve_metric(metric, kind=None):
    """Turn a metric name into a distance function.

    Diagram metrics: ``bottleneck``, ``w1``, ``w2``, ``wp:<p>``.
    Subspace metrics: ``geo``, ``ngeo``, ``chordal``.
    Composite features (tuples of diagrams or subspaces) are compared
    component by component and the distances summed.
    """
    if callable(metric):
        fn, needs = metric, None
    else:
        try:
            parse_pd_metric(metric)
            fn, needs = (lambda a, b: diagram_distance(a, b, metric)), "diagram"
        except PtsError:
            fn, needs = grassmann_metric(metric), "grassmann"
    if needs and kind and needs != kind:
        raise PtsError(f"metric {metric!r} does not apply to {kind} features")

    def dist(a, b):
        if isinstance(a, (list, tuple)):
            if len(a) != len(b):
                raise PtsError("composite features differ in length")
            return float(sum(fn(x, y) for x, y in zip(a, b)))
        return float(fn(a, b))

    return dist


def knn_classify(train, test, metric, k=1):
    """Majority vote among the k nearest training items.

    Neighbours are ranked by (distance, label), so the result does not depend
    on training-set order. Vote ties go to the label whose neighbours have
    the smaller summed distance, then to the lower label id.
    """
    if not 1 <= k <= len(train):
        raise PtsError(f"k must lie in [1, {len(train)}]")
    dist = resolve_metric(metric, train.kind)
    labels = train.labels
    preds = np.empty(len(test), dtype=np.int64)
    for q, item in enumerate(test):
        if _kind(item) != train.kind:
            raise PtsError("test feature kind differs from the training set")
        d = np.array([dist(item, f) for f in train.features])
        order = np.lexsort((labels, d))[:k]
        cand = np.unique(labels[order])
        votes = np.array([np.count_nonzero(labels[order] == c) for c in cand])
        sums = np.array([d[order][labels[order] == c].sum() for c in cand])
        best = np.lexsort((cand, sums, -votes))[0]
        preds[q] = cand[best]
    return preds


def gram_matrix(features, kernel="kp", conventional=False):
    fn = grassmann_kernel(kernel, conventional) if isinstance(kernel, str) else kernel
    n = len(features)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = fn(features[i], features[j])
    return G


def export_gram(labeled, path, kernel="kp", labels_path=None, conventional=False):
    """Write the kernel Gram matrix of a set of subspaces as CSV.

    The first row holds the item names. Projection-kernel matrices are
    checked for positive semidefiniteness first and a warning is issued if
    the check fails. Returns the matrix.
    """
    if labeled.kind != "grassmann":
        raise PtsError("Gram export needs Grassmann features")
    G = gram_matrix(labeled.features, kernel, conventional)
    if kernel == "kp" or kernel is projection_kernel:
        lam = np.linalg.eigvalsh(G)[0]
        if lam < -1e-8:
            warnings.warn(f"projection-kernel Gram matrix is not PSD (min eigenvalue {lam:.3g})")
    names = labeled.names or [f"item{i}" for i in range(len(labeled))]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in G:
            w.writerow([repr(float(v)) for v in row])
    if labels_path:
        with open(labels_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "label"])
            for name, lab in zip(names, labeled.labels.tolist()):
                w.writerow([name, lab])
    return G


def random_split(labels, test_per_class, seed=0):
    """Fixed-seed split taking ``test_per_class`` test items from each class.

    Returns (train_idx, test_idx), both sorted.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    test = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if test_per_class > idx.size:
            raise PtsError(f"class {c} has only {idx.size} items")
        test.extend(rng.choice(idx, test_per_class, replace=False).tolist())
    test = np.sort(np.array(test, dtype=np.int64))
    train = np.setdiff1d(np.arange(labels.size), test)
    return train, test
