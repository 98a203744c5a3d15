"""Observation sets, partitions and the K-means baseline."""
import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MalformedCsv
from .metric import Metric
from .rng import Xoshiro256


@dataclass
class ObservationSet:
    X: np.ndarray
    ids: list = None
    var_names: list = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        if self.X.shape[0] < 1:
            raise ValueError("an observation set needs at least one observation")
        if self.ids is None:
            self.ids = [str(k) for k in range(self.X.shape[0])]
        self.ids = [str(i) for i in self.ids]
        if len(self.ids) != self.X.shape[0]:
            raise DimensionMismatch("ids and observations differ in length")

    @property
    def K(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "ObservationSet":
        idx = list(idx)
        return ObservationSet(self.X[idx], [self.ids[k] for k in idx], self.var_names)


def as_observations(X) -> ObservationSet:
    return X if isinstance(X, ObservationSet) else ObservationSet(X)


@dataclass(frozen=True)
class Partition:
    """Cluster label in ``[0, L)`` for every observation; clusters may be empty."""

    assign: tuple
    L: int

    def __post_init__(self):
        labels = tuple(int(a) for a in self.assign)
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if any(a < 0 or a >= self.L for a in labels):
            raise ValueError("labels must lie in [0, L)")
        object.__setattr__(self, "assign", labels)

    @property
    def K(self) -> int:
        return len(self.assign)

    def members(self, l: int) -> list:
        return [k for k, a in enumerate(self.assign) if a == l]

    def clusters(self) -> list:
        out = [[] for _ in range(self.L)]
        for k, a in enumerate(self.assign):
            out[a].append(k)
        return out

    def sizes(self) -> list:
        return [len(c) for c in self.clusters()]


def assign(X, reps, metric=Metric.SQEUCLIDEAN) -> Partition:
    """Nearest-representative assignment; ties go to the lowest cluster index.

    ``None`` entries in ``reps`` mark empty clusters and attract no observation.
    """
    X = as_observations(X).X
    metric = Metric(metric)
    live = [l for l, r in enumerate(reps) if r is not None]
    if not live:
        raise ValueError("at least one representative is required")
    R = np.array([np.asarray(reps[l], dtype=float) for l in live])
    if R.shape[1] != X.shape[1]:
        raise DimensionMismatch("representatives and observations differ in dimension")
    D = metric.distance_matrix(X, R)
    labels = np.asarray(live)[np.argmin(D, axis=1)]
    return Partition(tuple(labels), len(reps))


def kmeans_plus_plus_seed(X, L: int, seed: int = 42, metric=Metric.SQEUCLIDEAN) -> list:
    """D^2-weighted seeding; returns the chosen observation indices in pick order."""
    X = as_observations(X).X
    metric = Metric(metric)
    K = X.shape[0]
    L = min(L, K)
    rng = Xoshiro256(seed)
    chosen = [rng.integers(K)]
    best = metric.distances(X, X[chosen[0]])
    while len(chosen) < L:
        w = metric.seed_weight(best)
        w[chosen] = 0.0
        if w.sum() > 0:
            k = rng.weighted_index(w.tolist())
        else:
            rest = [i for i in range(K) if i not in chosen]
            k = rest[rng.integers(len(rest))]
        chosen.append(k)
        best = np.minimum(best, metric.distances(X, X[k]))
    return chosen


def partition_loss(X, partition: Partition, reps, metric=Metric.SQEUCLIDEAN) -> float:
    X = as_observations(X).X
    metric = Metric(metric)
    total = 0.0
    for l, idx in enumerate(partition.clusters()):
        if idx:
            total += float(metric.distances(X[idx], reps[l]).sum())
    return total


def _fill_empty(X, labels, centroids, L, metric):
    """Move the worst-served observation into each empty cluster."""
    labels = labels.copy()
    for l in range(L):
        counts = np.bincount(labels, minlength=L)
        if counts[l] > 0:
            continue
        d = np.array([metric.distances(X[k:k + 1], centroids[labels[k]])[0] for k in range(len(X))])
        d[counts[labels] < 2] = -1.0
        if d.max() < 0:
            break
        labels[int(np.argmax(d))] = l
    return labels


@dataclass
class KMeansResult:
    partition: Partition
    centroids: list
    iterations: int
    converged: bool
    history: list


def kmeans(X, L: int, seed: int = 42, metric=Metric.SQEUCLIDEAN, max_iter: int = 500) -> KMeansResult:
    """Lloyd's algorithm under ``metric`` from k-means++ seeds.

    Stops when the assignment repeats or after ``max_iter`` assignment steps.
    Centroids are always recomputed from the final partition.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    X = as_observations(X).X
    metric = Metric(metric)
    seeds = kmeans_plus_plus_seed(X, L, seed, metric)
    centroids = [X[k].copy() for k in seeds] + [None] * (L - len(seeds))
    labels = None
    history = []
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        new = np.asarray(assign(X, centroids, metric).assign)
        new = _fill_empty(X, new, centroids, L, metric)
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        centroids = [metric.centroid(X[labels == l]) if np.any(labels == l) else None
                     for l in range(L)]
        history.append(partition_loss(X, Partition(tuple(labels), L), centroids, metric))
    return KMeansResult(Partition(tuple(labels), L), centroids, it, converged, history)


def load_observations_csv(path) -> ObservationSet:
    """Read ``id,<var1>,...,<varn>`` rows into an :class:`ObservationSet`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv("empty file", 1) from None
        if len(header) < 2 or header[0].strip() != "id":
            raise MalformedCsv("header must be 'id,<var1>,...'", 1)
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedCsv(f"expected {len(header)} fields, got {len(row)}", lineno)
            try:
                vals = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise MalformedCsv(str(exc), lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise MalformedCsv("non-finite value", lineno)
            ids.append(row[0])
            rows.append(vals)
    if not rows:
        raise MalformedCsv("no observations", 2)
    return ObservationSet(np.array(rows), ids, header[1:])


def write_observations_csv(path, obs: ObservationSet, var_names=None) -> None:
    var_names = var_names or obs.var_names or [f"x{i + 1}" for i in range(obs.n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *var_names])
        for i, row in zip(obs.ids, obs.X):
            w.writerow([i, *(repr(float(v)) for v in row)])
