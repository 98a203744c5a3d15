"""Per-point loss metrics and their metric-consistent centroids."""
from enum import Enum

import numpy as np


class Metric(str, Enum):
    SQEUCLIDEAN = "sqeuclidean"
    L1 = "l1"

    def distances(self, X, z):
        """Distance from every row of ``X`` to ``z``."""
        diff = np.asarray(X, dtype=float) - np.asarray(z, dtype=float)
        if self is Metric.SQEUCLIDEAN:
            return np.einsum("ij,ij->i", diff, diff)
        return np.abs(diff).sum(axis=1)

    def distance_matrix(self, X, reps):
        """``K x L`` matrix of distances from observations to representatives."""
        diff = np.asarray(X, dtype=float)[:, None, :] - np.asarray(reps, dtype=float)[None, :, :]
        if self is Metric.SQEUCLIDEAN:
            return np.einsum("klj,klj->kl", diff, diff)
        return np.abs(diff).sum(axis=2)

    def centroid(self, X):
        """Unconstrained minimiser of the summed distance: mean or coordinate-wise median."""
        X = np.asarray(X, dtype=float)
        if self is Metric.SQEUCLIDEAN:
            return X.mean(axis=0)
        return np.median(X, axis=0)

    def seed_weight(self, d):
        """D^2 weight for k-means++ given this metric's distances."""
        d = np.asarray(d, dtype=float)
        return d if self is Metric.SQEUCLIDEAN else d * d


def loss(z, X, metric=Metric.SQEUCLIDEAN) -> float:
    """Summed per-point distance from ``z`` to the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    z = np.asarray(z, dtype=float).ravel()
    if X.shape[1] != z.shape[0]:
        from .errors import DimensionMismatch
        raise DimensionMismatch(f"point has length {z.shape[0]}, observations have {X.shape[1]}")
    return float(Metric(metric).distances(X, z).sum())
