"""Clustering with inverse-optimal representatives.

Four solution methods share one data model (:class:`MlioSolution`):

* ``kmeans``: unconstrained Lloyd centroids, no recovered costs.
* ``seq``: K-means partition, then inverse learning per cluster.
* ``emb``: alternate per-cluster inverse learning with nearest-representative
  reassignment until the partition or the total loss stops changing.
* ``exact``: enumerate every partition into at most L clusters (labels up to
  permutation) and keep the global minimiser.  Small instances only.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .clustering import (Partition, _fill_empty, as_observations, assign,
                         kmeans, partition_loss)
from .errors import InstanceTooLarge
from .inverse import ClusterModel, certify, io_solve
from .metric import Metric, loss
from .polytope import boundary_distance

log = logging.getLogger(__name__)

LOSS_TIE_TOL = 1e-10
EXACT_LIMIT = 10 ** 6


class Method(str, Enum):
    KMEANS = "kmeans"
    SEQ = "seq"
    EMB = "emb"
    EXACT = "exact"
    IO = "io"


class Termination(str, Enum):
    PARTITION_FIXED = "PartitionFixed"
    LOSS_FIXED = "LossFixed"
    MAX_ITER = "MaxIter"
    EXHAUSTIVE = "Exhaustive"


@dataclass
class MlioSolution:
    partition: Partition
    models: list
    total_loss: float
    method: Method
    iterations: int = 1
    seed: int = None
    termination: Termination = Termination.EXHAUSTIVE
    metric: Metric = Metric.SQEUCLIDEAN
    unconstrained: bool = False
    # partition keys and total losses, one per EMB iteration
    history: list = field(default_factory=list)
    loss_history: list = field(default_factory=list)

    @property
    def L(self) -> int:
        return self.partition.L

    def representatives(self) -> list:
        return [None if m is None else m.z for m in self.models]


@dataclass
class PartialOptimalityReport:
    condition_i_holds: bool
    condition_ii_holds: bool
    total_loss: float
    reassigned_loss: float
    witnesses: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.condition_i_holds and self.condition_ii_holds


def _solve_clusters(X, fs, labels, L, metric, unconstrained, cache=None):
    models = []
    for l in range(L):
        idx = np.flatnonzero(labels == l)
        if idx.size == 0:
            models.append(None)
            continue
        key = (l, idx.tobytes())
        if cache is not None and key in cache:
            models.append(cache[key])
            continue
        model = io_solve(X[idx], fs, metric, unconstrained)
        if cache is not None:
            cache[key] = model
        models.append(model)
    return models


def solve_partition(X, fs, partition: Partition, metric=Metric.SQEUCLIDEAN,
                    unconstrained: bool = False, method=Method.SEQ) -> MlioSolution:
    """Inverse learning on each cluster of a given partition."""
    obs = as_observations(X)
    metric = Metric(metric)
    labels = np.asarray(partition.assign)
    models = _solve_clusters(obs.X, fs, labels, partition.L, metric, unconstrained)
    total = sum(m.loss for m in models if m is not None)
    return MlioSolution(partition, models, total, Method(method), metric=metric,
                        unconstrained=unconstrained)


def io_mlio(X, fs, metric=Metric.SQEUCLIDEAN, unconstrained: bool = False) -> MlioSolution:
    obs = as_observations(X)
    sol = solve_partition(obs, fs, Partition((0,) * obs.K, 1), metric, unconstrained, Method.IO)
    sol.termination = Termination.EXHAUSTIVE
    return sol


def kmeans_solution(X, L: int, seed: int = 42, metric=Metric.SQEUCLIDEAN,
                    max_iter: int = 500) -> MlioSolution:
    """Plain K-means wrapped as a solution; representatives are raw centroids."""
    obs = as_observations(X)
    metric = Metric(metric)
    km = kmeans(obs.X, L, seed, metric, max_iter)
    models = []
    for l, idx in enumerate(km.partition.clusters()):
        if not idx:
            models.append(None)
            continue
        z = km.centroids[l]
        models.append(ClusterModel(z=z, loss=loss(z, obs.X[idx], metric),
                                   perturbations=obs.X[idx] - z))
    total = sum(m.loss for m in models if m is not None)
    term = Termination.PARTITION_FIXED if km.converged else Termination.MAX_ITER
    return MlioSolution(km.partition, models, total, Method.KMEANS, km.iterations, seed, term, metric)


def seq_mlio(X, fs, L: int, seed: int = 42, metric=Metric.SQEUCLIDEAN, max_iter: int = 500,
             unconstrained: bool = False) -> MlioSolution:
    """Cluster first with K-means, then learn one forward model per cluster."""
    obs = as_observations(X)
    metric = Metric(metric)
    km = kmeans(obs.X, L, seed, metric, max_iter)
    sol = solve_partition(obs, fs, km.partition, metric, unconstrained, Method.SEQ)
    sol.iterations = km.iterations
    sol.seed = seed
    sol.termination = Termination.PARTITION_FIXED if km.converged else Termination.MAX_ITER
    return sol


def emb_mlio(X, fs, L: int, init=None, seed: int = 42, metric=Metric.SQEUCLIDEAN,
             max_iter: int = 500, unconstrained: bool = False) -> MlioSolution:
    """Embedded clustering and inverse learning.

    ``init`` is a starting :class:`Partition`; by default the K-means
    partition under ``seed``.  On a loss tie the partition the current
    representatives were learned on is returned, so the output is always
    consistent with its models.
    """
    obs = as_observations(X)
    Xa = obs.X
    metric = Metric(metric)
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if init is None:
        init = kmeans(Xa, L, seed, metric, max_iter).partition
    if init.L != L or init.K != obs.K:
        raise ValueError("initial partition does not match L and the observations")
    labels = np.asarray(init.assign)
    cache = {}
    history, losses = [], []
    termination = Termination.MAX_ITER
    models = None
    it = 0
    while it < max_iter:
        it += 1
        models = _solve_clusters(Xa, fs, labels, L, metric, unconstrained, cache)
        if any(m is None for m in models) and obs.K >= L:
            reps = [None if m is None else m.z for m in models]
            filled = _fill_empty(Xa, labels, reps, L, metric)
            if not np.array_equal(filled, labels):
                labels = filled
                models = _solve_clusters(Xa, fs, labels, L, metric, unconstrained, cache)
        part = Partition(tuple(labels), L)
        history.append(part.assign)
        total = sum(m.loss for m in models if m is not None)
        losses.append(total)
        reps = [None if m is None else m.z for m in models]
        new = assign(Xa, reps, metric)
        if new == part:
            termination = Termination.PARTITION_FIXED
            break
        new_total = partition_loss(Xa, new, reps, metric)
        if abs(new_total - total) <= LOSS_TIE_TOL:
            termination = Termination.LOSS_FIXED
            break
        labels = np.asarray(new.assign)
    # the partition the returned models were learned on, also under MaxIter
    part = Partition(history[-1], L)
    total = sum(m.loss for m in models if m is not None)
    return MlioSolution(part, models, total, Method.EMB, it, seed, termination, metric,
                        unconstrained, history, losses)


def exact_partition_count(K: int, L: int) -> float:
    return L ** K / math.factorial(L)


def exact_mlio(X, fs, L: int, metric=Metric.SQEUCLIDEAN, unconstrained: bool = False,
               limit: float = EXACT_LIMIT) -> MlioSolution:
    """Global optimum by enumerating restricted-growth label strings.

    Every subset's inverse-learning loss is computed once and memoised by
    bitmask.  Strings are visited in lexicographic order and only a strictly
    smaller loss replaces the incumbent, so ties go to the lexicographically
    smallest assignment.
    """
    obs = as_observations(X)
    Xa = obs.X
    metric = Metric(metric)
    K = obs.K
    if L < 1:
        raise ValueError("L must be at least 1")
    if exact_partition_count(K, L) > limit:
        raise InstanceTooLarge(
            f"exact enumeration of {K} observations into {L} clusters exceeds {limit:g} partitions")
    cache = {}

    def block(mask):
        if mask not in cache:
            idx = [k for k in range(K) if mask >> k & 1]
            cache[mask] = io_solve(Xa[idx], fs, metric, unconstrained)
        return cache[mask]

    best = [math.inf, None]
    labels = [0] * K
    masks = []

    def rec(k):
        if k == K:
            total = sum(block(mk).loss for mk in masks)
            if total < best[0] - 1e-12 * max(1.0, abs(best[0]) if best[0] < math.inf else 1.0):
                best[0], best[1] = total, tuple(labels)
            return
        for l in range(len(masks)):
            labels[k] = l
            masks[l] |= 1 << k
            rec(k + 1)
            masks[l] &= ~(1 << k)
        if len(masks) < L:
            labels[k] = len(masks)
            masks.append(1 << k)
            rec(k + 1)
            masks.pop()

    rec(0)
    part = Partition(best[1], L)
    models = []
    for idx in part.clusters():
        models.append(block(sum(1 << k for k in idx)) if idx else None)
    total = sum(m.loss for m in models if m is not None)
    return MlioSolution(part, models, total, Method.EXACT, 1, None, Termination.EXHAUSTIVE,
                        metric, unconstrained)


def fit(method, X, fs, L: int, seed: int = 42, metric=Metric.SQEUCLIDEAN, max_iter: int = 500,
        unconstrained: bool = False) -> MlioSolution:
    method = Method(method)
    if method is Method.KMEANS:
        return kmeans_solution(X, L, seed, metric, max_iter)
    if method is Method.SEQ:
        return seq_mlio(X, fs, L, seed, metric, max_iter, unconstrained)
    if method is Method.EMB:
        return emb_mlio(X, fs, L, None, seed, metric, max_iter, unconstrained)
    if method is Method.EXACT:
        sol = exact_mlio(X, fs, L, metric, unconstrained)
        sol.seed = seed
        return sol
    sol = io_mlio(X, fs, metric, unconstrained)
    sol.seed = seed
    return sol


def verify_partial_optimal(sol: MlioSolution, X, fs, metric=None,
                           rel_tol: float = 1e-9) -> PartialOptimalityReport:
    """Check both partial-optimality conditions exactly.

    (i) reassigning observations to the current representatives cannot
    lower the total loss; (ii) re-solving inverse learning on any cluster
    cannot lower that cluster's loss.
    """
    obs = as_observations(X)
    metric = Metric(metric or sol.metric)
    reps = sol.representatives()
    D = partition_loss(obs.X, sol.partition, reps, metric)
    tol = rel_tol * max(1.0, abs(D))
    best = assign(obs.X, reps, metric)
    D_best = partition_loss(obs.X, best, reps, metric)
    witnesses = []
    cond_i = D_best >= D - tol
    if not cond_i:
        for k, (a, b) in enumerate(zip(sol.partition.assign, best.assign)):
            if a != b:
                da = float(metric.distances(obs.X[k:k + 1], reps[a])[0])
                db = float(metric.distances(obs.X[k:k + 1], reps[b])[0])
                if db < da - tol:
                    witnesses.append({"condition": "i", "observation": obs.ids[k],
                                      "from": a, "to": b, "gain": da - db})
                    break
    cond_ii = True
    for l, idx in enumerate(sol.partition.clusters()):
        if not idx:
            continue
        current = float(metric.distances(obs.X[idx], reps[l]).sum())
        refit = io_solve(obs.X[idx], fs, metric, sol.unconstrained)
        if refit.loss < current - rel_tol * max(1.0, abs(current)):
            cond_ii = False
            witnesses.append({"condition": "ii", "cluster": l, "loss": current,
                              "refit_loss": refit.loss, "representative": refit.z.tolist()})
    return PartialOptimalityReport(bool(cond_i), cond_ii, D, D_best, witnesses)


def optimality_gap(sol: MlioSolution, fs) -> list:
    """Per-cluster distance from the representative to the boundary of the set (or to the set)."""
    if fs is None:
        return [None if m is None else 0.0 for m in sol.models]
    return [None if m is None else boundary_distance(fs, m.z) for m in sol.models]


@dataclass
class SweepRow:
    L: int
    method: str
    train_total: float
    train_avg: float
    test_avg: float
    gap_sum: float


def evaluate_average(sol: MlioSolution, X, metric=None) -> float:
    """Average distance from each observation to its nearest representative."""
    obs = as_observations(X)
    metric = Metric(metric or sol.metric)
    reps = sol.representatives()
    part = assign(obs.X, reps, metric)
    return partition_loss(obs.X, part, reps, metric) / obs.K


def sweep(X, fs, L_range, seed: int = 42, metric=Metric.SQEUCLIDEAN, methods=None, test=None,
          max_iter: int = 500, unconstrained: bool = False) -> list:
    """Loss-versus-L table for elbow plots.  Exact rows are skipped when too large."""
    obs = as_observations(X)
    methods = [Method(m) for m in (methods or (Method.KMEANS, Method.SEQ, Method.EMB))]
    rows = []
    for L in L_range:
        for method in methods:
            try:
                sol = fit(method, obs, fs, L, seed, metric, max_iter, unconstrained)
            except InstanceTooLarge:
                log.info("skipping exact at L=%d: instance too large", L)
                continue
            gaps = optimality_gap(sol, None if unconstrained else fs)
            test_avg = evaluate_average(sol, test, metric) if test is not None else None
            rows.append(SweepRow(L, method.value, sol.total_loss, sol.total_loss / obs.K,
                                 test_avg, float(sum(g for g in gaps if g is not None))))
    return rows


def solution_to_dict(sol: MlioSolution, X, fs) -> dict:
    obs = as_observations(X)
    gaps = optimality_gap(sol, None if sol.unconstrained else fs)
    clusters = []
    for l, idx in enumerate(sol.partition.clusters()):
        m = sol.models[l]
        clusters.append({
            "members": [obs.ids[k] for k in idx],
            "cost_vector": None if m is None or m.c_report is None else [float(v) for v in m.c_report],
            "representative": None if m is None else [float(v) for v in m.z],
            "face": None if m is None or m.face is None else int(m.face),
            "loss": 0.0 if m is None else float(m.loss),
            "gap": gaps[l],
        })
    return {
        "method": sol.method.value,
        "seed": sol.seed,
        "L": sol.L,
        "total_loss": float(sol.total_loss),
        "iterations": int(sol.iterations),
        "termination": sol.termination.value,
        "metric": sol.metric.value,
        "unconstrained": bool(sol.unconstrained),
        "clusters": clusters,
    }


def solution_from_dict(data: dict, X, fs, metric=None) -> MlioSolution:
    """Rebuild a solution from its JSON form, keeping the stored numbers as written."""
    obs = as_observations(X)
    metric = Metric(metric or data.get("metric", Metric.SQEUCLIDEAN))
    unconstrained = bool(data.get("unconstrained", False))
    index = {i: k for k, i in enumerate(obs.ids)}
    L = int(data["L"])
    clusters = data["clusters"]
    if len(clusters) != L:
        raise ValueError(f"solution declares L={L} but lists {len(clusters)} clusters")
    labels = [None] * obs.K
    models = []
    for l, c in enumerate(clusters):
        for member in c["members"]:
            k = index.get(str(member))
            if k is None:
                raise ValueError(f"unknown observation id {member!r}")
            if labels[k] is not None:
                raise ValueError(f"observation {member!r} appears in two clusters")
            labels[k] = l
        if c["representative"] is None:
            models.append(None)
            continue
        z = np.asarray(c["representative"], dtype=float)
        face = c.get("face")
        y = cost = None
        if face is not None and fs is not None:
            y = np.zeros(fs.m)
            y[face] = 1.0
            cost = fs.A[face].copy()
        c_report = None if c.get("cost_vector") is None else np.asarray(c["cost_vector"], dtype=float)
        idx = [index[str(mm)] for mm in c["members"]]
        models.append(ClusterModel(z=z, loss=float(c["loss"]), face=face, c_report=c_report,
                                   y=y, cost=cost, perturbations=obs.X[idx] - z))
    missing = [obs.ids[k] for k, a in enumerate(labels) if a is None]
    if missing:
        raise ValueError(f"observations missing from the solution: {missing[:5]}")
    return MlioSolution(Partition(tuple(labels), L), models, float(data["total_loss"]),
                        Method(data["method"]), int(data.get("iterations", 1)), data.get("seed"),
                        Termination(data.get("termination", Termination.EXHAUSTIVE.value)),
                        metric, unconstrained)


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self) -> list:
        return [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in self.checks]


def validate(sol: MlioSolution, X, fs, tol: float = 1e-8) -> ValidationReport:
    """Re-check certificates, gaps, loss bookkeeping and partial optimality."""
    obs = as_observations(X)
    metric = sol.metric
    checks = []
    for l, idx in enumerate(sol.partition.clusters()):
        m = sol.models[l]
        if m is None:
            if idx:
                checks.append((f"cluster {l} representative", False, "members but no representative"))
            continue
        actual = loss(m.z, obs.X[idx], metric) if idx else 0.0
        ok = abs(actual - m.loss) <= tol * max(1.0, abs(actual))
        checks.append((f"cluster {l} loss", ok, f"reported {m.loss:.12g}, recomputed {actual:.12g}"))
        if sol.unconstrained:
            continue
        if m.face is None:
            checks.append((f"cluster {l} certificate", False, "no recovered face"))
        else:
            res = certify(m, fs)
            bad = [k for k, v in res.items() if v > tol]
            detail = ", ".join(f"{k}={v:.3g}" for k, v in res.items())
            checks.append((f"cluster {l} certificate", not bad,
                           detail if not bad else f"{'/'.join(bad)} violated ({detail})"))
        gap = boundary_distance(fs, m.z)
        checks.append((f"cluster {l} gap", gap <= tol, f"{gap:.3g}"))
    D = partition_loss(obs.X, sol.partition, sol.representatives(), metric)
    checks.append(("total loss", abs(D - sol.total_loss) <= tol * max(1.0, abs(D)),
                   f"reported {sol.total_loss:.12g}, recomputed {D:.12g}"))
    rep = verify_partial_optimal(sol, obs, fs, metric)
    w_i = [w for w in rep.witnesses if w["condition"] == "i"]
    w_ii = [w for w in rep.witnesses if w["condition"] == "ii"]
    checks.append(("condition (i)", rep.condition_i_holds,
                   f"reassigned loss {rep.reassigned_loss:.12g}" + (f"; witness {w_i[0]}" if w_i else "")))
    checks.append(("condition (ii)", rep.condition_ii_holds,
                   "no cluster improves" if not w_ii else f"witness {w_ii[0]}"))
    return ValidationReport(checks)
