"""Inverse learning for one homogeneous group of observations.

Given observations ``X0`` and the set ``{x : A x >= b}``, find a point ``z``
on the boundary minimising the summed distance to ``X0`` together with a
cost vector and dual multipliers certifying that ``z`` is optimal for the
forward linear program.  The problem decomposes over constraint rows: for
each row ``j`` minimise the loss over ``{A z >= b, a_j z = b_j}`` and keep
the best row, with ``y = e_j``.
"""
from dataclasses import dataclass

import numpy as np

from . import solvers
from .clustering import as_observations
from .errors import NoAttainableFace
from .metric import Metric, loss
from .solvers import LpStatus, ProjectionStatus

CERT_TOL = 1e-8


@dataclass
class ClusterModel:
    """Recovered forward model for one cluster.

    ``cost`` is the certificate-orientation cost (``z`` minimises
    ``cost . x``); ``c_report`` is the same preference in maximise
    orientation, scaled to unit L1 norm.  Unconstrained fits carry a zero
    ``c_report`` and no dual.
    """

    z: np.ndarray
    loss: float
    face: int = None
    c_report: np.ndarray = None
    y: np.ndarray = None
    cost: np.ndarray = None
    perturbations: np.ndarray = None


def report_cost(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return -a / np.abs(a).sum()


def _face_model(fs, j, z, X, metric):
    a = fs.A[j]
    y = np.zeros(fs.m)
    y[j] = 1.0
    return ClusterModel(z=z, loss=loss(z, X, metric), face=j, c_report=report_cost(a),
                        y=y, cost=a.copy(), perturbations=X - z)


def _l1_face_solve(fs, j, X):
    """Exact L1 subproblem on face ``j`` as an LP over ``(z, u)``.

    Each coordinate's summed absolute deviation is convex piecewise linear;
    its epigraph is the K + 1 linear pieces between sorted observations.
    """
    K, n = X.shape
    m = fs.m
    rows, rhs = [], []
    for i in range(m):
        rows.append(np.concatenate([fs.A[i], np.zeros(n)]))
        rhs.append(fs.b[i])
    rows.append(np.concatenate([-fs.A[j], np.zeros(n)]))
    rhs.append(-fs.b[j])
    for i in range(n):
        v = np.sort(X[:, i])
        total = v.sum()
        below = 0.0
        for p in range(K + 1):
            if p > 0:
                below += v[p - 1]
            row = np.zeros(2 * n)
            row[i] = -(2 * p - K)
            row[n + i] = 1.0
            rows.append(row)
            rhs.append((total - below) - below)
    c = np.concatenate([np.zeros(n), np.ones(n)])
    sol = solvers.solve_lp(c, A=np.array(rows), b=np.array(rhs), tol=fs.tol)
    if sol.status is not LpStatus.OPTIMAL:
        return None
    return sol.x_star[:n]


def face_candidate(fs, j: int, X, metric=Metric.SQEUCLIDEAN):
    """Best point on face ``j`` for observations ``X``, or ``None`` if the face is empty."""
    metric = Metric(metric)
    if metric is Metric.SQEUCLIDEAN:
        proj = solvers.project_onto_face(X.mean(axis=0), fs, j)
        if proj.status is ProjectionStatus.FACE_INFEASIBLE:
            return None
        return proj.z
    if fs.face_point(j) is None:
        return None
    return _l1_face_solve(fs, j, X)


def io_solve(X0, fs=None, metric=Metric.SQEUCLIDEAN, unconstrained: bool = False) -> ClusterModel:
    """Solve the inverse-learning problem for one cluster.

    Faces are scanned in index order and a face replaces the incumbent only
    on a strictly smaller loss, so ties resolve to the lowest index.
    """
    X = as_observations(X0).X
    metric = Metric(metric)
    if unconstrained:
        z = metric.centroid(X)
        return ClusterModel(z=z, loss=loss(z, X, metric), c_report=np.zeros(X.shape[1]),
                            perturbations=X - z)
    best = None
    for j in fs.candidate_faces():
        z = face_candidate(fs, j, X, metric)
        if z is None:
            continue
        val = loss(z, X, metric)
        if best is None or val < best[0] - 1e-12 * max(1.0, abs(best[0])):
            best = (val, j, z)
    if best is None:
        raise NoAttainableFace("no candidate face of the feasible set is attainable")
    return _face_model(fs, best[1], best[2], X, metric)


def certify(model: ClusterModel, fs) -> dict:
    """Residuals of the optimality certificate carried by ``model``."""
    z, y = np.asarray(model.z, dtype=float), np.asarray(model.y, dtype=float)
    chat = fs.A.T @ y
    out = {
        "primal": float(max(0.0, (fs.b - fs.A @ z).max())),
        "strong_duality": float(abs(chat @ z - fs.b @ y)),
        "dual_feasibility": float(max(0.0, -y.min())),
        "normalization": float(abs(y.sum() - 1.0)),
    }
    if model.cost is not None:
        out["dual_feasibility"] = max(out["dual_feasibility"],
                                      float(np.abs(chat - model.cost).max()))
    if model.c_report is not None and np.abs(chat).sum() > 0:
        out["orientation"] = float(np.abs(np.asarray(model.c_report) - report_cost(chat)).max())
    return out


def certified(model: ClusterModel, fs, tol: float = CERT_TOL) -> bool:
    return all(v <= tol for v in certify(model, fs).values())
