"""LP and projection solvers over polyhedra ``{x : A x >= b}``.

The LP is a dense-tableau two-phase primal simplex with Bland's rule on the
standard-form lift ``x = x+ - x-``, ``A x - s = b``.  Every optimal basis is
re-solved from the original data at the end so that the returned primal and
dual vectors satisfy the optimality certificate to machine precision.

The projection solver is a primal active-set method for
``min ||z - p||^2`` subject to ``A z >= b`` plus optional equality rows.
Functions take either a feasible-set object (anything with ``A``, ``b`` and
``tol`` attributes) or raw arrays, so this module has no dependency on the
polytope types.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


class ProjectionStatus(str, Enum):
    OPTIMAL = "Optimal"
    FACE_INFEASIBLE = "FaceInfeasible"


@dataclass
class LpSolution:
    """Result of :func:`solve_lp`.

    ``y`` certifies minimality of ``internal_cost`` (``c`` for MIN, ``-c``
    for MAX): ``A'y = internal_cost``, ``y >= 0`` and
    ``internal_cost . x_star = b . y``.
    """

    status: LpStatus
    x_star: np.ndarray = None
    objective: float = None
    y: np.ndarray = None
    tight_rows: tuple = ()
    internal_cost: np.ndarray = None
    ray: np.ndarray = None
    iterations: int = 0


@dataclass
class Phase1Result:
    feasible: bool
    x: np.ndarray = None
    farkas: np.ndarray = None


@dataclass
class Projection:
    status: ProjectionStatus
    z: np.ndarray = None
    sq_distance: float = None
    active: tuple = ()
    # KKT multipliers: 2 (z - p) = sum_i mu_i a_i with mu_i >= 0 on inequality rows
    multipliers: dict = field(default_factory=dict)
    iterations: int = 0


def _unpack(set_or_A, b=None):
    if b is None:
        return np.asarray(set_or_A.A, dtype=float), np.asarray(set_or_A.b, dtype=float)
    return np.asarray(set_or_A, dtype=float), np.asarray(b, dtype=float)


class _Tableau:
    """Dense simplex tableau for ``min cost . w, M w = rhs, w >= 0`` with ``rhs >= 0``.

    Columns ``0..N-1`` are structural, ``N..N+m-1`` artificial.
    """

    def __init__(self, M, rhs):
        m, N = M.shape
        self.m, self.N = m, N
        T = np.zeros((m + 1, N + m + 1))
        T[:m, :N] = M
        T[:m, N:N + m] = np.eye(m)
        T[:m, -1] = rhs
        self.T = T
        self.basis = list(range(N, N + m))
        self.iterations = 0

    def set_cost(self, cost):
        T, m = self.T, self.m
        full = np.zeros(T.shape[1] - 1)
        full[:len(cost)] = cost
        cb = full[self.basis]
        T[m, :-1] = full - cb @ T[:m, :-1]
        T[m, -1] = -cb @ T[:m, -1]

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = q
        self.iterations += 1

    def run(self, allowed, max_iter=100000):
        """Bland's-rule pivots until optimal; return ``None`` or an unbounded column."""
        T, m = self.T, self.m
        while True:
            if self.iterations > max_iter:
                raise RuntimeError("simplex iteration limit exceeded")
            d = T[m, :allowed]
            cand = np.flatnonzero(d < -PIVOT_TOL)
            if cand.size == 0:
                return None
            q = int(cand[0])
            colq = T[:m, q]
            rows = np.flatnonzero(colq > PIVOT_TOL)
            if rows.size == 0:
                return q
            ratios = T[rows, -1] / colq[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, q)

    def drive_out_artificials(self):
        T, m, N = self.T, self.m, self.N
        for r in range(m):
            if self.basis[r] >= N:
                row = T[r, :N]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    self.pivot(r, int(nz[0]))


def _standard_form(A, b):
    m, n = A.shape
    sigma = np.where(b < 0, -1.0, 1.0)
    M = np.hstack([A, -A, -np.eye(m)]) * sigma[:, None]
    return M, b * sigma, sigma


def _polish(M, rhs, basis, cost_full):
    """Recompute basic primal values and simplex multipliers from original data."""
    m = M.shape[0]
    Bcols = np.zeros((m, m))
    cb = np.zeros(m)
    for i, k in enumerate(basis):
        if k < M.shape[1]:
            Bcols[:, i] = M[:, k]
            cb[i] = cost_full[k]
        else:
            Bcols[k - M.shape[1], i] = 1.0
    try:
        wb = np.linalg.solve(Bcols, rhs)
        pi = np.linalg.solve(Bcols.T, cb)
    except np.linalg.LinAlgError:
        wb = np.linalg.lstsq(Bcols, rhs, rcond=None)[0]
        pi = np.linalg.lstsq(Bcols.T, cb, rcond=None)[0]
    w = np.zeros(M.shape[1])
    for i, k in enumerate(basis):
        if k < M.shape[1]:
            w[k] = wb[i]
    return w, pi


def _phase1(A, b):
    M, rhs, sigma = _standard_form(A, b)
    tab = _Tableau(M, rhs)
    m, N = M.shape
    cost = np.zeros(N + m)
    cost[N:] = 1.0
    tab.set_cost(cost)
    tab.run(N + m)
    infeas = -tab.T[m, -1]
    return tab, M, rhs, sigma, infeas


def phase1_feasible(A, b, tol: float = FEAS_TOL) -> Phase1Result:
    """Find a point with ``A x >= b - tol`` or a Farkas certificate of emptiness.

    The certificate ``y`` satisfies ``y >= 0``, ``A'y = 0`` and ``b . y > 0``.
    """
    A, b = _unpack(A, b)
    m, n = A.shape
    tab, M, rhs, sigma, infeas = _phase1(A, b)
    if infeas > tol:
        # reduced cost of artificial i is 1 - pi_i
        pi = 1.0 - tab.T[m, M.shape[1]:M.shape[1] + m]
        y = sigma * pi
        y[np.abs(y) < 1e-14] = 0.0
        scale = np.abs(y).max()
        return Phase1Result(False, farkas=y / scale if scale > 0 else y)
    tab.drive_out_artificials()
    w, _ = _polish(M, rhs, tab.basis, np.zeros(M.shape[1]))
    x = w[:n] - w[n:2 * n]
    return Phase1Result(True, x=x)


def solve_lp(c, feasible_set=None, sense=Sense.MIN, *, A=None, b=None,
             tol: float = FEAS_TOL) -> LpSolution:
    """Solve ``min`` or ``max`` of ``c . x`` over ``{x : A x >= b}``."""
    if feasible_set is not None:
        A, b = _unpack(feasible_set)
        tol = getattr(feasible_set, "tol", tol)
    else:
        A, b = _unpack(A, b)
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if c.shape[0] != n:
        raise DimensionMismatch(f"cost has length {c.shape[0]}, expected {n}")
    sense = Sense(sense)
    internal = c if sense is Sense.MIN else -c

    tab, M, rhs, sigma, infeas = _phase1(A, b)
    if infeas > tol:
        return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
    tab.drive_out_artificials()
    N = M.shape[1]
    cost_full = np.concatenate([internal, -internal, np.zeros(m)])
    tab.set_cost(cost_full)
    q = tab.run(N)
    if q is not None:
        # moving along column q: w_q += t, w_B -= t * T[:, q]
        dw = np.zeros(N + m)
        dw[q] = 1.0
        for i, k in enumerate(tab.basis):
            dw[k] -= tab.T[i, q]
        ray = dw[:n] - dw[n:2 * n]
        ray = ray / np.abs(ray).max()
        return LpSolution(LpStatus.UNBOUNDED, ray=ray, internal_cost=internal,
                          iterations=tab.iterations)

    w, pi = _polish(M, rhs, tab.basis, cost_full)
    x = w[:n] - w[n:2 * n]
    y = sigma * pi
    y[np.abs(y) < 1e-15] = 0.0
    val = float(c @ x)
    slack = A @ x - b
    tight = tuple(int(j) for j in np.flatnonzero(np.abs(slack) <= tol))
    return LpSolution(LpStatus.OPTIMAL, x_star=x, objective=val, y=y,
                      tight_rows=tight, internal_cost=internal,
                      iterations=tab.iterations)


def lp_certificate_residuals(sol: LpSolution, A, b) -> dict:
    """Residuals of the optimality certificate carried by an optimal :class:`LpSolution`."""
    A, b = _unpack(A, b)
    x, y, cost = sol.x_star, sol.y, sol.internal_cost
    slack = A @ x - b
    return {
        "primal": float(max(0.0, -slack.min())),
        "dual_sign": float(max(0.0, -y.min())),
        "stationarity": float(np.abs(A.T @ y - cost).max()),
        "complementarity": float(np.abs(y * slack).max()),
        "gap": float(abs(cost @ x - b @ y)),
    }


def _active_set(p, A, b, z0, eq_rows, tol, max_iter=None):
    """Primal active-set for ``min ||z - p||^2`` from feasible ``z0``.

    Rows in ``eq_rows`` stay in the working set permanently.
    """
    m, n = A.shape
    if max_iter is None:
        max_iter = 20 * (m + n) + 100
    scale = max(1.0, float(np.abs(p).max()), float(np.abs(z0).max()))
    z = z0.astype(float).copy()
    W = list(eq_rows)
    eq = set(eq_rows)
    for it in range(1, max_iter + 1):
        if W:
            AW = A[W]
            G = AW @ AW.T
            r = AW @ p - b[W]
            try:
                lam = np.linalg.solve(G, r)
            except np.linalg.LinAlgError:
                lam = np.linalg.lstsq(G, r, rcond=None)[0]
            zw = p - AW.T @ lam
        else:
            lam = np.zeros(0)
            zw = p.copy()
        d = zw - z
        if np.abs(d).max() <= 1e-12 * scale:
            z = zw
            mu = -2.0 * lam
            worst, worst_k = -1e-10 * scale, None
            for k, row in enumerate(W):
                if row in eq:
                    continue
                if mu[k] < worst:
                    worst, worst_k = mu[k], k
            if worst_k is None:
                return z, W, {row: float(mu[k]) for k, row in enumerate(W)}, it
            del W[worst_k]
            continue
        Ad = A @ d
        slack = A @ z - b
        alpha, block = 1.0, None
        inW = np.zeros(m, dtype=bool)
        inW[W] = True
        cand = np.flatnonzero((Ad < -1e-13 * scale) & ~inW)
        if cand.size:
            ratios = np.maximum(slack[cand], 0.0) / -Ad[cand]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha, block = float(ratios[k]), int(cand[k])
        z = z + alpha * d
        if block is not None:
            W.append(block)
    raise RuntimeError("active-set projection did not converge")


def _project(p, A, b, tol, eq_rows, z0):
    p = np.asarray(p, dtype=float)
    z, W, mult, it = _active_set(p, A, b, z0, eq_rows, tol)
    return Projection(ProjectionStatus.OPTIMAL, z=z, sq_distance=float(((z - p) ** 2).sum()),
                      active=tuple(W), multipliers=mult, iterations=it)


def face_point(A, b, j: int, tol: float = FEAS_TOL):
    """A point of ``{A z >= b, a_j z = b_j}`` or ``None`` when that face is empty."""
    A, b = _unpack(A, b)
    Aj = np.vstack([A, -A[j]])
    bj = np.append(b, -b[j])
    res = phase1_feasible(Aj, bj, tol)
    return res.x if res.feasible else None


def project_onto_face(p, feasible_set, j: int, *, z0=None) -> Projection:
    """Euclidean projection of ``p`` onto face ``j`` of the set.

    ``z0`` is an optional feasible starting point on the face; without it one
    is found by phase 1 (or fetched from the set's cache when it provides
    ``face_point(j)``).
    """
    A, b = _unpack(feasible_set)
    tol = getattr(feasible_set, "tol", FEAS_TOL)
    p = np.asarray(p, dtype=float)
    a = A[j]
    # hyperplane projection; optimal whenever it is feasible
    h = p - (a @ p - b[j]) / (a @ a) * a
    if np.all(A @ h >= b - tol):
        return Projection(ProjectionStatus.OPTIMAL, z=h, sq_distance=float(((h - p) ** 2).sum()),
                          active=(j,), multipliers={j: float(2.0 * (a @ (h - p)) / (a @ a))},
                          iterations=0)
    if z0 is None:
        if hasattr(feasible_set, "face_point"):
            z0 = feasible_set.face_point(j)
        else:
            z0 = face_point(A, b, j, tol)
    if z0 is None:
        return Projection(ProjectionStatus.FACE_INFEASIBLE)
    return _project(p, A, b, tol, [j], z0)


def project_onto_set(p, feasible_set, *, z0=None) -> Projection:
    """Euclidean projection of ``p`` onto the whole polyhedron."""
    A, b = _unpack(feasible_set)
    tol = getattr(feasible_set, "tol", FEAS_TOL)
    p = np.asarray(p, dtype=float)
    if np.all(A @ p >= b - tol):
        return Projection(ProjectionStatus.OPTIMAL, z=p.copy(), sq_distance=0.0)
    if z0 is None:
        z0 = getattr(feasible_set, "witness", None)
        if z0 is None:
            res = phase1_feasible(A, b, tol)
            if not res.feasible:
                return Projection(ProjectionStatus.FACE_INFEASIBLE)
            z0 = res.x
    return _project(p, A, b, tol, [], z0)
