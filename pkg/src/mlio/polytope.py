"""The shared polyhedral feasible set ``{x : A x >= b}``."""
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DimensionTooLarge, EmptyFeasibleSet, ZeroRow
from . import solvers

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class Face:
    index: int
    normal: np.ndarray
    offset: float
    name: str = None


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Non-empty polyhedron stored in canonical ``A x >= b`` form.

    Build through :func:`build_feasible_set`, which validates the data and
    runs phase 1.  ``excluded_faces`` lists rows that stay feasibility
    constraints but are never offered as candidate optimal faces.
    """

    A: np.ndarray
    b: np.ndarray
    var_names: tuple = None
    row_names: tuple = None
    tol: float = DEFAULT_TOL
    witness: np.ndarray = None
    excluded_faces: frozenset = frozenset()
    _face_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def face(self, j: int) -> Face:
        name = self.row_names[j] if self.row_names else None
        return Face(j, self.A[j].copy(), float(self.b[j]), name)

    def candidate_faces(self) -> list:
        return [j for j in range(self.m) if j not in self.excluded_faces]

    def face_point(self, j: int):
        """Cached point of face ``j`` intersected with the set, or ``None`` if empty."""
        if j not in self._face_cache:
            self._face_cache[j] = solvers.face_point(self.A, self.b, j, self.tol)
        return self._face_cache[j]

    def row_index(self, name: str) -> int:
        return list(self.row_names).index(name)


def build_feasible_set(A, b, tol: float = DEFAULT_TOL, var_names=None, row_names=None,
                       excluded_faces=()) -> FeasibleSet:
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if A.ndim != 2:
        raise DimensionMismatch("A must be a 2-D matrix")
    m, n = A.shape
    if m < 1 or n < 1:
        raise DimensionMismatch("need at least one row and one column")
    if b.shape[0] != m:
        raise DimensionMismatch(f"b has length {b.shape[0]}, A has {m} rows")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if var_names is not None and len(var_names) != n:
        raise DimensionMismatch("var_names length differs from column count")
    if row_names is not None and len(row_names) != m:
        raise DimensionMismatch("row_names length differs from row count")
    zero = np.flatnonzero(~np.any(A != 0.0, axis=1))
    if zero.size:
        raise ZeroRow(f"row {int(zero[0])} of A is identically zero")
    res = solvers.phase1_feasible(A, b, tol)
    if not res.feasible:
        raise EmptyFeasibleSet("constraint system A x >= b has no solution", res.farkas)
    A.setflags(write=False)
    b.setflags(write=False)
    return FeasibleSet(A, b, tuple(var_names) if var_names is not None else None,
                       tuple(row_names) if row_names is not None else None,
                       float(tol), res.x, frozenset(int(j) for j in excluded_faces))


def _check_point(fs: FeasibleSet, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != fs.n:
        raise DimensionMismatch(f"point has length {x.shape[0]}, expected {fs.n}")
    return x


def contains(fs: FeasibleSet, x) -> bool:
    x = _check_point(fs, x)
    return bool(np.all(fs.A @ x >= fs.b - fs.tol))


def boundary_distance(fs: FeasibleSet, x) -> float:
    """Distance from ``x`` to the boundary of the set (if inside) or to the set (if outside)."""
    x = _check_point(fs, x)
    if contains(fs, x):
        slack = (fs.A @ x - fs.b) / np.linalg.norm(fs.A, axis=1)
        return float(max(0.0, slack.min()))
    proj = solvers.project_onto_set(x, fs)
    return float(np.sqrt(proj.sq_distance))


def enumerate_vertices(fs: FeasibleSet) -> list:
    """All basic feasible points of a set in at most three dimensions."""
    n = fs.n
    if n > 3:
        raise DimensionTooLarge(f"vertex enumeration supports n <= 3, got {n}")
    out = []
    for rows in itertools.combinations(range(fs.m), n):
        sub = fs.A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, fs.b[list(rows)])
        if not contains(fs, v):
            continue
        if any(np.abs(v - u).max() <= max(fs.tol, 1e-9) for u in out):
            continue
        out.append(v)
    return out


def tight_rows(fs: FeasibleSet, x, tol=None) -> list:
    tol = fs.tol if tol is None else tol
    x = _check_point(fs, x)
    return [int(j) for j in np.flatnonzero(np.abs(fs.A @ x - fs.b) <= tol)]


def constraints_from_dict(data: dict, tol: float = DEFAULT_TOL) -> FeasibleSet:
    """Build a set from the constraint-file mapping (``vars`` and ``rows``)."""
    try:
        var_names = list(data["vars"])
        rows = data["rows"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"constraint file must have 'vars' and 'rows': {exc}") from None
    index = {v: i for i, v in enumerate(var_names)}
    A, b, names = [], [], []
    for k, row in enumerate(rows):
        name = row.get("name", f"r{k}")
        coeffs = np.zeros(len(var_names))
        for var, val in row["coeffs"].items():
            if var not in index:
                raise ValueError(f"row {name!r} references unknown variable {var!r}")
            coeffs[index[var]] = float(val)
        rhs = float(row["rhs"])
        sense = row["sense"]
        if sense == ">=":
            A.append(coeffs), b.append(rhs), names.append(name)
        elif sense == "<=":
            A.append(-coeffs), b.append(-rhs), names.append(name)
        elif sense == "==":
            A.append(coeffs), b.append(rhs), names.append(f"{name}:lo")
            A.append(-coeffs), b.append(-rhs), names.append(f"{name}:hi")
        else:
            raise ValueError(f"row {name!r}: unknown sense {sense!r}")
    if not A:
        raise ValueError("constraint file has no rows")
    return build_feasible_set(np.array(A), np.array(b), tol, var_names, names)


def load_constraints(path, tol: float = DEFAULT_TOL) -> FeasibleSet:
    with open(path) as fh:
        return constraints_from_dict(json.load(fh), tol)


def constraints_to_dict(fs: FeasibleSet) -> dict:
    """Inverse of :func:`constraints_from_dict`; every row is written as ``>=``."""
    var_names = list(fs.var_names) if fs.var_names else [f"x{i + 1}" for i in range(fs.n)]
    rows = []
    for j in range(fs.m):
        coeffs = {var_names[i]: float(fs.A[j, i]) for i in range(fs.n) if fs.A[j, i] != 0.0}
        name = fs.row_names[j] if fs.row_names else f"r{j}"
        rows.append({"name": name, "coeffs": coeffs, "sense": ">=", "rhs": float(fs.b[j])})
    return {"vars": var_names, "rows": rows}


def example_set() -> FeasibleSet:
    """``1 <= x1 <= 5, 1 <= x2 <= 10, x1 + x2 <= 15``."""
    A = [[1, 0], [-1, 0], [0, 1], [0, -1], [-1, -1]]
    b = [1, -5, 1, -10, -15]
    names = ["x1>=1", "x1<=5", "x2>=1", "x2<=10", "x1+x2<=15"]
    return build_feasible_set(A, b, var_names=["x1", "x2"], row_names=names)
