"""Diet recommendation on top of the clustering engine.

The feasible set is built from per-nutrient bounds ``lb <= N x <= ub`` on
daily servings ``x`` (optionally ``x >= 0``).  Reports compare the
nutrient content and food-group make-up of MLIO representatives with raw
K-means centroids.
"""
import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .clustering import ObservationSet, as_observations
from .engine import MlioSolution, evaluate_average
from .errors import DimensionMismatch, MissingGroupMap
from .polytope import FeasibleSet, build_feasible_set
from .rng import Xoshiro256


@dataclass
class NutrientSpec:
    foods: list
    nutrients: list
    N: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    groups: dict = None

    def __post_init__(self):
        self.N = np.atleast_2d(np.asarray(self.N, dtype=float))
        self.lb = np.asarray(self.lb, dtype=float).ravel()
        self.ub = np.asarray(self.ub, dtype=float).ravel()
        p, n = len(self.nutrients), len(self.foods)
        if p < 1 or n < 1:
            raise ValueError("need at least one nutrient and one food")
        if self.N.shape != (p, n):
            raise DimensionMismatch(f"matrix is {self.N.shape}, expected {(p, n)}")
        if self.lb.shape[0] != p or self.ub.shape[0] != p:
            raise DimensionMismatch("lb and ub need one entry per nutrient")
        if np.any(self.N < 0):
            raise ValueError("nutrient amounts must be nonnegative")
        if self.groups is not None:
            unknown = set(self.groups) - set(self.foods)
            if unknown:
                raise ValueError(f"group map names unknown foods: {sorted(unknown)}")


def spec_from_dict(data: dict) -> NutrientSpec:
    return NutrientSpec(list(data["foods"]), list(data["nutrients"]), data["matrix"],
                        data["lb"], data["ub"], data.get("groups"))


def spec_to_dict(spec: NutrientSpec) -> dict:
    return {"foods": list(spec.foods), "nutrients": list(spec.nutrients),
            "matrix": spec.N.tolist(), "lb": spec.lb.tolist(), "ub": spec.ub.tolist(),
            "groups": spec.groups}


def load_spec(path) -> NutrientSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


def build_diet_polytope(spec: NutrientSpec, include_nonneg: bool = True,
                        exclude_nonneg_faces: bool = True, tol: float = 1e-8) -> FeasibleSet:
    """Rows ``N x >= lb``, ``-N x >= -ub`` and optionally ``x >= 0``.

    Raises :class:`~mlio.errors.EmptyFeasibleSet` for contradictory bounds.
    """
    A = [spec.N, -spec.N]
    b = [spec.lb, -spec.ub]
    names = [f"{nm}>=lb" for nm in spec.nutrients] + [f"{nm}<=ub" for nm in spec.nutrients]
    excluded = ()
    if include_nonneg:
        n = len(spec.foods)
        A.append(np.eye(n))
        b.append(np.zeros(n))
        names += [f"{f}>=0" for f in spec.foods]
        if exclude_nonneg_faces:
            start = 2 * len(spec.nutrients)
            excluded = range(start, start + n)
    return build_feasible_set(np.vstack(A), np.concatenate(b), tol, list(spec.foods), names,
                              excluded)


def train_test_split(X, ratio: float = 0.8, seed: int = 42):
    """Seeded shuffle, then the first ``floor(K * ratio)`` observations train."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie strictly between 0 and 1")
    obs = as_observations(X)
    perm = Xoshiro256(seed).permutation(obs.K)
    cut = int(math.floor(obs.K * ratio))
    return obs.subset(sorted(perm[:cut])), obs.subset(sorted(perm[cut:]))


def evaluate_test(sol: MlioSolution, test, metric=None) -> float:
    return evaluate_average(sol, test, metric)


@dataclass
class NutrientRow:
    cluster: str
    entity: str
    value: float
    lb: float
    ub: float
    in_bounds: bool


@dataclass
class GroupRow:
    cluster: int
    group: str
    mlio_total: float
    kmeans_total: float
    empty: bool = False


def nutrient_report(sol: MlioSolution, spec: NutrientSpec, kmeans_centroids=None,
                    tol: float = 1e-8) -> list:
    """Nutrient content of each representative against its bounds."""
    rows = []
    sources = [(sol.method.value, sol.representatives())]
    if kmeans_centroids is not None:
        sources.append(("kmeans", list(kmeans_centroids)))
    for label, reps in sources:
        for l, z in enumerate(reps):
            if z is None:
                continue
            z = np.asarray(z, dtype=float)
            if z.shape[0] != len(spec.foods):
                raise DimensionMismatch("representative length differs from the food count")
            vals = spec.N @ z
            for i, nm in enumerate(spec.nutrients):
                ok = spec.lb[i] - tol <= vals[i] <= spec.ub[i] + tol
                rows.append(NutrientRow(f"{label}:{l}", nm, float(vals[i]), float(spec.lb[i]),
                                        float(spec.ub[i]), bool(ok)))
    return rows


def food_groups(spec: NutrientSpec) -> list:
    if not spec.groups:
        raise MissingGroupMap("nutrient spec has no food-group map")
    seen = []
    for f in spec.foods:
        g = spec.groups.get(f)
        if g is not None and g not in seen:
            seen.append(g)
    return seen


def food_group_report(sol: MlioSolution, spec: NutrientSpec, kmeans_centroids=None) -> list:
    """Summed servings per food group, MLIO representative beside the K-means centroid."""
    groups = food_groups(spec)
    members = {g: [i for i, f in enumerate(spec.foods) if spec.groups.get(f) == g] for g in groups}
    reps = sol.representatives()
    km = list(kmeans_centroids) if kmeans_centroids is not None else [None] * len(reps)
    rows = []
    for l, z in enumerate(reps):
        c = km[l] if l < len(km) else None
        for g in groups:
            idx = members[g]
            mt = 0.0 if z is None else float(np.asarray(z)[idx].sum())
            kt = 0.0 if c is None else float(np.asarray(c)[idx].sum())
            rows.append(GroupRow(l, g, mt, kt, z is None))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_nutrient_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "entity", "value", "lb", "ub", "in_bounds"])
        for r in rows:
            w.writerow([r.cluster, r.entity, _fmt(r.value), _fmt(r.lb), _fmt(r.ub),
                        "true" if r.in_bounds else "false"])


def read_nutrient_csv(path) -> list:
    with open(path, newline="") as fh:
        return [NutrientRow(r["cluster"], r["entity"], float(r["value"]), float(r["lb"]),
                            float(r["ub"]), r["in_bounds"] == "true")
                for r in csv.DictReader(fh)]


def write_group_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cluster", "group", "mlio_total", "kmeans_total"])
        for r in rows:
            w.writerow([r.cluster, r.group, _fmt(r.mlio_total), _fmt(r.kmeans_total)])


def read_group_csv(path) -> list:
    with open(path, newline="") as fh:
        return [GroupRow(int(r["cluster"]), r["group"], float(r["mlio_total"]),
                         float(r["kmeans_total"]))
                for r in csv.DictReader(fh)]


def observations_match_spec(obs: ObservationSet, spec: NutrientSpec) -> bool:
    return obs.n == len(spec.foods)
