"""Preference-aware inverse linear optimization with clustering."""
from .clustering import ObservationSet, Partition, kmeans
from .engine import (Method, MlioSolution, emb_mlio, exact_mlio, fit, io_mlio, seq_mlio,
                     verify_partial_optimal)
from .inverse import ClusterModel, io_solve
from .metric import Metric
from .polytope import FeasibleSet, build_feasible_set
from .rng import Xoshiro256
from .solvers import Sense, solve_lp

__version__ = "0.1.0"

__all__ = [
    "ClusterModel", "FeasibleSet", "Method", "Metric", "MlioSolution", "ObservationSet",
    "Partition", "Sense", "Xoshiro256", "build_feasible_set", "emb_mlio", "exact_mlio", "fit",
    "io_mlio", "io_solve", "kmeans", "seq_mlio", "solve_lp", "verify_partial_optimal",
]
