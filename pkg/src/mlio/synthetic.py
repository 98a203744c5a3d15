"""Seeded synthetic instances: the 2-D demo, random polytopes and diet data.

Everything draws from :class:`mlio.rng.Xoshiro256`, so a seed pins the
output bit-for-bit.
"""
import numpy as np

from .clustering import ObservationSet
from .polytope import build_feasible_set
from .rng import Xoshiro256

EXAMPLE_CONSTRAINTS = {
    "vars": ["x1", "x2"],
    "rows": [
        {"name": "x1>=1", "coeffs": {"x1": 1.0}, "sense": ">=", "rhs": 1.0},
        {"name": "x1<=5", "coeffs": {"x1": 1.0}, "sense": "<=", "rhs": 5.0},
        {"name": "x2>=1", "coeffs": {"x2": 1.0}, "sense": ">=", "rhs": 1.0},
        {"name": "x2<=10", "coeffs": {"x2": 1.0}, "sense": "<=", "rhs": 10.0},
        {"name": "x1+x2<=15", "coeffs": {"x1": 1.0, "x2": 1.0}, "sense": "<=", "rhs": 15.0},
    ],
}

# three groups straddling the box, some of them outside it
_BLOBS_2D = [((1.9, 4.8), 1.0), ((5.4, 7.3), 1.1), ((6.6, 3.5), 1.0)]


def gen2d(count: int = 80, seed: int = 42) -> ObservationSet:
    """Mixture of three Gaussian groups around the example box."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = Xoshiro256(seed)
    pts = []
    for k in range(count):
        (cx, cy), sd = _BLOBS_2D[k % len(_BLOBS_2D)]
        pts.append((round(rng.normal(cx, sd), 6), round(rng.normal(cy, sd), 6)))
    return ObservationSet(np.array(pts), [f"p{k:03d}" for k in range(count)], ["x1", "x2"])


def random_polytope(rng: Xoshiro256, n: int = 2, cuts: int = 3):
    """Box ``[lo, hi]^n`` with random half-space cuts that keep a chosen centre point."""
    lo = [rng.uniform(-2.0, 1.0) for _ in range(n)]
    hi = [l + rng.uniform(3.0, 8.0) for l in lo]
    centre = np.array([(l + h) / 2 for l, h in zip(lo, hi)])
    A, b = [], []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        A.append(e.copy()), b.append(lo[i])
        A.append(-e), b.append(-hi[i])
    for _ in range(cuts):
        a = np.array([rng.normal() for _ in range(n)])
        a /= np.linalg.norm(a)
        a = np.round(a, 6)
        if not np.any(a):
            continue
        A.append(a), b.append(round(float(a @ centre) - rng.uniform(0.5, 2.5), 6))
    return build_feasible_set(np.array(A), np.array(b))


def random_instance(seed: int, K: int, n: int = 2, groups: int = 3, cuts: int = 3):
    """Random polytope plus K observations from Gaussian groups around it."""
    rng = Xoshiro256(seed)
    fs = random_polytope(rng, n, cuts)
    lo = np.array([fs.b[2 * i] for i in range(n)])
    hi = np.array([-fs.b[2 * i + 1] for i in range(n)])
    span = hi - lo
    centres = [lo + span * np.array([rng.uniform(-0.1, 1.1) for _ in range(n)])
               for _ in range(groups)]
    sd = [rng.uniform(0.3, 1.2) for _ in range(groups)]
    X = np.array([[rng.normal(centres[k % groups][i], sd[k % groups]) for i in range(n)]
                  for k in range(K)])
    return fs, ObservationSet(X)


# food name, group, nutrients per serving: calories(100 kcal), protein(g/10), fat(g/10),
# carbs(g/10), fiber(g), sodium(100 mg), sugar(g/10), cholesterol(10 mg)
_FOODS = [
    ("apple", "fruits", [0.95, 0.05, 0.03, 2.5, 4.4, 0.02, 1.9, 0.0]),
    ("banana", "fruits", [1.05, 0.13, 0.04, 2.7, 3.1, 0.01, 1.4, 0.0]),
    ("berries", "fruits", [0.6, 0.1, 0.03, 1.4, 3.6, 0.01, 1.0, 0.0]),
    ("orange", "fruits", [0.6, 0.12, 0.02, 1.5, 3.1, 0.0, 1.2, 0.0]),
    ("broccoli", "vegetables", [0.3, 0.25, 0.03, 0.6, 2.4, 0.3, 0.15, 0.0]),
    ("carrot", "vegetables", [0.25, 0.06, 0.01, 0.6, 1.7, 0.42, 0.3, 0.0]),
    ("spinach", "vegetables", [0.07, 0.09, 0.01, 0.1, 0.7, 0.24, 0.01, 0.0]),
    ("oats", "grains", [1.5, 0.5, 0.25, 2.7, 4.0, 0.02, 0.1, 0.0]),
    ("bread", "grains", [0.8, 0.4, 0.1, 1.4, 1.9, 1.5, 0.15, 0.0]),
    ("rice", "grains", [2.0, 0.4, 0.04, 4.5, 0.6, 0.02, 0.0, 0.0]),
    ("milk", "dairy", [1.0, 0.8, 0.25, 1.2, 0.0, 1.05, 1.2, 1.2]),
    ("cheese", "dairy", [1.1, 0.7, 0.9, 0.04, 0.0, 1.8, 0.01, 2.8]),
    ("cream", "dairy", [1.0, 0.06, 1.1, 0.08, 0.0, 0.1, 0.08, 3.3]),
    ("chicken", "meats", [1.4, 2.6, 0.3, 0.0, 0.0, 0.65, 0.0, 7.3]),
    ("beef", "meats", [2.1, 2.2, 1.3, 0.0, 0.0, 0.6, 0.0, 7.0]),
    ("ham", "meats", [1.2, 1.6, 0.6, 0.1, 0.0, 10.0, 0.1, 4.5]),
    ("almonds", "nuts_seeds", [1.6, 0.6, 1.4, 0.6, 3.5, 0.0, 0.1, 0.0]),
    ("sunflower_seeds", "nuts_seeds", [1.65, 0.55, 1.4, 0.7, 2.4, 0.01, 0.1, 0.0]),
    ("chips", "snacks", [1.5, 0.2, 1.0, 1.5, 1.2, 1.5, 0.01, 0.0]),
    ("soda", "snacks", [1.4, 0.0, 0.0, 3.9, 0.0, 0.45, 3.9, 0.0]),
]
NUTRIENTS = ["calories", "protein", "fat", "carbs", "fiber", "sodium", "sugar", "cholesterol"]

# reference healthy daily servings used to centre the bounds
_HEALTHY = [1.5, 1.0, 1.0, 1.0, 1.5, 1.0, 1.0, 1.5, 2.0, 1.0, 1.5, 0.5, 0.2, 1.0, 0.5, 0.1,
            0.5, 0.5, 0.1, 0.1]
_BOUNDS = {  # (lower factor, upper factor) around the healthy reference
    "calories": (0.8, 1.2), "protein": (0.75, 1.4), "fat": (0.6, 1.3), "carbs": (0.75, 1.3),
    "fiber": (0.85, 1.6), "sodium": (0.4, 1.1), "sugar": (0.3, 1.2), "cholesterol": (0.3, 1.2),
}

# habitual patterns: extra (or fewer) servings on top of the healthy reference
_PROFILES = [
    {"ham": 1.2, "chips": 1.0, "bread": 1.0, "cheese": 0.6, "apple": -1.0, "berries": -0.8},
    {"beef": 1.0, "chips": 0.8, "soda": 1.5, "cream": 0.8, "broccoli": -1.0, "orange": -0.8},
    {"ham": 0.8, "cheese": 1.0, "bread": 1.5, "milk": 1.0, "almonds": -0.4, "spinach": -0.8},
]


def diet_spec_dict() -> dict:
    """Nutrient specification JSON mapping for the 20-food, 8-nutrient fixture."""
    N = np.array([f[2] for f in _FOODS]).T
    ref = N @ np.array(_HEALTHY)
    lb = [round(ref[i] * _BOUNDS[nm][0], 4) for i, nm in enumerate(NUTRIENTS)]
    ub = [round(ref[i] * _BOUNDS[nm][1], 4) for i, nm in enumerate(NUTRIENTS)]
    return {
        "foods": [f[0] for f in _FOODS],
        "nutrients": list(NUTRIENTS),
        "matrix": N.tolist(),
        "lb": lb,
        "ub": ub,
        "groups": {f[0]: f[1] for f in _FOODS},
    }


def gen_diet_observations(count: int = 200, seed: int = 42) -> ObservationSet:
    """Daily intakes drawn around salty habitual profiles; servings clipped at zero."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = Xoshiro256(seed)
    foods = [f[0] for f in _FOODS]
    rows = []
    for k in range(count):
        prof = _PROFILES[k % len(_PROFILES)]
        x = []
        for i, name in enumerate(foods):
            mean = _HEALTHY[i] + prof.get(name, 0.0)
            v = rng.normal(mean, 0.25 + 0.15 * mean if mean > 0 else 0.25)
            x.append(round(max(0.0, v), 4))
        rows.append(x)
    return ObservationSet(np.array(rows), [f"d{k:04d}" for k in range(count)], foods)

