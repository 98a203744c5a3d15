import numpy as np
import pytest

from mlio import diet, engine
from mlio.clustering import ObservationSet
from mlio.errors import DimensionMismatch, EmptyFeasibleSet, MissingGroupMap
from mlio.polytope import contains
from mlio.rng import Xoshiro256
from mlio.synthetic import diet_spec_dict, gen_diet_observations


@pytest.fixture(scope="module")
def desk():
    spec = diet.spec_from_dict(diet_spec_dict())
    obs = gen_diet_observations(200, 42)
    fs = diet.build_diet_polytope(spec)
    return spec, obs, fs


def _fiber_spec():
    # only the fruit carries fiber; intake sits below the fiber lower bound
    return diet.NutrientSpec(["apple", "bread", "cheese"], ["fiber", "calories"],
                             [[3.0, 0.0, 0.0], [1.0, 2.0, 3.0]], [6.0, 0.0], [30.0, 100.0],
                             {"apple": "fruits", "bread": "grains", "cheese": "dairy"})


def _fiber_obs(K=30, seed=1):
    rng = Xoshiro256(seed)
    return ObservationSet(np.array([[max(0.0, rng.normal(1.0, 0.2)), rng.normal(2.0, 0.3),
                                     rng.normal(1.0, 0.3)] for _ in range(K)]))


def test_single_food_polytope():
    spec = diet.NutrientSpec(["f"], ["n"], [[2.0]], [2.0], [10.0])
    fs = diet.build_diet_polytope(spec)
    assert contains(fs, [1.0]) and contains(fs, [5.0])
    assert not contains(fs, [0.99]) and not contains(fs, [5.01])
    assert fs.row_names == ("n>=lb", "n<=ub", "f>=0")
    assert fs.candidate_faces() == [0, 1]
    full = diet.build_diet_polytope(spec, exclude_nonneg_faces=False)
    assert full.candidate_faces() == [0, 1, 2]
    assert diet.build_diet_polytope(spec, include_nonneg=False).m == 2


def test_contradictory_bounds():
    with pytest.raises(EmptyFeasibleSet):
        diet.build_diet_polytope(diet.NutrientSpec(["f"], ["n"], [[1.0]], [4.0], [2.0]))


@pytest.mark.parametrize("kwargs,err", [
    (dict(N=[[1.0, 2.0]]), DimensionMismatch),
    (dict(N=[[-1.0]]), ValueError),
    (dict(lb=[0.0, 1.0]), DimensionMismatch),
    (dict(groups={"ghost": "g"}), ValueError),
])
def test_spec_validation(kwargs, err):
    base = dict(foods=["f"], nutrients=["n"], N=[[1.0]], lb=[0.0], ub=[1.0], groups=None)
    base.update(kwargs)
    with pytest.raises(err):
        diet.NutrientSpec(**base)


def test_desk_fixture_shape_and_sodium(desk):
    spec, obs, fs = desk
    assert (len(spec.foods), len(spec.nutrients), obs.K) == (20, 8, 200)
    assert fs.m == 2 * 8 + 20
    sodium = spec.nutrients.index("sodium")
    assert (obs.X @ spec.N[sodium]).mean() > spec.ub[sodium]
    assert diet.observations_match_spec(obs, spec)


@pytest.mark.parametrize("K,train,test", [(900, 720, 180), (5, 4, 1), (10, 8, 2)])
def test_split_sizes(K, train, test):
    tr, te = diet.train_test_split(np.zeros((K, 2)), 0.8, 42)
    assert (tr.K, te.K) == (train, test)


def test_split_is_seeded_partition():
    obs = ObservationSet(np.arange(40.0).reshape(20, 2))
    a = diet.train_test_split(obs, 0.8, 3)
    b = diet.train_test_split(obs, 0.8, 3)
    assert a[0].ids == b[0].ids and a[1].ids == b[1].ids
    assert sorted(a[0].ids + a[1].ids, key=int) == obs.ids
    assert diet.train_test_split(obs, 0.8, 4)[0].ids != a[0].ids


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
def test_split_ratio_bounds(ratio):
    with pytest.raises(ValueError):
        diet.train_test_split(np.zeros((5, 1)), ratio)


def test_nutrient_report_mlio_in_bounds_kmeans_salty(desk):
    spec, obs, fs = desk
    sol = engine.emb_mlio(obs, fs, 3)
    km = engine.kmeans_solution(obs, 3)
    rows = diet.nutrient_report(sol, spec, km.representatives())
    mlio_rows = [r for r in rows if r.cluster.startswith("emb:")]
    assert len(mlio_rows) == 24
    assert all(r.lb - 1e-8 <= r.value <= r.ub + 1e-8 and r.in_bounds for r in mlio_rows)
    assert any(r.cluster.startswith("kmeans:") and r.entity == "sodium" and not r.in_bounds
               for r in rows)


def test_boundary_nutrient_equals_its_bound():
    spec = _fiber_spec()
    fs = diet.build_diet_polytope(spec)
    sol = engine.emb_mlio(_fiber_obs(), fs, 1)
    assert fs.row_names[sol.models[0].face] == "fiber>=lb"
    fiber = [r for r in diet.nutrient_report(sol, spec) if r.entity == "fiber"][0]
    assert fiber.value == pytest.approx(fiber.lb, abs=1e-9)


def test_fruit_promoted_when_fiber_binds():
    spec = _fiber_spec()
    obs = _fiber_obs()
    fs = diet.build_diet_polytope(spec)
    sol = engine.emb_mlio(obs, fs, 1)
    km = engine.kmeans_solution(obs, 1)
    rows = diet.food_group_report(sol, spec, km.representatives())
    fruit = [r for r in rows if r.group == "fruits"][0]
    assert fruit.mlio_total > fruit.kmeans_total
    assert fruit.mlio_total == pytest.approx(2.0)


def test_single_group_totals(desk):
    spec, obs, fs = desk
    one = diet.NutrientSpec(spec.foods, spec.nutrients, spec.N, spec.lb, spec.ub,
                            {f: "all" for f in spec.foods})
    sol = engine.emb_mlio(obs, fs, 2)
    rows = diet.food_group_report(sol, one)
    for r, z in zip(rows, sol.representatives()):
        assert r.mlio_total == pytest.approx(z.sum())


def test_empty_cluster_row():
    spec = _fiber_spec()
    fs = diet.build_diet_polytope(spec)
    obs = _fiber_obs(6)
    sol = engine.solve_partition(obs, fs, engine.Partition((0,) * 6, 2))
    rows = diet.food_group_report(sol, spec)
    empty = [r for r in rows if r.cluster == 1]
    assert len(empty) == 3
    assert all(r.empty and r.mlio_total == 0.0 and r.kmeans_total == 0.0 for r in empty)


def test_missing_group_map():
    spec = diet.NutrientSpec(["f"], ["n"], [[1.0]], [1.0], [2.0])
    sol = engine.emb_mlio([[1.5]], diet.build_diet_polytope(spec), 1)
    with pytest.raises(MissingGroupMap):
        diet.food_group_report(sol, spec)


def test_evaluate_on_training_data(desk):
    spec, obs, fs = desk
    sol = engine.emb_mlio(obs, fs, 3)
    assert diet.evaluate_test(sol, obs) == pytest.approx(sol.total_loss / obs.K)


def test_evaluate_single_representative(desk):
    spec, obs, fs = desk
    sol = engine.io_mlio(obs, fs)
    z = sol.models[0].z
    assert diet.evaluate_test(sol, obs.X[:7]) == pytest.approx(((obs.X[:7] - z) ** 2).sum(1).mean())


def test_evaluate_held_out_matches_direct_computation(desk):
    spec, obs, fs = desk
    train, test = diet.train_test_split(obs, 0.8, 42)
    sol = engine.emb_mlio(train, fs, 3)
    Z = np.array(sol.representatives())
    direct = ((test.X[:, None, :] - Z[None]) ** 2).sum(2).min(1).mean()
    assert diet.evaluate_test(sol, test) == pytest.approx(direct, rel=1e-12)


def test_report_csv_round_trip(tmp_path, desk):
    spec, obs, fs = desk
    sol = engine.emb_mlio(obs, fs, 2)
    km = engine.kmeans_solution(obs, 2)
    rows = diet.nutrient_report(sol, spec, km.representatives())
    diet.write_nutrient_csv(tmp_path / "n.csv", rows)
    back = diet.read_nutrient_csv(tmp_path / "n.csv")
    assert [(r.cluster, r.entity, r.in_bounds) for r in back] == \
        [(r.cluster, r.entity, r.in_bounds) for r in rows]
    for a, b in zip(rows, back):
        assert b.value == pytest.approx(a.value, rel=1e-11, abs=1e-300)
    assert (tmp_path / "n.csv").read_text().splitlines()[0] == "cluster,entity,value,lb,ub,in_bounds"
    groups = diet.food_group_report(sol, spec, km.representatives())
    diet.write_group_csv(tmp_path / "g.csv", groups)
    gback = diet.read_group_csv(tmp_path / "g.csv")
    assert (tmp_path / "g.csv").read_text().splitlines()[0] == "cluster,group,mlio_total,kmeans_total"
    for a, b in zip(groups, gback):
        assert (a.cluster, a.group) == (b.cluster, b.group)
        assert b.mlio_total == pytest.approx(a.mlio_total, rel=1e-11, abs=1e-12)


def test_spec_dict_round_trip():
    data = diet_spec_dict()
    spec = diet.spec_from_dict(data)
    assert diet.spec_to_dict(spec) == data
