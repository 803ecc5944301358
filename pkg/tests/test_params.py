import json
import math
from statistics import NormalDist

import numpy as np
import pytest

from tornado_retrofit.params import (
    DAMAGE_COST_FRACTIONS, FragilityConfig, RawBlock, build_instance, cluster_blocks, dislocation_after_recovery,
    do_nothing_dislocation, example_config, load_config, lognormal_cdf, read_blocks_csv, recovery_cost,
    within_cluster_sse,
)
from tornado_retrofit.model import validate

REL = 1e-9


def median_for(p_still: float, horizon: float, sigma: float) -> float:
    """Repair-time median that leaves ``p_still`` of residents dislocated at
    the horizon."""
    return horizon * math.exp(-sigma * NormalDist().inv_cdf(1.0 - p_still))


def config(probs, medians=(1e-6, 1e-6, 1e-6, 1e9), log_std=(0.0,) * 4, **kw):
    return FragilityConfig(strategy_names=("do-nothing",), damage_probabilities=(probs,),
                           repair_median_days=medians, repair_log_std=log_std, **kw)


def test_lognormal_cdf():
    assert lognormal_cdf(10.0, 10.0, 0.5) == 0.5
    assert lognormal_cdf(0.0, 10.0, 0.5) == 0.0
    x = 10.0 * math.exp(0.5 * 1.2)
    assert lognormal_cdf(x, 10.0, 0.5) == pytest.approx(NormalDist().cdf(1.2), rel=1e-12)
    # far tail keeps relative precision
    assert lognormal_cdf(1e-6, 10.0, 0.5) > 0


def test_dislocation_all_mass_on_unrepaired_state():
    cfg = config((0, 0, 0, 1))
    assert dislocation_after_recovery(cfg, 250.0)[0] == pytest.approx(250.0, rel=REL)


def test_dislocation_all_mass_on_instant_repair():
    cfg = config((1, 0, 0, 0))
    assert dislocation_after_recovery(cfg, 250.0)[0] == 0.0


def test_dislocation_two_state_mix():
    sigma = 0.6
    medians = (median_for(0.2, 60, sigma), median_for(0.8, 60, sigma), 1.0, 1.0)
    cfg = config((0.5, 0.5, 0, 0), medians=medians, log_std=(sigma,) * 4)
    assert cfg.still_dislocated()[:2] == pytest.approx([0.2, 0.8], rel=REL)
    assert dislocation_after_recovery(cfg, 100.0)[0] == pytest.approx(50.0, rel=REL)


def test_recovery_cost_examples():
    assert recovery_cost(config((1, 0, 0, 0)), 120.0)[0] == pytest.approx(0.005 * 862 * 120.0, rel=REL)
    assert recovery_cost(config((0.25,) * 4), 0.0)[0] == 0.0
    uniform = recovery_cost(config((0.25,) * 4), 120.0)[0]
    assert uniform == pytest.approx(862 * 120.0 * sum(DAMAGE_COST_FRACTIONS) / 4, rel=REL)


def test_do_nothing_dislocation_examples():
    assert do_nothing_dislocation(100.0, 100.0) == 100.0
    assert do_nothing_dislocation(0.0, 100.0) == 50.0
    assert do_nothing_dislocation(40.0, 100.0) == 70.0
    assert do_nothing_dislocation(40.0, 100.0, mu=1.5) == 60.0
    assert do_nothing_dislocation(40.0, 100.0, mu=5.0) == 100.0
    with pytest.raises(ValueError):
        do_nothing_dislocation(40.0, 100.0, mu=0.5)
    with pytest.raises(ValueError):
        do_nothing_dislocation(140.0, 100.0)


def test_config_validation():
    with pytest.raises(ValueError):
        config((0.5, 0.5, 0.5, 0))
    with pytest.raises(ValueError):
        config((1, 0, 0, 0), medians=(1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        config((1, 0, 0, 0), retrofit_cost_usd_per_m2=(3.0,))


def test_example_config_round_trip(tmp_path):
    cfg = example_config()
    assert cfg.n_strategies == 4
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg
    # retrofitting lowers expected dislocation in the illustrative config
    g1 = dislocation_after_recovery(cfg, 100.0)
    assert np.all(np.diff(g1) < 0)


def blocks_from(points, pops=None):
    pops = pops if pops is not None else [10.0] * len(points)
    return [RawBlock(f"b{i}", (float(x), float(y)), float(p), 100.0) for i, ((x, y), p) in enumerate(zip(points, pops))]


def test_cluster_each_block_alone():
    blocks = blocks_from([(0, 0), (1, 1), (2, 0)])
    locs = cluster_blocks(blocks, 3)
    assert [loc.members for loc in locs] == [("b0",), ("b1",), ("b2",)]


def test_cluster_two_clouds():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.1, size=(10, 2)), rng.normal(10, 0.1, size=(10, 2))])
    locs = cluster_blocks(blocks_from(pts), 2, seed=1)
    groups = sorted(sorted(int(m[1:]) for m in loc.members) for loc in locs)
    assert groups == [list(range(10)), list(range(10, 20))]
    assert sum(loc.population for loc in locs) == 200.0


def test_population_weighted_centroid():
    locs = cluster_blocks(blocks_from([(0, 0), (3, 0)], pops=[1.0, 2.0]), 1)
    assert locs[0].point == pytest.approx((2.0, 0.0))
    assert locs[0].area == 200.0


def test_cluster_quality_beats_random_restarts():
    from sklearn.cluster import KMeans

    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 10, size=(50, 2))
    blocks = blocks_from(pts)
    sse = within_cluster_sse(blocks, cluster_blocks(blocks, 5, seed=0))
    worst = max(KMeans(5, n_init=1, init="random", random_state=s).fit(pts).inertia_ for s in range(20))
    assert sse <= worst + 1e-9


def test_cluster_is_deterministic():
    pts = np.random.default_rng(4).uniform(0, 10, size=(30, 2))
    assert cluster_blocks(blocks_from(pts), 4, seed=7) == cluster_blocks(blocks_from(pts), 4, seed=7)
    with pytest.raises(ValueError):
        cluster_blocks(blocks_from(pts), 31)


def test_blocks_csv_and_instance(tmp_path):
    (tmp_path / "b.csv").write_text("id,x,y,population,area\na,0,0,100,500\nb,1,0,40,300\n")
    blocks = read_blocks_csv(tmp_path / "b.csv")
    locs = cluster_blocks(blocks, 2)
    inst = build_instance(locs, example_config(), 25_000.0, 0.375, math.inf)
    assert validate(inst) == []
    assert inst.budget == 2_500_000
    assert np.all(inst.w == 0)
    assert inst.d[0, 1] == 15 * 500 * 100
    assert inst.g[0, 0, 0] == pytest.approx((inst.g[0, 0, 1] + 100) / 2, rel=REL)
    assert inst.plan_names == ("do-nothing", "recover")
