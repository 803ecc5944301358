import json
import math

import numpy as np
import pytest

from tornado_retrofit import model
from tornado_retrofit.geometry import Rect, Segment
from tornado_retrofit.model import (
    BudgetError, Instance, InvalidInstanceError, RetrofitPlan, TornadoScenario, big_m, ensure_valid, validate,
)

from instances import random_instance


def tiny(**kw) -> Instance:
    base = dict(
        ids=("a", "b"), coords=[[0, 0], [1, 0]], population=[100, 50], area=[10, 20],
        w=[[0, 0], [0, 0]], d=[[0, 500], [0, 700]],
        g=[[[40, 10], [20, 5]], [[30, 10], [15, 2]]],
        c=[[[0, 300], [0, 100]], [[0, 200], [0, 100]]],
        budget=1000, delta=0.5, length=2.0, rect=Rect(-1, 2, -1, 1),
    )
    base.update(kw)
    return Instance(**base)


def test_valid_instance_has_no_problems():
    assert validate(tiny()) == []
    assert ensure_valid(tiny()).n_locations == 2


def test_arrays_are_read_only():
    inst = tiny()
    with pytest.raises(ValueError):
        inst.g[0, 0, 0] = 1.0


@pytest.mark.parametrize("changes, fragment", [
    ({"d": [[1, 500], [0, 700]]}, "do-nothing retrofit cost"),
    ({"c": [[[5, 300], [0, 100]], [[0, 200], [0, 100]]]}, "do-nothing recovery cost"),
    ({"g": [[[400, 10], [20, 5]], [[30, 10], [15, 2]]]}, "exceeds population"),
    ({"coords": [[0, 0], [5, 0]]}, "outside the rectangle"),
    ({"delta": 0.0}, "delta must be positive"),
    ({"budget": -1}, "budget"),
    ({"ids": ("a", "a")}, "unique"),
])
def test_validation_failures(changes, fragment):
    problems = validate(tiny(**changes))
    assert any(fragment in p for p in problems), problems
    with pytest.raises(InvalidInstanceError):
        ensure_valid(tiny(**changes))


def test_plan_build_checks_budget():
    inst = tiny()
    assert RetrofitPlan.build(inst, [1, 0]).cost(inst) == 500
    with pytest.raises(BudgetError):
        RetrofitPlan.build(inst, [1, 1])
    with pytest.raises(ValueError):
        RetrofitPlan.build(inst, [2, 0])
    with pytest.raises(ValueError):
        RetrofitPlan.build(inst, [0])


def test_json_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(20):
        inst = random_instance(rng)
        assert model.loads(model.dumps(inst)) == inst


def test_round_trip_unbounded_length(tmp_path):
    inst = tiny(length=math.inf)
    model.save(inst, tmp_path / "i.json")
    doc = json.loads((tmp_path / "i.json").read_text())
    assert doc["length"] == "inf"
    assert model.load(tmp_path / "i.json") == inst


def test_schema_rejects_bad_documents():
    doc = model.to_dict(tiny())
    doc["budget_cents"] = "lots"
    with pytest.raises(InvalidInstanceError, match="budget_cents"):
        model.check_document(doc)
    doc = model.to_dict(tiny())
    doc["schema_version"] = 99
    with pytest.raises(InvalidInstanceError):
        model.loads(json.dumps(doc))


def test_wgs84_projection_round_trip():
    lonlat = np.array([[-97.5, 35.4], [-97.4, 35.5]])
    origin = (-97.45, 35.45)
    xy = model.project(lonlat, origin)
    assert np.allclose(model.unproject(xy, origin), lonlat)
    # one degree of latitude is about 69 miles
    assert xy[1, 1] - xy[0, 1] == pytest.approx(6.90547)


def test_scenarios():
    inst = tiny()
    s = TornadoScenario.realize(inst, [1, 1])
    assert s.active == (0, 1)
    assert TornadoScenario.from_segment(inst, s.witness).z == (1, 1)
    assert TornadoScenario.from_segment(inst, Segment((-0.9, 0.9), (-0.9, 0.9))).z == (0, 0)
    with pytest.raises(ValueError):
        TornadoScenario.realize(inst.replace(coords=[[0, 0], [1.9, 0]], delta=0.1, length=0.5), [1, 1])


def test_big_m_is_farthest_corner():
    inst = tiny()
    assert big_m(inst)[0] == pytest.approx(math.hypot(2, 1))


def test_usd_to_cents():
    assert model.usd_to_cents(12.345) == 1234 or model.usd_to_cents(12.345) == 1235
    assert model.usd_to_cents(100000.0) == 10_000_000


def test_csv_loader(tmp_path):
    (tmp_path / "loc.csv").write_text("id,x,y,population,area\na,0,0,100,10\nb,1,0,50,20\n")
    (tmp_path / "d.csv").write_text("id,strategy,value\na,1,500\nb,1,700\n")
    (tmp_path / "c.csv").write_text("id,strategy,plan,value\na,0,1,300\n")
    (tmp_path / "g.csv").write_text("id,strategy,plan,value\na,0,0,40\nb,0,0,30\n")
    inst = model.from_csv(tmp_path / "loc.csv", tmp_path / "d.csv", tmp_path / "c.csv", tmp_path / "g.csv",
                          n_strategies=2, n_plans=2, budget_cents=1000, delta=0.5, length=2.0)
    assert inst.d.tolist() == [[0, 500], [0, 700]]
    assert inst.g[1, 0, 0] == 30
    assert validate(inst) == []
    (tmp_path / "bad.csv").write_text("id,strategy,value\nzz,1,5\n")
    with pytest.raises(InvalidInstanceError, match="bad.csv:2"):
        model.read_cost_csv(tmp_path / "bad.csv", ["a"], 2)
