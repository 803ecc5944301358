import json

import numpy as np

from tornado_retrofit.ccg import solve
from tornado_retrofit.export import plan_geojson, write_geojson
from tornado_retrofit.model import project

from instances import random_instance


def test_geojson_layers(tmp_path):
    inst = random_instance(np.random.default_rng(0), n_locations=5)
    rep = solve(inst)
    doc = plan_geojson(inst, rep.plan, rep.worst_case.z_star)
    kinds = [f["geometry"]["type"] for f in doc["features"]]
    assert kinds.count("Point") == 5
    assert kinds.count("LineString") == 1
    pts = [f for f in doc["features"] if f["geometry"]["type"] == "Point"]
    assert [f["properties"]["strategy"] for f in pts] == list(rep.plan.strategies)
    write_geojson(doc, tmp_path / "p.geojson")
    assert json.loads((tmp_path / "p.geojson").read_text()) == doc


def test_geojson_unprojects_wgs84():
    origin = (-94.5, 37.1)
    lonlat = np.array([[-94.51, 37.09], [-94.49, 37.11]])
    inst = random_instance(np.random.default_rng(1), n_locations=2)
    inst = inst.replace(coords=project(lonlat, origin), crs="wgs84", origin=origin,
                        rect=inst.rect.__class__(-5, 5, -5, 5))
    doc = plan_geojson(inst, solve(inst).plan)
    got = [f["geometry"]["coordinates"] for f in doc["features"] if f["geometry"]["type"] == "Point"]
    assert np.allclose(got, lonlat)
