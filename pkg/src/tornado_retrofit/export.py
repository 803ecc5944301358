"""GeoJSON export of a retrofit plan and its worst-case tornado."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .model import Instance, RetrofitPlan, TornadoScenario, unproject

PALETTE = ("#9e9e9e", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2")


def _xy(inst: Instance, pts) -> list[list[float]]:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if inst.crs == "wgs84" and inst.origin is not None:
        pts = unproject(pts, inst.origin)
    return [[float(x), float(y)] for x, y in pts]


def plan_geojson(inst: Instance, plan: RetrofitPlan, scenario: Optional[TornadoScenario] = None) -> dict:
    """Locations as points colored by strategy, plus the tornado witness as a
    LineString. Coordinates are lon/lat for ``wgs84`` instances and planar
    miles otherwise; the collection's ``properties.crs`` says which."""
    coords = _xy(inst, inst.coords)
    hit = set(scenario.active) if scenario is not None else set()
    feats = []
    for l, s in enumerate(plan.strategies):
        feats.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": coords[l]},
            "properties": {
                "id": inst.ids[l],
                "strategy": int(s),
                "strategy_name": inst.strategy_names[s],
                "color": PALETTE[s % len(PALETTE)],
                "population": float(inst.population[l]),
                "hit": l in hit,
            },
        })
    if scenario is not None and scenario.witness is not None:
        seg = scenario.witness
        feats.append({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": _xy(inst, [seg.e0, seg.e1])},
            "properties": {"kind": "tornado", "width": 2 * inst.delta, "hit_count": len(hit)},
        })
    return {"type": "FeatureCollection", "properties": {"crs": inst.crs}, "features": feats}


def write_geojson(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
