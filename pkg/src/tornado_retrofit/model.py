"""Problem data: locations, strategy/plan tensors, budget and tornado shape.

Money is held as integer cents so budget checks are exact. Dislocation is in
persons (floats). Index 0 of both the retrofit strategies and the recovery
plans is the zero-cost do-nothing option.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geometry import Rect, Segment, covered_by_segment, segment_cover_feasible

SCHEMA_VERSION = 1
MILES_PER_DEG_LAT = 69.0547


class InvalidInstanceError(ValueError):
    pass


class BudgetError(ValueError):
    pass


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    ids: tuple[str, ...]
    coords: np.ndarray          # (L, 2) planar miles
    population: np.ndarray      # (L,)
    area: np.ndarray            # (L,) m^2
    w: np.ndarray               # (L, S) persons, pre-tornado dislocation
    d: np.ndarray               # (L, S) cents, retrofit cost
    g: np.ndarray               # (L, S, P) persons, post-tornado dislocation
    c: np.ndarray               # (L, S, P) cents, recovery cost
    budget: int                 # cents
    delta: float                # miles
    length: float               # miles, may be inf
    rect: Rect
    crs: str = "planar"
    origin: Optional[tuple[float, float]] = None   # (lon, lat) anchor when crs == "wgs84"
    strategy_names: tuple[str, ...] = ()
    plan_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "coords", _frozen(self.coords, float).reshape(-1, 2))
        object.__setattr__(self, "population", _frozen(self.population, float))
        object.__setattr__(self, "area", _frozen(self.area, float))
        object.__setattr__(self, "w", _frozen(self.w, float))
        object.__setattr__(self, "d", _frozen(self.d, np.int64))
        object.__setattr__(self, "g", _frozen(self.g, float))
        object.__setattr__(self, "c", _frozen(self.c, np.int64))
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "length", float(self.length))
        n_s, n_p = self.g.shape[1], self.g.shape[2]
        if not self.strategy_names:
            object.__setattr__(self, "strategy_names", tuple(["do-nothing"] + [f"S{s}" for s in range(1, n_s)]))
        if not self.plan_names:
            object.__setattr__(self, "plan_names", tuple(["do-nothing"] + [f"P{p}" for p in range(1, n_p)]))

    @property
    def n_locations(self) -> int:
        return len(self.ids)

    @property
    def n_strategies(self) -> int:
        return self.g.shape[1]

    @property
    def n_plans(self) -> int:
        return self.g.shape[2]

    def replace(self, **changes) -> "Instance":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return Instance(**kw)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        for name in self.__dataclass_fields__:
            a, b = getattr(self, name), getattr(other, name)
            if isinstance(a, np.ndarray):
                if a.shape != b.shape or a.dtype != b.dtype or not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True

    __hash__ = None


def validate(inst: Instance) -> list[str]:
    """All invariant violations of ``inst``; empty when well formed."""
    out: list[str] = []
    L = len(inst.ids)
    S, P = inst.n_strategies, inst.n_plans
    shapes = {"coords": (L, 2), "population": (L,), "area": (L,), "w": (L, S), "d": (L, S),
              "g": (L, S, P), "c": (L, S, P)}
    for name, shape in shapes.items():
        if getattr(inst, name).shape != shape:
            out.append(f"{name} has shape {getattr(inst, name).shape}, expected {shape}")
    if out:
        return out
    if len(set(inst.ids)) != L:
        out.append("location ids must be unique")
    for name in ("coords", "population", "area", "w", "g"):
        if not np.all(np.isfinite(getattr(inst, name))):
            out.append(f"{name} must be finite")
    for l in range(L):
        if inst.d[l, 0] != 0:
            out.append(f"do-nothing retrofit cost must be 0 at ℓ={l}")
        for s in range(S):
            if inst.c[l, s, 0] != 0:
                out.append(f"do-nothing recovery cost must be 0 at ({l},{s})")
    for name in ("population", "area", "w", "d", "g", "c"):
        arr = getattr(inst, name)
        for idx in zip(*np.nonzero(arr < 0)):
            out.append(f"{name} must be non-negative at {tuple(int(i) for i in idx)}")
    for l, s, p in zip(*np.nonzero(inst.g > inst.population[:, None, None])):
        out.append(f"dislocation exceeds population at ({l},{s},{p})")
    for l in range(L):
        if not inst.rect.contains(inst.coords[l], tol=0.0):
            out.append(f"location {l} lies outside the rectangle")
    if inst.budget < 0:
        out.append("budget must be non-negative")
    if not inst.delta > 0:
        out.append("delta must be positive")
    if not inst.length >= 0:
        out.append("length must be non-negative")
    if inst.crs not in ("planar", "wgs84"):
        out.append(f"unknown crs {inst.crs!r}")
    if inst.crs == "wgs84" and inst.origin is None:
        out.append("wgs84 instances need a projection origin")
    return out


def ensure_valid(inst: Instance) -> Instance:
    problems = validate(inst)
    if problems:
        raise InvalidInstanceError("; ".join(problems))
    return inst


def big_m(inst: Instance) -> np.ndarray:
    """Per-location largest distance to a corner of the rectangle."""
    corners = np.array(inst.rect.corners)
    diff = inst.coords[:, None, :] - corners[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1]).max(axis=1)


@dataclass(frozen=True)
class RetrofitPlan:
    strategies: tuple[int, ...]

    @classmethod
    def build(cls, inst: Instance, strategies: Sequence[int]) -> "RetrofitPlan":
        s = tuple(int(v) for v in strategies)
        if len(s) != inst.n_locations:
            raise ValueError(f"plan has {len(s)} entries, instance has {inst.n_locations} locations")
        if any(v < 0 or v >= inst.n_strategies for v in s):
            raise ValueError("strategy index out of range")
        plan = cls(s)
        cost = plan.cost(inst)
        if cost > inst.budget:
            raise BudgetError(f"retrofit cost {cost} cents exceeds budget {inst.budget}")
        return plan

    @classmethod
    def do_nothing(cls, inst: Instance) -> "RetrofitPlan":
        return cls((0,) * inst.n_locations)

    def cost(self, inst: Instance) -> int:
        return int(sum(int(inst.d[l, s]) for l, s in enumerate(self.strategies)))

    def pre_dislocation(self, inst: Instance) -> float:
        return math.fsum(float(inst.w[l, s]) for l, s in enumerate(self.strategies))


@dataclass(frozen=True)
class TornadoScenario:
    z: tuple[int, ...]
    witness: Optional[Segment] = None

    @property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.z) if v)

    @classmethod
    def empty(cls, inst: Instance) -> "TornadoScenario":
        p = (inst.rect.xmin, inst.rect.ymin)
        return cls((0,) * inst.n_locations, Segment(p, p))

    @classmethod
    def realize(cls, inst: Instance, z: Sequence[int], **kw) -> "TornadoScenario":
        """Attach a witness segment to ``z``; raises if no tornado realizes it."""
        z = tuple(int(bool(v)) for v in z)
        active = [i for i, v in enumerate(z) if v]
        res = segment_cover_feasible(inst.coords[active], inst.delta, inst.length, inst.rect, **kw)
        if not res.feasible:
            raise ValueError(f"coverage {z} is not realizable ({res.status})")
        return cls(z, res.witness)

    @classmethod
    def from_segment(cls, inst: Instance, seg: Segment) -> "TornadoScenario":
        z = covered_by_segment(inst.coords, seg, inst.delta)
        return cls(tuple(int(v) for v in z), seg)


# --- serialization -------------------------------------------------------


def _length_out(x: float):
    return "inf" if math.isinf(x) else x


def _length_in(x) -> float:
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity"):
            return math.inf
        return float(x)
    return float(x)


def to_dict(inst: Instance) -> dict:
    locs = [{"id": inst.ids[i], "x": float(inst.coords[i, 0]), "y": float(inst.coords[i, 1]),
             "population": float(inst.population[i]), "area": float(inst.area[i])}
            for i in range(inst.n_locations)]
    out = {
        "schema_version": SCHEMA_VERSION,
        "crs": inst.crs,
        "locations": locs,
        "strategies": list(inst.strategy_names),
        "plans": list(inst.plan_names),
        "pre_dislocation": inst.w.tolist(),
        "retrofit_cost_cents": inst.d.tolist(),
        "post_dislocation": inst.g.tolist(),
        "recovery_cost_cents": inst.c.tolist(),
        "budget_cents": inst.budget,
        "delta": inst.delta,
        "length": _length_out(inst.length),
        "rect": [inst.rect.xmin, inst.rect.xmax, inst.rect.ymin, inst.rect.ymax],
    }
    if inst.origin is not None:
        out["origin"] = list(inst.origin)
    return out


def from_dict(doc: dict) -> Instance:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInstanceError(f"unsupported schema_version {version!r}")
    try:
        locs = doc["locations"]
        L = len(locs)
        ids = [str(r["id"]) for r in locs]
        xy = np.array([[r["x"], r["y"]] for r in locs], dtype=float).reshape(L, 2)
        pop = [r["population"] for r in locs]
        area = [r.get("area", 0.0) for r in locs]
        crs = doc.get("crs", "planar")
        origin = tuple(doc["origin"]) if "origin" in doc else None
        if crs == "wgs84" and "origin" not in doc:
            # locations given as lon/lat; project once around the centroid
            origin = (float(xy[:, 0].mean()), float(xy[:, 1].mean())) if L else (0.0, 0.0)
            xy = project(xy, origin)
        rect = doc.get("rect")
        delta = float(doc["delta"])
        rect = Rect(*map(float, rect)) if rect is not None else Rect.around(xy, 2 * delta)
        return Instance(
            ids=tuple(ids), coords=xy, population=pop, area=area,
            w=np.array(doc["pre_dislocation"], dtype=float).reshape(L, -1),
            d=np.array(doc["retrofit_cost_cents"], dtype=np.int64).reshape(L, -1),
            g=np.array(doc["post_dislocation"], dtype=float).reshape(L, len(doc["strategies"]), -1),
            c=np.array(doc["recovery_cost_cents"], dtype=np.int64).reshape(L, len(doc["strategies"]), -1),
            budget=int(doc["budget_cents"]), delta=delta, length=_length_in(doc["length"]),
            rect=rect, crs=crs, origin=origin,
            strategy_names=tuple(doc["strategies"]), plan_names=tuple(doc["plans"]),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"malformed instance document: {exc}") from exc


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=1, sort_keys=True)


def schema() -> dict:
    return json.loads((Path(__file__).with_name("data") / "instance.schema.json").read_text())


def check_document(doc: dict) -> None:
    """Validate an instance document against the bundled JSON schema."""
    import jsonschema

    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInstanceError(f"{where}: {exc.message}") from None


def loads(text: str) -> Instance:
    doc = json.loads(text)
    check_document(doc)
    return from_dict(doc)


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst) + "\n")


def load(path) -> Instance:
    return loads(Path(path).read_text())


def project(lonlat, origin) -> np.ndarray:
    """Equirectangular projection to planar miles around ``origin``."""
    ll = np.asarray(lonlat, dtype=float).reshape(-1, 2)
    lon0, lat0 = origin
    kx = MILES_PER_DEG_LAT * math.cos(math.radians(lat0))
    return np.stack([(ll[:, 0] - lon0) * kx, (ll[:, 1] - lat0) * MILES_PER_DEG_LAT], axis=1)


def unproject(xy, origin) -> np.ndarray:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    lon0, lat0 = origin
    kx = MILES_PER_DEG_LAT * math.cos(math.radians(lat0))
    return np.stack([xy[:, 0] / kx + lon0, xy[:, 1] / MILES_PER_DEG_LAT + lat0], axis=1)


def read_locations_csv(path) -> list[dict]:
    """Rows of ``id,x,y,population,area``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for k, r in enumerate(rows, start=2):
        try:
            out.append({"id": r["id"], "x": float(r["x"]), "y": float(r["y"]),
                        "population": float(r["population"]), "area": float(r.get("area") or 0.0)})
        except (KeyError, ValueError) as exc:
            raise InvalidInstanceError(f"{path}:{k}: bad location row ({exc})") from exc
    return out


def read_cost_csv(path, ids: Sequence[str], n_strategies: int, n_plans: Optional[int] = None) -> np.ndarray:
    """Long-format cost table: ``id,strategy[,plan],value``. Missing cells are 0."""
    index = {v: i for i, v in enumerate(ids)}
    shape = (len(ids), n_strategies) if n_plans is None else (len(ids), n_strategies, n_plans)
    out = np.zeros(shape, dtype=float)
    with open(path, newline="") as fh:
        for k, r in enumerate(csv.DictReader(fh), start=2):
            try:
                key = (index[r["id"]], int(r["strategy"]))
                if n_plans is not None:
                    key += (int(r["plan"]),)
                out[key] = float(r["value"])
            except (KeyError, ValueError, IndexError) as exc:
                raise InvalidInstanceError(f"{path}:{k}: bad cost row ({exc})") from exc
    return out


def from_csv(locations_csv, retrofit_cost_csv, recovery_cost_csv, post_dislocation_csv, *,
             n_strategies: int, n_plans: int, budget_cents: int, delta: float, length: float,
             pre_dislocation_csv=None, rect: Optional[Rect] = None) -> Instance:
    """Assemble an instance from CSV tables; money columns are in cents."""
    locs = read_locations_csv(locations_csv)
    ids = [r["id"] for r in locs]
    xy = np.array([[r["x"], r["y"]] for r in locs]).reshape(-1, 2)
    w = (read_cost_csv(pre_dislocation_csv, ids, n_strategies) if pre_dislocation_csv
         else np.zeros((len(ids), n_strategies)))
    return Instance(
        ids=tuple(ids), coords=xy,
        population=[r["population"] for r in locs], area=[r["area"] for r in locs],
        w=w,
        d=np.rint(read_cost_csv(retrofit_cost_csv, ids, n_strategies)).astype(np.int64),
        g=read_cost_csv(post_dislocation_csv, ids, n_strategies, n_plans),
        c=np.rint(read_cost_csv(recovery_cost_csv, ids, n_strategies, n_plans)).astype(np.int64),
        budget=budget_cents, delta=delta, length=length,
        rect=rect if rect is not None else Rect.around(xy, 2 * delta),
    )


def usd_to_cents(usd: float) -> int:
    return int(round(usd * 100))
