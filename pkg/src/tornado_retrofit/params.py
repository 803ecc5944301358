"""Dislocation and cost parameters from fragility data, and block clustering.

Post-recovery dislocation for a location with population ``N`` under
retrofit strategy ``s`` is ``N * sum_d P[X=1 | Y=d] P[Y=d | s]``, where
``Y`` is the damage state right after the tornado and ``X=1`` means the
location is still not functional at the horizon. ``P[X=1 | Y=d]`` is the
survival function of a lognormal repair time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geometry import Rect
from .model import Instance, usd_to_cents

DAMAGE_STATES = ("Minor", "Moderate", "Extensive", "Complete")
ALPHA_USD_PER_M2 = 862.0
DAMAGE_COST_FRACTIONS = (0.005, 0.023, 0.117, 0.234)


def lognormal_cdf(x: float, median: float, log_std: float) -> float:
    """P[T <= x] for ln T ~ Normal(ln median, log_std**2).

    Written with ``erfc`` so both tails keep full relative precision
    (about 1e-16, well inside a 1e-12 budget).
    """
    if x <= 0:
        return 0.0
    if log_std == 0:
        return 1.0 if x >= median else 0.0
    return 0.5 * math.erfc(-(math.log(x) - math.log(median)) / (log_std * math.sqrt(2.0)))


@dataclass(frozen=True)
class FragilityConfig:
    strategy_names: tuple[str, ...]
    damage_probabilities: tuple[tuple[float, ...], ...]   # [strategy][damage state]
    repair_median_days: tuple[float, ...]
    repair_log_std: tuple[float, ...]
    horizon_days: float = 60.0
    alpha_usd_per_m2: float = ALPHA_USD_PER_M2
    damage_cost_fractions: tuple[float, ...] = DAMAGE_COST_FRACTIONS
    retrofit_cost_usd_per_m2: tuple[float, ...] = ()
    damage_states: tuple[str, ...] = DAMAGE_STATES
    mu: Optional[float] = None
    description: str = ""

    def __post_init__(self):
        D = len(self.damage_states)
        probs = tuple(tuple(float(p) for p in row) for row in self.damage_probabilities)
        object.__setattr__(self, "damage_probabilities", probs)
        if len(probs) != len(self.strategy_names):
            raise ValueError("one damage distribution per strategy is required")
        for name, row in zip(self.strategy_names, probs):
            if len(row) != D:
                raise ValueError(f"strategy {name!r} needs {D} damage probabilities")
            if any(p < 0 for p in row) or abs(math.fsum(row) - 1.0) > 1e-9:
                raise ValueError(f"damage probabilities of {name!r} must be non-negative and sum to 1")
        for attr in ("repair_median_days", "repair_log_std", "damage_cost_fractions"):
            if len(getattr(self, attr)) != D:
                raise ValueError(f"{attr} needs {D} entries")
        if any(m <= 0 for m in self.repair_median_days) or any(s < 0 for s in self.repair_log_std):
            raise ValueError("repair medians must be positive and log-stds non-negative")
        if any(not 0 <= r <= 1 for r in self.damage_cost_fractions):
            raise ValueError("damage cost fractions must lie in [0, 1]")
        if not self.horizon_days > 0:
            raise ValueError("horizon must be positive")
        if self.alpha_usd_per_m2 < 0:
            raise ValueError("replacement cost rate must be non-negative")
        if self.retrofit_cost_usd_per_m2:
            if len(self.retrofit_cost_usd_per_m2) != len(self.strategy_names):
                raise ValueError("one retrofit cost rate per strategy is required")
            if self.retrofit_cost_usd_per_m2[0] != 0:
                raise ValueError("the first strategy is do-nothing and must cost 0")

    @property
    def n_strategies(self) -> int:
        return len(self.strategy_names)

    def still_dislocated(self) -> np.ndarray:
        """P[X=1 | Y=d] for every damage state."""
        return np.array([1.0 - lognormal_cdf(self.horizon_days, m, s)
                         for m, s in zip(self.repair_median_days, self.repair_log_std)])

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "damage_states": list(self.damage_states),
            "strategies": list(self.strategy_names),
            "damage_probabilities": [list(r) for r in self.damage_probabilities],
            "repair_time": {"median_days": list(self.repair_median_days), "log_std": list(self.repair_log_std)},
            "horizon_days": self.horizon_days,
            "alpha_usd_per_m2": self.alpha_usd_per_m2,
            "damage_cost_fractions": list(self.damage_cost_fractions),
            "retrofit_cost_usd_per_m2": list(self.retrofit_cost_usd_per_m2),
            "mu": self.mu,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FragilityConfig":
        rt = doc["repair_time"]
        return cls(
            strategy_names=tuple(doc["strategies"]),
            damage_probabilities=tuple(tuple(r) for r in doc["damage_probabilities"]),
            repair_median_days=tuple(float(v) for v in rt["median_days"]),
            repair_log_std=tuple(float(v) for v in rt["log_std"]),
            horizon_days=float(doc.get("horizon_days", 60.0)),
            alpha_usd_per_m2=float(doc.get("alpha_usd_per_m2", ALPHA_USD_PER_M2)),
            damage_cost_fractions=tuple(doc.get("damage_cost_fractions", DAMAGE_COST_FRACTIONS)),
            retrofit_cost_usd_per_m2=tuple(float(v) for v in doc.get("retrofit_cost_usd_per_m2", ())),
            damage_states=tuple(doc.get("damage_states", DAMAGE_STATES)),
            mu=doc.get("mu"),
            description=doc.get("description", ""),
        )


def load_config(path) -> FragilityConfig:
    return FragilityConfig.from_dict(json.loads(Path(path).read_text()))


def example_config_path() -> Path:
    return Path(__file__).with_name("data") / "fragility_example.json"


def example_config() -> FragilityConfig:
    """Illustrative numbers only; not calibrated to any real building stock."""
    return load_config(example_config_path())


def dislocation_after_recovery(cfg: FragilityConfig, population: float) -> np.ndarray:
    """Expected dislocation at the horizon, one value per strategy."""
    p_x = cfg.still_dislocated()
    probs = np.array(cfg.damage_probabilities)
    return np.array([population * math.fsum(probs[s] * p_x) for s in range(cfg.n_strategies)])


def recovery_cost(cfg: FragilityConfig, area: float) -> np.ndarray:
    """Expected recovery cost in USD, one value per strategy."""
    r = np.array(cfg.damage_cost_fractions)
    probs = np.array(cfg.damage_probabilities)
    return np.array([cfg.alpha_usd_per_m2 * area * math.fsum(r * probs[s]) for s in range(cfg.n_strategies)])


def do_nothing_dislocation(g1: float, population: float, mu: Optional[float] = None) -> float:
    """Dislocation when residents recover on their own.

    Defaults to the midpoint of ``[g1, population]``. With ``mu`` the value is
    ``mu * g1`` capped at the population; ``mu < 1`` would undercut the
    assisted recovery and is rejected.
    """
    if g1 > population + 1e-9 or g1 < 0:
        raise ValueError("g1 must lie in [0, population]")
    if mu is None:
        return (g1 + population) / 2.0
    if not mu >= 1.0 or math.isinf(mu):
        raise ValueError("mu must be a finite factor of at least 1")
    return min(max(mu * g1, g1), population)


@dataclass(frozen=True)
class RawBlock:
    id: str
    point: tuple[float, float]
    population: float
    area: float

    def __post_init__(self):
        if self.population < 0:
            raise ValueError(f"block {self.id}: population must be non-negative")
        if not self.area > 0:
            raise ValueError(f"block {self.id}: area must be positive")


@dataclass(frozen=True)
class Location:
    id: str
    point: tuple[float, float]
    population: float
    area: float
    members: tuple[str, ...] = field(default=())


def read_blocks_csv(path) -> list[RawBlock]:
    """Blocks from a CSV with columns ``id,x,y,population,area``."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RawBlock(row["id"], (float(row["x"]), float(row["y"])),
                                float(row["population"]), float(row["area"])))
    return out


def cluster_blocks(blocks: Sequence[RawBlock], k: int, seed: int = 0) -> list[Location]:
    """Group blocks into ``k`` locations with Lloyd's k-means.

    Each location sits at the population-weighted centroid of its blocks
    (plain centroid when nobody lives there) and sums their population and
    area.
    """
    from sklearn.cluster import KMeans

    n = len(blocks)
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and the number of blocks ({n})")
    pts = np.array([b.point for b in blocks], dtype=float)
    if k == n:
        labels = np.arange(n)
    else:
        km = KMeans(n_clusters=k, algorithm="lloyd", n_init=10, random_state=seed)
        labels = km.fit_predict(pts)
    out = []
    for c in range(k):
        idx = np.nonzero(labels == c)[0]
        if len(idx) == 0:  # pragma: no cover - KMeans relocates empty clusters
            continue
        pop = np.array([blocks[i].population for i in idx])
        w = pop / pop.sum() if pop.sum() > 0 else np.full(len(idx), 1.0 / len(idx))
        centroid = (w[:, None] * pts[idx]).sum(axis=0)
        out.append(Location(
            id=f"loc{len(out)}",
            point=(float(centroid[0]), float(centroid[1])),
            population=float(pop.sum()),
            area=float(sum(blocks[i].area for i in idx)),
            members=tuple(blocks[i].id for i in idx),
        ))
    return out


def within_cluster_sse(blocks: Sequence[RawBlock], locations: Sequence[Location]) -> float:
    """Sum of squared distances from blocks to their cluster's mean point."""
    by_id = {b.id: b for b in blocks}
    total = 0.0
    for loc in locations:
        pts = np.array([by_id[m].point for m in loc.members])
        total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


def build_instance(locations: Sequence[Location], cfg: FragilityConfig, budget_usd: float, delta: float,
                   length: float, rect: Optional[Rect] = None, pad: Optional[float] = None) -> Instance:
    """Instance with two recovery plans: do-nothing and assisted recovery.

    Pre-tornado dislocation is zero for every strategy.
    """
    L, S = len(locations), cfg.n_strategies
    pop = np.array([loc.population for loc in locations])
    area = np.array([loc.area for loc in locations])
    g = np.zeros((L, S, 2))
    c = np.zeros((L, S, 2), dtype=np.int64)
    d = np.zeros((L, S), dtype=np.int64)
    rates = cfg.retrofit_cost_usd_per_m2 or (0.0,) * S
    for l in range(L):
        g1 = dislocation_after_recovery(cfg, pop[l])
        cost = recovery_cost(cfg, area[l])
        for s in range(S):
            g[l, s, 1] = g1[s]
            g[l, s, 0] = do_nothing_dislocation(g1[s], pop[l], cfg.mu)
            c[l, s, 1] = usd_to_cents(cost[s])
            d[l, s] = usd_to_cents(rates[s] * area[l])
    coords = np.array([loc.point for loc in locations], dtype=float)
    if rect is None:
        rect = Rect.around(coords, delta if pad is None else pad)
    return Instance(
        ids=[loc.id for loc in locations], coords=coords, population=pop, area=area,
        w=np.zeros((L, S)), d=d, g=g, c=c, budget=usd_to_cents(budget_usd), delta=delta,
        length=length, rect=rect, strategy_names=tuple(cfg.strategy_names),
        plan_names=("do-nothing", "recover"),
    )
