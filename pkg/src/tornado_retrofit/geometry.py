"""Planar geometry kernel for tornado coverage.

Coordinates are planar miles. A tornado is a segment; a location is hit when
its point lies within ``delta`` of the segment. Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

TOL = 1e-9
FEASIBLE_TOL = 1e-9
INCONCLUSIVE_TOL = 1e-4

Point = tuple[float, float]


@dataclass(frozen=True)
class Segment:
    e0: Point
    e1: Point

    @property
    def length(self) -> float:
        return math.hypot(self.e1[0] - self.e0[0], self.e1[1] - self.e0[1])

    def to_list(self) -> list[list[float]]:
        return [list(self.e0), list(self.e1)]


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Line:
    """Infinite line through ``point`` with unit ``direction``."""

    point: Point
    direction: Point

    @classmethod
    def from_angle(cls, angle: float, offset: float) -> "Line":
        # points x with n.x == offset, n = (-sin, cos)
        u = (math.cos(angle), math.sin(angle))
        n = (-u[1], u[0])
        return cls((n[0] * offset, n[1] * offset), u)

    def distance(self, p) -> float:
        dx, dy = p[0] - self.point[0], p[1] - self.point[1]
        return abs(dx * self.direction[1] - dy * self.direction[0])

    def at(self, t: float) -> Point:
        return (self.point[0] + t * self.direction[0], self.point[1] + t * self.direction[1])


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin <= self.xmax and self.ymin <= self.ymax):
            raise ValueError(f"degenerate rectangle {self}")

    @classmethod
    def around(cls, points, pad: float) -> "Rect":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
        return cls(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))

    @property
    def corners(self) -> list[Point]:
        return [(self.xmin, self.ymin), (self.xmax, self.ymin),
                (self.xmax, self.ymax), (self.xmin, self.ymax)]

    @property
    def center(self) -> Point:
        return ((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    def contains(self, p, tol: float = TOL) -> bool:
        return (self.xmin - tol <= p[0] <= self.xmax + tol
                and self.ymin - tol <= p[1] <= self.ymax + tol)

    def line_window(self, line: Line) -> Optional[tuple[float, float]]:
        """Parameter interval of ``line`` inside the rectangle (slab clipping)."""
        lo, hi = -math.inf, math.inf
        for p0, d, a, b in ((line.point[0], line.direction[0], self.xmin, self.xmax),
                            (line.point[1], line.direction[1], self.ymin, self.ymax)):
            if abs(d) < 1e-15:
                if p0 < a - TOL or p0 > b + TOL:
                    return None
                continue
            t1, t2 = (a - p0) / d, (b - p0) / d
            lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
        if lo > hi + TOL:
            return None
        return lo, hi


def point_segment_distance(p, seg: Segment) -> tuple[float, float]:
    """Distance from ``p`` to ``seg`` and the minimizing parameter ``t`` in [0, 1]."""
    ax, ay = seg.e0
    vx, vy = seg.e1[0] - ax, seg.e1[1] - ay
    wx, wy = p[0] - ax, p[1] - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return math.hypot(wx, wy), 0.0
    t = min(1.0, max(0.0, (wx * vx + wy * vy) / vv))
    return math.hypot(wx - t * vx, wy - t * vy), t


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise ValueError("coordinates must be finite")
    return pts


def infeasible_pairs(points, delta: float, length: float) -> set[tuple[int, int]]:
    """Pairs of indices farther apart than ``2*delta + length``.

    No segment of length at most ``length`` can cover both points of such a
    pair. With an unbounded length the set is empty.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if math.isinf(length):
        return set()
    pts = _as_points(points)
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    i, j = np.nonzero(np.triu(dist > 2 * delta + length, k=1))
    return {(int(a), int(b)) for a, b in zip(i, j)}


def _rotate(p, c: float, s: float) -> Point:
    return (c * p[0] - s * p[1], s * p[0] + c * p[1])


def infeasible_triple_region_contains(l1, l2, p, delta: float, tol: float = TOL) -> bool:
    """True when no line passes within ``delta`` of ``l1``, ``l2`` and ``p``.

    Tests ``p`` against the three upper and the three lower boundary lines of
    the band of lines covering both ``l1`` and ``l2``. Requires the two
    anchors to be more than ``2*delta`` apart.
    """
    x1, y1 = float(l1[0]), float(l1[1])
    x2, y2 = float(l2[0]), float(l2[1])
    px, py = float(p[0]), float(p[1])
    dist = math.hypot(x2 - x1, y2 - y1)
    if not dist > 2 * delta:
        raise ValueError(f"anchor distance {dist} must exceed 2*delta = {2 * delta}")
    if x1 > x2:
        x1, y1, x2, y2 = x2, y2, x1, y1
    alpha = math.asin(2 * delta / dist)
    dx = x2 - x1
    theta = math.atan((y2 - y1) / dx) if dx > 0 else math.pi / 2
    if theta + alpha >= math.pi / 2 - 1e-9 or theta - alpha <= -math.pi / 2 + 1e-9:
        # rotate about l1 so the anchor axis is horizontal
        phi = math.atan2(y2 - y1, x2 - x1)
        c, s = math.cos(-phi), math.sin(-phi)
        x2, y2 = _rotate((x2 - x1, y2 - y1), c, s)
        px, py = _rotate((px - x1, py - y1), c, s)
        x1, y1 = 0.0, 0.0
        y2 = 0.0
        theta = 0.0

    t0, tp, tm = math.tan(theta), math.tan(theta + alpha), math.tan(theta - alpha)
    band = 2 * delta / math.cos(theta)
    above = (py > t0 * (px - x1) + y1 + band + tol
             and py > tp * (px - x1) + y1 + tol
             and py > tm * (px - x2) + y2 + tol)
    below = (py < t0 * (px - x1) + y1 - band - tol
             and py < tp * (px - x2) + y2 - tol
             and py < tm * (px - x1) + y1 - tol)
    return above or below


def infeasible_triples(points, delta: float) -> set[tuple[int, int, int]]:
    """Sorted index triples that no line can cover within ``delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    pts = _as_points(points)
    n = len(pts)
    found: set[tuple[int, int, int]] = set()
    for a, b in itertools.combinations(range(n), 2):
        if math.dist(pts[a], pts[b]) <= 2 * delta:
            continue
        for c in range(n):
            if c == a or c == b:
                continue
            key = tuple(sorted((a, b, c)))
            if key in found:
                continue
            if infeasible_triple_region_contains(pts[a], pts[b], pts[c], delta):
                found.add(key)
    return found


@dataclass(frozen=True)
class StabResult:
    line: Line
    count: int
    stabbed: tuple[int, ...]


def _dedupe(pts: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    uniq: list[np.ndarray] = []
    groups: list[list[int]] = []
    for i, p in enumerate(pts):
        for k, q in enumerate(uniq):
            if abs(p[0] - q[0]) <= TOL and abs(p[1] - q[1]) <= TOL:
                groups[k].append(i)
                break
        else:
            uniq.append(p)
            groups.append([i])
    return np.array(uniq).reshape(-1, 2), groups


def _tangent_angles(centers: np.ndarray, anchor: int, radius: float) -> np.ndarray:
    """Endpoints of the arc-intervals on the anchor circle.

    The tangent to the anchor at angle phi (outward normal ``n``) meets disk
    ``b`` iff ``0 <= n.(c_b - c_a) <= 2r``. Overlapping disks give one
    interval bounded by the external tangents; disjoint disks give two, cut
    at the internal tangents.
    """
    v = np.delete(centers - centers[anchor], anchor, axis=0)
    d = np.hypot(v[:, 0], v[:, 1])
    psi = np.arctan2(v[:, 1], v[:, 0])
    ext = np.concatenate([psi - math.pi / 2, psi + math.pi / 2])
    far = d > 2 * radius
    gamma = np.arccos(np.clip(2 * radius / np.where(far, d, 1.0), -1.0, 1.0))
    internal = np.concatenate([(psi - gamma)[far], (psi + gamma)[far]])
    angles = np.concatenate([ext, internal, [0.0]])
    return np.mod(angles, 2 * math.pi)


def stabbing_line(disks: Sequence[Disk] | np.ndarray, radius: Optional[float] = None) -> StabResult:
    """Line meeting the largest number of equal-radius disks.

    ``disks`` is either a sequence of :class:`Disk` or an ``(m, 2)`` array of
    centers together with ``radius``. For every anchor disk the candidate
    lines are its tangents at the arc-interval endpoints; some optimal line is
    always of that form. Reported indices refer to the input order.
    """
    if radius is None:
        if len(disks) == 0:
            raise ValueError("need at least one disk")
        radii = {d.radius for d in disks}
        if len(radii) != 1:
            raise ValueError("stabbing_line supports a single common radius")
        radius = radii.pop()
        pts = _as_points([d.center for d in disks])
    else:
        pts = _as_points(disks)
        if len(pts) == 0:
            raise ValueError("need at least one disk")
    uniq, groups = _dedupe(pts)
    m = len(uniq)
    weight = np.array([len(g) for g in groups])

    best: Optional[tuple[int, Line]] = None
    if m == 1:
        best = (1, Line(tuple(uniq[0]), (1.0, 0.0)))
    else:
        for a in range(m):
            phi = _tangent_angles(uniq, a, radius)
            normals = np.stack([np.cos(phi), np.sin(phi)], axis=1)
            offsets = normals @ uniq[a] + radius
            gap = np.abs(uniq @ normals.T - offsets[None, :])
            counts = ((gap <= radius + TOL) * weight[:, None]).sum(axis=0)
            k = int(np.argmax(counts))
            if best is None or counts[k] > best[0]:
                n = normals[k]
                line = Line((float(uniq[a][0] + radius * n[0]), float(uniq[a][1] + radius * n[1])),
                            (float(-n[1]), float(n[0])))
                best = (int(counts[k]), line)
            if best[0] == len(pts):
                break
    line = best[1]
    stabbed = tuple(i for i in range(len(pts)) if line.distance(pts[i]) <= radius + TOL)
    return StabResult(line, len(stabbed), stabbed)


def _chords(a: np.ndarray, b: np.ndarray, q, delta: float):
    """Per-center chord of the line ``n.x = q`` inside each disk, as intervals
    of the along-line coordinate. Broadcasts over leading axes of ``q``."""
    gap = np.abs(b - q)
    half = np.sqrt(np.maximum(delta * delta - gap * gap, 0.0))
    return a - half, a + half, gap


def _min_cover(lo: np.ndarray, hi: np.ndarray):
    """Shortest interval meeting every ``[lo_i, hi_i]`` (along the last axis)."""
    start = hi.min(axis=-1)
    stop = lo.max(axis=-1)
    return start, stop, np.maximum(stop - start, 0.0)


def shortest_covering_segment_on_line(line: Line, centers, delta: float,
                                      rect: Optional[Rect] = None) -> Optional[Segment]:
    """Shortest segment of ``line`` within ``delta`` of every center.

    Each center contributes the chord of the line inside its disk; the
    segment runs from the smallest chord end to the largest chord start
    (extreme projections pulled inward by the half-chord). With ``rect``
    the segment is confined to the rectangle; ``None`` when that is
    impossible.
    """
    pts = _as_points(centers)
    u = np.array(line.direction)
    o = np.array(line.point)
    rel = pts - o
    t = rel @ u
    off = rel[:, 0] * u[1] - rel[:, 1] * u[0]
    if np.any(np.abs(off) > delta + TOL):
        raise ValueError("line does not stab every disk")
    half = np.sqrt(np.maximum(delta * delta - off * off, 0.0))
    lo, hi = t - half, t + half
    if rect is not None:
        win = rect.line_window(line)
        if win is None:
            return None
        lo, hi = np.maximum(lo, win[0]), np.minimum(hi, win[1])
        if np.any(lo > hi + TOL):
            return None
    start, stop = float(hi.min()), float(lo.max())
    if start >= stop:
        mid = (start + stop) / 2
        return Segment(line.at(mid), line.at(mid))
    return Segment(line.at(start), line.at(stop))


@dataclass(frozen=True)
class CoverResult:
    status: str  # "feasible" | "infeasible" | "inconclusive"
    witness: Optional[Segment] = None
    residual: float = 0.0
    stage: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _common_point(pts: np.ndarray, delta: float) -> Optional[Point]:
    """A point within ``delta`` of all centers, if one exists.

    The lowest-x point of an intersection of disks is either the leftmost
    point of one disk or a crossing of two circles, so those candidates
    decide emptiness exactly.
    """
    cands = [p - np.array([delta, 0.0]) for p in pts] + [p for p in pts]
    for a, b in itertools.combinations(range(len(pts)), 2):
        d = math.dist(pts[a], pts[b])
        if d == 0 or d > 2 * delta + TOL:
            continue
        mid = (pts[a] + pts[b]) / 2
        h = math.sqrt(max(delta * delta - d * d / 4, 0.0))
        perp = np.array([-(pts[b][1] - pts[a][1]), pts[b][0] - pts[a][0]]) / d
        cands += [mid + h * perp, mid - h * perp]
    for c in cands:
        if np.all(np.hypot(*(pts - c).T) <= delta + TOL):
            return (float(c[0]), float(c[1]))
    return None


def _segment_ok(seg: Segment, pts: np.ndarray, delta: float, length: float,
                rect: Optional[Rect]) -> bool:
    if seg.length > length + FEASIBLE_TOL:
        return False
    if rect is not None and not (rect.contains(seg.e0) and rect.contains(seg.e1)):
        return False
    return all(point_segment_distance(p, seg)[0] <= delta + FEASIBLE_TOL for p in pts)


class _SegmentSearch:
    """Minimize the shortest covering length over lines ``(angle, s)``.

    A line has direction angle ``beta`` and normal offset ``q``; ``s`` in
    [-1, 1] places ``q`` inside the interval of offsets whose line meets
    every disk, so the search box is fixed. Infeasible angles get a penalty
    above any real length.
    """

    def __init__(self, pts: np.ndarray, delta: float, rect: Optional[Rect]):
        self.pts = pts
        self.delta = delta
        self.rect = rect
        span = np.ptp(pts, axis=0) if len(pts) > 1 else np.zeros(2)
        self.big = 10.0 * (float(np.hypot(*span)) + 4 * delta + 1.0)

    def _frame(self, beta):
        cb, sb = np.cos(beta)[..., None], np.sin(beta)[..., None]
        a = cb * self.pts[:, 0] + sb * self.pts[:, 1]
        b = -sb * self.pts[:, 0] + cb * self.pts[:, 1]
        return a, b

    def offsets(self, beta, s):
        a, b = self._frame(beta)
        qlo = b.max(axis=-1) - self.delta
        qhi = b.min(axis=-1) + self.delta
        q = (qlo + qhi) / 2 + np.clip(s, -1, 1) * (qhi - qlo) / 2
        return a, b, q, qhi - qlo

    def value(self, beta, s):
        beta = np.asarray(beta, dtype=float)
        s = np.asarray(s, dtype=float)
        a, b, q, width = self.offsets(beta, s)
        lo, hi, _ = _chords(a, b, q[..., None], self.delta)
        if self.rect is not None:
            wlo, whi = self._windows(beta, q)
            lo = np.maximum(lo, wlo[..., None])
            hi = np.minimum(hi, whi[..., None])
            empty = np.maximum(lo - hi, 0.0).max(axis=-1)
        else:
            empty = 0.0
        _, _, length = _min_cover(lo, hi)
        pen = np.where(width < 0, self.big + (-width), 0.0) + np.where(empty > TOL, self.big + empty, 0.0)
        return length + pen

    def _windows(self, beta, q):
        # along-line coordinate range inside the rectangle for n.x = q
        r = self.rect
        u = np.stack([np.cos(beta), np.sin(beta)], axis=-1)
        n = np.stack([-u[..., 1], u[..., 0]], axis=-1)
        o = n * q[..., None]
        lo = np.full(q.shape, -np.inf)
        hi = np.full(q.shape, np.inf)
        for k, (a, b) in enumerate(((r.xmin, r.xmax), (r.ymin, r.ymax))):
            d = u[..., k]
            small = np.abs(d) < 1e-15
            dd = np.where(small, 1.0, d)
            t1, t2 = (a - o[..., k]) / dd, (b - o[..., k]) / dd
            outside = small & ((o[..., k] < a - TOL) | (o[..., k] > b + TOL))
            lo = np.where(small, np.where(outside, np.inf, lo), np.maximum(lo, np.minimum(t1, t2)))
            hi = np.where(small, np.where(outside, -np.inf, hi), np.minimum(hi, np.maximum(t1, t2)))
        return lo, hi

    def seed_from_line(self, line: Line) -> tuple[float, float]:
        beta = math.atan2(line.direction[1], line.direction[0]) % math.pi
        u = (math.cos(beta), math.sin(beta))
        q = -u[1] * line.point[0] + u[0] * line.point[1]
        _, _, _, width = self.offsets(np.array(beta), np.array(0.0))
        a, b = self._frame(np.array(beta))
        qlo, qhi = b.max() - self.delta, b.min() + self.delta
        s = 0.0 if qhi - qlo <= 0 else 2 * (q - (qlo + qhi) / 2) / (qhi - qlo)
        return beta, float(np.clip(s, -1, 1))

    def segment(self, beta: float, s: float) -> Optional[Segment]:
        a, b, q, width = self.offsets(np.array(beta), np.array(s))
        if width < -TOL:
            return None
        line = Line.from_angle(beta, float(q))
        try:
            return shortest_covering_segment_on_line(line, self.pts, self.delta, self.rect)
        except ValueError:
            return None


def _local_search(search: _SegmentSearch, starts: np.ndarray, target: float,
                  iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pattern search from every start at once."""
    x = starts.copy()
    fx = search.value(x[:, 0], x[:, 1])
    step = np.tile([math.pi / 64, 0.25], (len(x), 1))
    dirs = np.array([[math.cos(t), math.sin(t)] for t in np.linspace(0, 2 * math.pi, 16, endpoint=False)])
    for _ in range(iters):
        if np.any(fx <= target):
            break
        cand = x[:, None, :] + dirs[None, :, :] * step[:, None, :]
        cand[..., 1] = np.clip(cand[..., 1], -1, 1)
        fc = search.value(cand[..., 0], cand[..., 1])
        k = np.argmin(fc, axis=1)
        fbest = fc[np.arange(len(x)), k]
        better = fbest < fx - 1e-15
        x[better] = cand[better, k[better]]
        fx[better] = fbest[better]
        step[~better] *= 0.5
        if np.all(step[:, 0] < 1e-12):
            break
    return x, fx


def segment_cover_feasible(centers, delta: float, length: float, rect: Optional[Rect] = None,
                           *, n_starts: int = 64, seed: int = 0) -> CoverResult:
    """Decide whether one segment of length at most ``length`` with endpoints
    in ``rect`` passes within ``delta`` of every center.

    Order of checks: pair distances, the stabbing line, the shortest segment
    on the stabbing line, and finally a multistart search over lines. A
    search that gets within ``INCONCLUSIVE_TOL`` miles of the length limit
    without reaching it reports ``"inconclusive"``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if length < 0:
        raise ValueError("length must be non-negative")
    pts = _as_points(centers)
    if len(pts) == 0:
        anchor = rect.center if rect is not None else (0.0, 0.0)
        return CoverResult("feasible", Segment(anchor, anchor), stage="empty")
    pts, _ = _dedupe(pts)
    if len(pts) == 1:
        p = (float(pts[0][0]), float(pts[0][1]))
        return CoverResult("feasible", Segment(p, p), stage="single")

    if infeasible_pairs(pts, delta, length):
        return CoverResult("infeasible", stage="pair")

    if length == 0:
        c = _common_point(pts, delta)
        if c is None:
            return CoverResult("infeasible", stage="point")
        return CoverResult("feasible", Segment(c, c), stage="point")

    stab = stabbing_line(pts, delta)
    if stab.count < len(pts):
        return CoverResult("infeasible", stage="stabbing")

    seg = shortest_covering_segment_on_line(stab.line, pts, delta, rect)
    if math.isinf(length):
        if seg is None:
            seg = shortest_covering_segment_on_line(stab.line, pts, delta)
        return CoverResult("feasible", seg, stage="stabbing")
    if seg is not None and _segment_ok(seg, pts, delta, length, rect):
        return CoverResult("feasible", seg, stage="projection")

    return _search(pts, delta, length, rect, stab, n_starts, seed)


def _box_starts(pts: np.ndarray, delta: float, search: _SegmentSearch, rng, count: int) -> list:
    """Starts drawn from the boxes around the two most distant centers, which
    must each contain one endpoint."""
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    i, j = np.unravel_index(int(np.argmax(d)), d.shape)
    out = []
    for _ in range(count):
        e0 = pts[i] + rng.uniform(-delta, delta, size=2)
        e1 = pts[j] + rng.uniform(-delta, delta, size=2)
        v = e1 - e0
        if np.hypot(*v) == 0:
            continue
        beta = math.atan2(v[1], v[0])
        out.append(search.seed_from_line(Line((float(e0[0]), float(e0[1])), (math.cos(beta), math.sin(beta)))))
    return out


def _search(pts, delta, length, rect, stab: StabResult, n_starts: int, seed: int) -> CoverResult:
    search = _SegmentSearch(pts, delta, rect)
    rng = np.random.default_rng(seed)

    seeds: list[tuple[float, float]] = [search.seed_from_line(stab.line)]
    pairs = sorted(itertools.combinations(range(len(pts)), 2),
                   key=lambda ab: -math.dist(pts[ab[0]], pts[ab[1]]))
    for a, b in pairs[: n_starts // 4]:
        v = pts[b] - pts[a]
        beta = math.atan2(v[1], v[0]) % math.pi
        for s in (-1.0, 0.0, 1.0):
            seeds.append((beta, s))

    betas = np.linspace(0, math.pi, 256, endpoint=False)
    ss = np.linspace(-1, 1, 17)
    grid_b, grid_s = np.meshgrid(betas, ss, indexing="ij")
    fgrid = search.value(grid_b, grid_s).ravel()
    order = np.argsort(fgrid, kind="stable")
    for k in order[: n_starts // 4]:
        seeds.append((float(grid_b.ravel()[k]), float(grid_s.ravel()[k])))
    seeds += _box_starts(pts, delta, search, rng, n_starts // 4)
    starts = np.array(seeds[:n_starts])

    x, fx = _local_search(search, starts, target=length)
    best = None
    for k in np.argsort(fx, kind="stable")[:8]:
        seg = search.segment(float(x[k, 0]), float(x[k, 1]))
        if seg is None:
            continue
        if _segment_ok(seg, pts, delta, length, rect):
            return CoverResult("feasible", seg, residual=seg.length - length, stage="search")
        if best is None:
            best = seg
    residual = float(fx.min()) - length
    if residual <= INCONCLUSIVE_TOL:
        logger.warning("segment feasibility inconclusive (residual %.3g mi); treated as infeasible", residual)
        return CoverResult("inconclusive", best, residual=residual, stage="search")
    return CoverResult("infeasible", residual=residual, stage="search")


def covered_by_segment(points, seg: Segment, delta: float) -> np.ndarray:
    """0/1 coverage vector of ``points`` for a tornado following ``seg``."""
    pts = _as_points(points)
    return np.array([1 if point_segment_distance(p, seg)[0] <= delta + TOL else 0 for p in pts], dtype=int)


def sweep_max_coverage(points, delta: float, n_angles: int = 3600) -> int:
    """Largest number of points a line can cover, by a dense angle sweep with
    exact offsets at each angle. Under-approximates the true maximum only
    through angle discretization."""
    pts = _as_points(points)
    betas = np.linspace(0, math.pi, n_angles, endpoint=False)
    b = -np.sin(betas)[:, None] * pts[:, 0] + np.cos(betas)[:, None] * pts[:, 1]
    best = 0
    for row in b:
        ends = np.sort(row)
        # intervals [b - delta, b + delta]: count starts within 2*delta after each start
        cnt = np.searchsorted(ends, ends + 2 * delta + TOL, side="right") - np.arange(len(ends))
        best = max(best, int(cnt.max()))
    return best


def arc_interval_features(centers, delta: float, anchor: int) -> list[dict]:
    """GeoJSON LineString features tracing the arc-intervals on one anchor
    circle (debug export)."""
    pts = _as_points(centers)
    feats = []
    c = pts[anchor]
    for b in range(len(pts)):
        if b == anchor:
            continue
        v = pts[b] - c
        d = float(np.hypot(*v))
        psi = math.atan2(v[1], v[0])
        if d <= 2 * delta:
            spans = [(psi - math.pi / 2, psi + math.pi / 2)]
        else:
            g = math.acos(2 * delta / d)
            spans = [(psi - math.pi / 2, psi - g), (psi + g, psi + math.pi / 2)]
        for lo, hi in spans:
            ts = np.linspace(lo, hi, 16)
            coords = [[float(c[0] + delta * math.cos(t)), float(c[1] + delta * math.sin(t))] for t in ts]
            feats.append({"type": "Feature",
                          "geometry": {"type": "LineString", "coordinates": coords},
                          "properties": {"anchor": anchor, "other": b}})
    return feats


def conflict_features(centers, pairs: Iterable, triples: Iterable) -> list[dict]:
    """GeoJSON features joining the members of each conflict set (debug export)."""
    pts = _as_points(centers)
    feats = []
    for kind, sets in (("pair", pairs), ("triple", triples)):
        for idx in sets:
            ring = [[float(pts[i][0]), float(pts[i][1])] for i in idx]
            if kind == "pair":
                geom = {"type": "LineString", "coordinates": ring}
            else:
                geom = {"type": "Polygon", "coordinates": [ring + [ring[0]]]}
            feats.append({"type": "Feature", "geometry": geom,
                          "properties": {"conflict": kind, "members": list(idx)}})
    return feats
