"""Closed subsets of the real line built from finitely many intervals and points.

Every spectrum in the package is a :class:`SpectralSet`. Instances are kept in
a canonical form (sorted, disjoint, points outside intervals), so equality of
sets is plain equality of the stored tuples.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyOperand

#: Endpoint tolerance used by :func:`closure_union`.
CLOSURE_TOL = 1e-12
#: Default merge factor applied to the local sample spacing.
MERGE_FACTOR = 4.0
_SPACING_WINDOW = 8
_SPACING_STEP = 4


def _canonical(intervals, points):
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    merged: list[list[float]] = []
    degenerate = []
    for a, b in ivs:
        if not (np.isfinite(a) and np.isfinite(b)):
            raise ValueError("interval endpoints must be finite")
        if a > b:
            raise ValueError(f"empty interval [{a}, {b}]")
        if a == b:
            degenerate.append(a)
            continue
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    out_iv = tuple((a, b) for a, b in merged)
    pts = sorted(set(float(p) for p in points) | set(degenerate))
    if out_iv and pts:
        lo = np.array([a for a, _ in out_iv])
        hi = np.array([b for _, b in out_iv])
        p = np.asarray(pts)
        k = np.searchsorted(lo, p, side="right") - 1
        inside = (k >= 0) & (p <= hi[np.clip(k, 0, None)])
        pts = [float(x) for x, i in zip(p, inside) if not i]
    for x in pts:
        if not np.isfinite(x):
            raise ValueError("points must be finite")
    return out_iv, tuple(pts)


@dataclass(frozen=True)
class SpectralSet:
    """Finite union of closed intervals and isolated points.

    Parameters
    ----------
    intervals : iterable of (lo, hi)
        Closed intervals; overlapping or touching ones are fused and
        degenerate ones (``lo == hi``) become points.
    points : iterable of float
        Isolated points; those inside an interval are dropped.
    """

    intervals: tuple = ()
    points: tuple = ()

    def __post_init__(self):
        iv, pts = _canonical(self.intervals, self.points)
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "points", pts)

    # -- basic queries -------------------------------------------------
    @classmethod
    def empty(cls) -> "SpectralSet":
        return cls()

    @classmethod
    def interval(cls, lo: float, hi: float) -> "SpectralSet":
        return cls(intervals=[(lo, hi)])

    @classmethod
    def point(cls, x: float) -> "SpectralSet":
        return cls(points=[x])

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.points

    def __bool__(self) -> bool:
        return not self.is_empty

    def components(self) -> list[tuple[float, float]]:
        """All connected components as sorted ``(lo, hi)`` pairs (points have lo == hi)."""
        comps = list(self.intervals) + [(p, p) for p in self.points]
        return sorted(comps)

    @property
    def bounds(self) -> tuple[float, float]:
        if self.is_empty:
            raise EmptyOperand("empty set has no bounds")
        c = self.components()
        return c[0][0], max(b for _, b in c)

    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def distance_to(self, x) -> np.ndarray:
        """Distance from each value of ``x`` to the set."""
        if self.is_empty:
            raise EmptyOperand("distance to the empty set")
        x = np.asarray(x, dtype=float)
        comps = self.components()
        lo = np.array([a for a, _ in comps])
        hi = np.array([b for _, b in comps])
        # components are disjoint, so hi is sorted along with lo
        k = np.searchsorted(lo, x, side="right") - 1
        d = np.full(x.shape, np.inf)
        left = k >= 0
        kk = np.clip(k, 0, None)
        d = np.where(left, np.maximum(x - hi[kk], 0.0), d)
        right = k + 1 < len(lo)
        kr = np.clip(k + 1, None, len(lo) - 1)
        d = np.minimum(d, np.where(right, lo[kr] - x, np.inf))
        return d

    def contains(self, x, tol: float = 0.0):
        return self.distance_to(x) <= tol

    def shift(self, c: float) -> "SpectralSet":
        return SpectralSet([(a + c, b + c) for a, b in self.intervals],
                           [p + c for p in self.points])

    def __or__(self, other: "SpectralSet") -> "SpectralSet":
        return union(self, other)

    def __add__(self, other: "SpectralSet") -> "SpectralSet":
        return minkowski_sum(self, other)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {"intervals": [[a, b] for a, b in self.intervals],
                "points": list(self.points)}

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralSet":
        return cls([tuple(iv) for iv in data.get("intervals", [])],
                   data.get("points", []))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SpectralSet":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        parts = [f"[{a:.10g}, {b:.10g}]" for a, b in self.intervals]
        parts += [f"{{{p:.10g}}}" for p in self.points]
        return "SpectralSet(" + (" u ".join(parts) if parts else "empty") + ")"


def default_merge_gaps(values: np.ndarray) -> np.ndarray:
    """Per-gap merge thresholds: 4 times the local sample spacing.

    The local spacing around the gap between ``values[i]`` and
    ``values[i+1]`` is the median of the ``k``-step mean spacings
    ``(values[j+k] - values[j]) / k`` (``k = 4``) over start positions
    within 8 of ``i``, skipping every step that spans the gap itself.
    Multi-step spacings keep paired or nearly degenerate eigenvalues from
    fragmenting a band, and the median keeps one large gap next to an
    isolated eigenvalue from inflating the threshold for its neighbours.
    """
    v = np.asarray(values, dtype=float)
    m = len(v) - 1
    if m <= 1:
        # a lone gap has no neighbours to compare against; never merge
        return np.zeros(max(m, 0))
    k = min(_SPACING_STEP, m)
    step = (v[k:] - v[:-k]) / k  # step[j] spans gaps j .. j+k-1
    w = _SPACING_WINDOW
    i = np.arange(m)[:, None]
    j = i + np.arange(-w - k + 1, w + 1)[None, :]
    ok = (j >= 0) & (j < len(step)) & ((j + k - 1 < i) | (j > i))
    vals = np.where(ok, step[np.clip(j, 0, len(step) - 1)], np.nan)
    with warnings.catch_warnings():
        # rows without neighbours are expected and mapped to 0 below
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(vals, axis=1)
    return MERGE_FACTOR * np.nan_to_num(med, nan=0.0)


def from_samples(values: Iterable[float], merge_gap: float | None = None) -> SpectralSet:
    """Reconstruct a set from a sorted sample cloud.

    Consecutive samples closer than ``merge_gap`` are fused into one
    interval; singletons become points. With ``merge_gap=None`` the
    threshold adapts to the local spacing (see :func:`default_merge_gaps`).
    """
    v = np.sort(np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                           dtype=float).ravel())
    if v.size == 0:
        return SpectralSet()
    if merge_gap is not None:
        if not merge_gap > 0:
            raise ValueError("merge_gap must be positive")
        gaps = np.full(v.size - 1, float(merge_gap))
    else:
        gaps = default_merge_gaps(v)
    split = np.flatnonzero(np.diff(v) >= gaps) + 1
    intervals, points = [], []
    for run in np.split(v, split):
        if run.size == 1 or run[0] == run[-1]:
            points.append(run[0])
        else:
            intervals.append((run[0], run[-1]))
    return SpectralSet(intervals, points)


def union(s: SpectralSet, t: SpectralSet) -> SpectralSet:
    return SpectralSet(s.intervals + t.intervals, s.points + t.points)


def closure_union(sets: Sequence[SpectralSet], tol: float = CLOSURE_TOL) -> SpectralSet:
    """Union of ``sets`` with endpoint closure at tolerance ``tol``.

    Points within ``tol`` of an interval are absorbed, intervals separated
    by at most ``tol`` are joined, and clusters of points spaced by at most
    ``tol`` collapse to their smallest member.
    """
    ivs, pts = [], []
    for s in sets:
        ivs.extend(s.intervals)
        pts.extend(s.points)
    base = SpectralSet(ivs, pts)
    comps = base.components()
    if not comps:
        return base
    out = [[comps[0][0], comps[0][1], comps[0][1] > comps[0][0]]]
    for a, b in comps[1:]:
        if a - out[-1][1] <= tol:
            out[-1][1] = max(out[-1][1], b)
            out[-1][2] = out[-1][2] or b > a
        else:
            out.append([a, b, b > a])
    new_iv, new_pts = [], []
    for a, b, has_interval in out:
        if has_interval:
            new_iv.append((a, b))
        else:
            # a cluster of points closer than tol is one point, not an interval
            new_pts.append(a)
    return SpectralSet(new_iv, new_pts)


def minkowski_sum(s: SpectralSet, t: SpectralSet) -> SpectralSet:
    """Canonical form of ``{x + y : x in s, y in t}``."""
    if s.is_empty or t.is_empty:
        raise EmptyOperand("minkowski_sum of an empty set")
    cs, ct = s.components(), t.components()
    ivs, pts = [], []
    for a, b in cs:
        for c, d in ct:
            lo, hi = a + c, b + d
            if hi > lo:
                ivs.append((lo, hi))
            else:
                pts.append(lo)
    return SpectralSet(ivs, pts)


def one_sided_hausdorff(s: SpectralSet, t: SpectralSet) -> float:
    """``sup_{x in s} dist(x, t)``, evaluated exactly.

    On an interval of ``s`` the distance to ``t`` is piecewise linear and
    peaks either at an endpoint or at the midpoint of a gap of ``t``, so
    only those candidates are examined.
    """
    if s.is_empty or t.is_empty:
        raise EmptyOperand("hausdorff distance with an empty set")
    cand = list(s.points)
    for a, b in s.intervals:
        cand.extend((a, b))
    comps = t.components()
    mids = np.array([0.5 * (comps[i][1] + comps[i + 1][0]) for i in range(len(comps) - 1)])
    for a, b in s.intervals:
        if mids.size:
            cand.extend(mids[(mids > a) & (mids < b)].tolist())
    return float(np.max(t.distance_to(np.array(cand))))


def hausdorff(s: SpectralSet, t: SpectralSet) -> float:
    return max(one_sided_hausdorff(s, t), one_sided_hausdorff(t, s))
