"""Structured bounded coefficient functions on Z^d.

Each class evaluates vectorised over integer points, stores a sup bound and
knows how to translate itself (``shifted(v)`` is ``y -> phi(y + v)``). The
localization layer dispatches on the concrete class to compute limits at
infinity symbolically.

Expression, warp, decay-form and schedule ids live in module-level
registries so configuration files can refer to them by name.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidSpec, UnknownId

__all__ = [
    "Coefficient", "Constant", "Decaying", "SlowlyOscillating", "Periodic", "DomainWall",
    "SparseBumps", "WarpedPeriodic", "Warp", "Tabulated", "AxisFunction", "Composite",
    "single_site", "minimal_rotation", "as_points", "as_vector",
    "DECAY_FORMS", "OSCILLATORS", "WARPS", "WARP_SLIPS", "WARP_FORMULAS", "SCHEDULES",
]

#: Beyond this tail size a decaying perturbation is treated as zero.
TAIL_TOL = 1e-12
#: Horizon up to which sparse schedules are checked at construction.
SPARSE_HORIZON = 10**6


def as_points(x, dim: int) -> np.ndarray:
    """Coerce lattice points to an ``(n, dim)`` int64 array."""
    a = np.asarray(x, dtype=np.int64)
    if dim == 1 and a.ndim <= 1:
        return a.reshape(-1, 1)
    a = np.atleast_2d(a)
    if a.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {a.shape}")
    return a.reshape(-1, dim)


def as_vector(v, dim: int) -> tuple:
    v = tuple(int(t) for t in np.asarray(v, dtype=np.int64).ravel())
    if len(v) != dim:
        raise ValueError(f"vector {v} does not have dimension {dim}")
    return v


class Coefficient:
    """Base class: a bounded real function on Z^dim."""

    kind = "abstract"
    dim: int = 1

    def values(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return float(self.values(as_points(x, self.dim))[0])

    @property
    def sup(self) -> float:
        raise NotImplementedError

    def shifted(self, v) -> "Coefficient":
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        return Composite("shift", (self,), shift=v)

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


# ---------------------------------------------------------------------------
# constant and decaying

class Constant(Coefficient):
    kind = "constant"

    def __init__(self, value: float, dim: int = 1):
        self.value = float(value)
        self.dim = int(dim)

    def values(self, x):
        return np.full(as_points(x, self.dim).shape[0], self.value)

    @property
    def sup(self):
        return abs(self.value)

    def shifted(self, v):
        as_vector(v, self.dim)
        return self

    def _key(self):
        return (self.value, self.dim)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


def _exp_form(r, amplitude=1.0, length=1.0):
    return amplitude * np.exp(-r / length)


def _gauss_form(r, amplitude=1.0, width=1.0):
    return amplitude * np.exp(-(r / width) ** 2)


def _exp_radius(amplitude=1.0, length=1.0):
    return length * max(0.0, math.log(abs(amplitude) / TAIL_TOL)) if amplitude else 0.0


def _gauss_radius(amplitude=1.0, width=1.0):
    return width * math.sqrt(max(0.0, math.log(abs(amplitude) / TAIL_TOL))) if amplitude else 0.0


#: closed-form decay profiles: id -> (profile(r, **params), radius(**params))
DECAY_FORMS: dict[str, tuple[Callable, Callable]] = {
    "exp": (_exp_form, _exp_radius),
    "gauss": (_gauss_form, _gauss_radius),
}


class Decaying(Coefficient):
    """``limit`` plus a perturbation vanishing at infinity.

    The perturbation is a finite table ``support`` (offset -> value, relative
    to ``center``) and/or a radial closed form from :data:`DECAY_FORMS`
    evaluated at the Euclidean distance from ``center``. The closed form
    is cut to zero beyond the radius where it drops below ``TAIL_TOL``.
    """

    kind = "decaying"

    def __init__(self, limit: float = 0.0, support=None, form=None, form_params=None,
                 center=None, dim: int = 1):
        self.dim = int(dim)
        self.limit = float(limit)
        items = []
        for k, val in dict(support or {}).items():
            items.append((as_vector(k, self.dim), float(val)))
        self.support = tuple(sorted(items))
        if form is not None and form not in DECAY_FORMS:
            raise UnknownId(f"unknown decay form {form!r}")
        self.form = form
        self.form_params = tuple(sorted((form_params or {}).items()))
        self.center = as_vector(center if center is not None else (0,) * self.dim, self.dim)
        if self.support:
            self._off = np.array([k for k, _ in self.support], dtype=np.int64)
            self._val = np.array([v for _, v in self.support])
        else:
            self._off = np.zeros((0, self.dim), dtype=np.int64)
            self._val = np.zeros(0)

    @property
    def form_radius(self) -> float:
        if self.form is None:
            return 0.0
        return DECAY_FORMS[self.form][1](**dict(self.form_params))

    @property
    def radius(self) -> int:
        """Sup-norm radius around ``center`` outside which the value is ``limit``."""
        r = int(np.abs(self._off).max()) if len(self._off) else 0
        return max(r, int(math.ceil(self.form_radius)))

    def support_box(self) -> tuple[tuple, tuple] | None:
        """Tight lattice box outside which the value is ``limit`` (None if nowhere)."""
        boxes = []
        if len(self._off):
            boxes.append((self._off.min(axis=0), self._off.max(axis=0)))
        if self.form is not None:
            r = int(math.ceil(self.form_radius))
            boxes.append((np.full(self.dim, -r), np.full(self.dim, r)))
        if not boxes:
            return None
        c = np.asarray(self.center)
        lo = np.min([b[0] for b in boxes], axis=0) + c
        hi = np.max([b[1] for b in boxes], axis=0) + c
        return tuple(int(t) for t in lo), tuple(int(t) for t in hi)

    @property
    def is_compact(self) -> bool:
        return self.form is None

    def perturbation(self, x) -> np.ndarray:
        p = as_points(x, self.dim) - np.asarray(self.center)
        out = np.zeros(p.shape[0])
        if len(self._off):
            # exact lookup of table offsets
            for off, val in zip(self._off, self._val):
                out[np.all(p == off, axis=1)] += val
        if self.form is not None:
            r = np.sqrt(np.sum(p.astype(float) ** 2, axis=1))
            fr = DECAY_FORMS[self.form][0](r, **dict(self.form_params))
            out += np.where(r <= self.form_radius, fr, 0.0)
        return out

    def values(self, x):
        return self.limit + self.perturbation(x)

    @property
    def sup(self):
        amp = abs(dict(self.form_params).get("amplitude", 1.0)) if self.form else 0.0
        tab = float(np.abs(self._val).max()) if len(self._val) else 0.0
        return abs(self.limit) + tab + amp

    def shifted(self, v):
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        c = tuple(ci - vi for ci, vi in zip(self.center, v))
        return Decaying(self.limit, dict(self.support), self.form, dict(self.form_params),
                        center=c, dim=self.dim)

    def _key(self):
        return (self.limit, self.support, self.form, self.form_params, self.center, self.dim)

    def to_dict(self):
        d = {"kind": self.kind, "limit": self.limit,
             "support": [[list(k), v] for k, v in self.support], "center": list(self.center)}
        if self.form:
            d["form"] = self.form
            d["form_params"] = dict(self.form_params)
        return d


def single_site(value: float, at=0, dim: int = 1) -> Decaying:
    """Potential equal to ``value`` at one site and 0 elsewhere."""
    return Decaying(0.0, {as_vector(at, dim): value}, dim=dim)


# ---------------------------------------------------------------------------
# slowly oscillating

def _phase_sequence(power):
    def seq(value, amplitude, kind, n):
        t = np.clip(value / amplitude, -1.0, 1.0) if amplitude else 0.0
        base = math.asin(t) if kind == "sin" else math.acos(t)
        k = np.arange(1, n + 1, dtype=float)
        return np.round((base + 2.0 * np.pi * k) ** power).astype(np.int64)
    return seq


#: id -> (profile of the radius, phase power, trig kind)
OSCILLATORS: dict[str, tuple[Callable, float, str]] = {
    "sin_sqrt": (lambda r: np.sin(np.sqrt(r)), 2.0, "sin"),
    "cos_sqrt": (lambda r: np.cos(np.sqrt(r)), 2.0, "cos"),
    "sin_cbrt": (lambda r: np.sin(np.cbrt(r)), 3.0, "sin"),
}


class SlowlyOscillating(Coefficient):
    """``amplitude * f(|x + offset|) + mean`` with ``f`` from :data:`OSCILLATORS`.

    ``asymptotic_range`` declares the cluster set at infinity; it defaults
    to ``[mean - |amplitude|, mean + |amplitude|]``, which the registered
    profiles attain.
    """

    kind = "slowly_oscillating"

    def __init__(self, expr: str, amplitude: float = 1.0, mean: float = 0.0,
                 asymptotic_range=None, offset=None, dim: int = 1):
        if expr not in OSCILLATORS:
            raise UnknownId(f"unknown oscillator expression {expr!r}")
        self.expr = expr
        self.dim = int(dim)
        self.amplitude = float(amplitude)
        self.mean = float(mean)
        if asymptotic_range is None:
            asymptotic_range = (self.mean - abs(self.amplitude), self.mean + abs(self.amplitude))
        lo, hi = (float(t) for t in asymptotic_range)
        if lo > hi:
            raise InvalidSpec("asymptotic range must have lo <= hi")
        self.asymptotic_range = (lo, hi)
        self.offset = as_vector(offset if offset is not None else (0,) * self.dim, self.dim)

    def values(self, x):
        p = as_points(x, self.dim) + np.asarray(self.offset)
        r = np.sqrt(np.sum(p.astype(float) ** 2, axis=1))
        return self.mean + self.amplitude * OSCILLATORS[self.expr][0](r)

    @property
    def sup(self):
        return abs(self.mean) + abs(self.amplitude)

    def cluster_radii(self, value: float, n: int) -> np.ndarray:
        """Increasing radii ``r_j`` along which the profile tends to ``value``."""
        _, power, trig = OSCILLATORS[self.expr]
        amp = self.amplitude
        t = (value - self.mean) / amp if amp else 0.0
        # sign of amplitude folds into the target
        return _phase_sequence(power)(t, 1.0, trig, n)

    def shifted(self, v):
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        off = tuple(a + b for a, b in zip(self.offset, v))
        return SlowlyOscillating(self.expr, self.amplitude, self.mean, self.asymptotic_range,
                                 off, self.dim)

    def _key(self):
        return (self.expr, self.amplitude, self.mean, self.asymptotic_range, self.offset, self.dim)

    def to_dict(self):
        return {"kind": self.kind, "expr": self.expr, "amplitude": self.amplitude,
                "mean": self.mean, "asymptotic_range": list(self.asymptotic_range),
                "offset": list(self.offset)}


# ---------------------------------------------------------------------------
# periodic

def minimal_rotation(table: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Lexicographically smallest cyclic rotation of a period table and its shift."""
    best, best_s = None, None
    for s in np.ndindex(*table.shape):
        r = np.roll(table, tuple(-t for t in s), axis=tuple(range(table.ndim)))
        key = tuple(r.ravel().tolist())
        if best is None or key < best[0]:
            best, best_s = (key, r), s
    return best[1], tuple(int(t) for t in best_s)


class Periodic(Coefficient):
    """``table[x mod period]`` with ``table`` of shape ``period``."""

    kind = "periodic"

    def __init__(self, period, table, dim: int | None = None):
        period = tuple(int(p) for p in np.atleast_1d(period))
        dim = len(period) if dim is None else int(dim)
        if len(period) != dim or any(p < 1 for p in period):
            raise InvalidSpec(f"bad period {period} for dimension {dim}")
        t = np.array(table, dtype=float)
        if t.size != int(np.prod(period)):
            raise InvalidSpec(f"period table has {t.size} entries, expected {int(np.prod(period))}")
        t = t.reshape(period)
        t.setflags(write=False)
        self.period = period
        self.table = t
        self.dim = dim

    def values(self, x):
        p = as_points(x, self.dim)
        idx = tuple(np.mod(p[:, i], self.period[i]) for i in range(self.dim))
        return self.table[idx]

    @property
    def sup(self):
        return float(np.abs(self.table).max())

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.table == self.table.flat[0]))

    def shifted(self, v):
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        t = np.roll(self.table, tuple(-s for s in v), axis=tuple(range(self.dim)))
        return Periodic(self.period, t, self.dim)

    def canonical(self) -> tuple["Periodic", tuple]:
        """Minimal-rotation representative and the shift that produces it."""
        t, s = minimal_rotation(np.asarray(self.table))
        return Periodic(self.period, t, self.dim), s

    def with_period(self, period) -> "Periodic":
        """Same function re-tabulated on a multiple of the period."""
        period = tuple(int(p) for p in np.atleast_1d(period))
        if any(q % p for q, p in zip(period, self.period)):
            raise InvalidSpec(f"{period} is not a multiple of {self.period}")
        grid = np.stack(np.meshgrid(*[np.arange(q) for q in period], indexing="ij"), -1)
        return Periodic(period, self.values(grid.reshape(-1, self.dim)).reshape(period), self.dim)

    def _key(self):
        return (self.period, tuple(self.table.ravel().tolist()), self.dim)

    def to_dict(self):
        return {"kind": self.kind, "period": list(self.period),
                "table": self.table.ravel().tolist()}


class DomainWall(Coefficient):
    """1D function equal to ``left`` for ``y < wall`` and ``right`` for ``y >= wall``.

    Arises as the localization of a warped periodic function at a point
    where the warp slips; ``left`` and ``right`` are periodic.
    """

    kind = "domain_wall"

    def __init__(self, left: Periodic, right: Periodic, wall: int = 0):
        if left.dim != 1 or right.dim != 1:
            raise InvalidSpec("domain walls are one-dimensional")
        self.left, self.right, self.wall, self.dim = left, right, int(wall), 1

    def values(self, x):
        p = as_points(x, 1)[:, 0]
        return np.where(p < self.wall, self.left.values(p), self.right.values(p))

    @property
    def sup(self):
        return max(self.left.sup, self.right.sup)

    def shifted(self, v):
        (s,) = as_vector(v, 1)
        if s == 0:
            return self
        return DomainWall(self.left.shifted(s), self.right.shifted(s), self.wall - s)

    def centered(self) -> "DomainWall":
        return self.shifted(self.wall)

    def _key(self):
        return (self.left._key(), self.right._key(), self.wall)

    def to_dict(self):
        return {"kind": self.kind, "left": self.left.to_dict(), "right": self.right.to_dict(),
                "wall": self.wall}


# ---------------------------------------------------------------------------
# sparse bumps

def _square_centers(upto, **_):
    n = np.arange(1, int(math.isqrt(max(int(upto), 1))) + 2, dtype=np.int64)
    c = n * n
    return c[c <= upto]


def _pow2_centers(upto, **_):
    c = [2**k for k in range(1, max(int(upto), 2).bit_length() + 1)]
    return np.array([x for x in c if x <= upto], dtype=np.int64)


def _table_centers(upto, table=(), **_):
    c = [int(t) for t in table]
    if len(c) < 2 or any(b <= a for a, b in zip(c, c[1:])):
        raise InvalidSpec("sparse center table needs at least two strictly increasing entries")
    # continue with strictly growing gaps
    gap = c[-1] - c[-2]
    while c[-1] < upto:
        gap += 1
        c.append(c[-1] + gap)
    return np.array([x for x in c if x <= upto], dtype=np.int64)


#: schedule id -> generator of all centers <= upto
SCHEDULES: dict[str, Callable] = {
    "square": _square_centers,
    "pow2": _pow2_centers,
    "table": _table_centers,
}


def _profile_items(profile) -> tuple:
    return tuple(sorted((int(k), float(v)) for k, v in dict(profile).items()))


class SparseBumps(Coefficient):
    """1D sum of finitely supported bumps placed at a sparse center sequence.

    The j-th center (0-based) carries bump type ``j mod len(profiles)``;
    each profile maps offsets relative to its center to values.
    """

    kind = "sparse_bumps"

    def __init__(self, schedule: str = "square", profiles=({0: -3.0},), schedule_params=None,
                 offset: int = 0, horizon: int = SPARSE_HORIZON):
        if schedule not in SCHEDULES:
            raise UnknownId(f"unknown center schedule {schedule!r}")
        if not profiles:
            raise InvalidSpec("at least one bump profile is required")
        self.schedule = schedule
        self.schedule_params = tuple(sorted((k, tuple(v) if isinstance(v, (list, tuple)) else v)
                                            for k, v in (schedule_params or {}).items()))
        self.profiles = tuple(_profile_items(p) for p in profiles)
        self.offset = int(offset)
        self.horizon = int(horizon)
        self.dim = 1
        self._support = np.array(sorted({k for p in self.profiles for k, _ in p}), dtype=np.int64)
        self._table = np.zeros((len(self.profiles), len(self._support)))
        for t, p in enumerate(self.profiles):
            for k, v in p:
                self._table[t, np.searchsorted(self._support, k)] = v
        self._cache = self.centers(max(self.horizon, 1))
        self._check_sparse()

    @property
    def ntypes(self) -> int:
        return len(self.profiles)

    @property
    def bump_radius(self) -> int:
        return int(np.abs(self._support).max()) if len(self._support) else 0

    def centers(self, upto: int) -> np.ndarray:
        return SCHEDULES[self.schedule](upto, **dict(self.schedule_params))

    def center_at(self, j) -> np.ndarray:
        """Centers with 0-based indices ``j`` (vectorised)."""
        j = np.asarray(j, dtype=np.int64)
        if self.schedule == "square":
            return (j + 1) * (j + 1)
        if self.schedule == "pow2":
            if np.any(j > 60):
                raise OverflowError("pow2 centers beyond index 60 exceed int64")
            return np.left_shift(np.int64(2), j)
        upto = max(int(self._cache[-1]), 16)
        while True:
            c = self.centers(upto)
            if len(c) > int(j.max(initial=0)):
                return c[j]
            upto *= 4

    @property
    def max_index(self) -> int | None:
        return 60 if self.schedule == "pow2" else None

    def _centers_upto(self, upto: int) -> np.ndarray:
        if len(self._cache) and upto <= self._cache[-1]:
            return self._cache
        return self.centers(upto)

    def _check_sparse(self):
        c = self._cache
        if len(c) < 4:
            raise InvalidSpec("sparse schedule yields fewer than 4 centers below the horizon")
        gaps = np.diff(c)
        tail = gaps[len(gaps) // 2:]
        if np.any(np.diff(tail) < 0) or gaps[-1] <= 2 * self.bump_radius or gaps[-1] <= gaps[len(gaps) // 2 - 1]:
            raise InvalidSpec("center gaps do not grow: schedule is not sparse up to the horizon")

    def type_centers(self, t: int, count: int, start: int = 0) -> np.ndarray:
        """First ``count`` centers of bump type ``t`` with index >= ``start``."""
        upto = max(self.horizon, 16)
        while True:
            c = self.centers(upto)
            idx = np.arange(len(c))
            sel = c[(idx % self.ntypes == t) & (idx >= start)]
            if len(sel) >= count:
                return sel[:count]
            upto *= 4

    def values(self, x):
        p = as_points(x, 1)[:, 0] + self.offset
        out = np.zeros(p.shape[0])
        if p.size == 0 or len(self._support) == 0:
            return out
        c = self._centers_upto(int(p.max()) + self.bump_radius + 1)
        if len(c) == 0:
            return out
        for j, s in enumerate(self._support):
            q = p - s
            i = np.searchsorted(c, q)
            ic = np.clip(i, 0, len(c) - 1)
            hit = c[ic] == q
            out[hit] += self._table[ic[hit] % self.ntypes, j]
        return out

    @property
    def sup(self):
        # overlapping early bumps can add up, so bound by the sum over types
        return float(np.abs(self._table).sum(axis=0).max()) if self._table.size else 0.0

    def bump(self, t: int) -> Decaying:
        """Bump type ``t`` centred at the origin, as a decaying coefficient."""
        return Decaying(0.0, {k: v for k, v in self.profiles[t]})

    def shifted(self, v):
        (s,) = as_vector(v, 1)
        if s == 0:
            return self
        return SparseBumps(self.schedule, [dict(p) for p in self.profiles],
                           {k: list(v) if isinstance(v, tuple) else v for k, v in self.schedule_params},
                           self.offset + s, self.horizon)

    def _key(self):
        return (self.schedule, self.schedule_params, self.profiles, self.offset)

    def to_dict(self):
        return {"kind": self.kind, "schedule": self.schedule,
                "schedule_params": {k: list(v) if isinstance(v, tuple) else v
                                    for k, v in self.schedule_params},
                "profiles": [[[k, v] for k, v in p] for p in self.profiles],
                "offset": self.offset}


# ---------------------------------------------------------------------------
# warped periodic

def _isqrt(n: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(n.astype(float))).astype(np.int64)
    r -= (r * r > n)
    r += ((r + 1) * (r + 1) <= n)
    return r


def _warp_identity(x):
    return np.zeros_like(x)


def _warp_sqrtshift(x):
    return _isqrt(1 + np.abs(x))


def _warp_sqrtshift_capped(x, cap=4):
    return np.minimum(_isqrt(1 + np.abs(x)), int(cap))


#: warp id -> displacement g, with theta(x) = x + g(x)
WARPS: dict[str, Callable] = {
    "identity": _warp_identity,
    "sqrtshift": _warp_sqrtshift,
    "sqrtshift_capped": _warp_sqrtshift_capped,
}

def _sqrt_slips(sign, k, cap=None):
    # slips of floor(sqrt(1 + |x|)): at k^2 - 1 (jump +1) and 2 - k^2 (jump -1), k >= 2
    m = np.asarray(k, dtype=np.int64) + 2
    if sign > 0:
        return m * m - 1, np.ones_like(m)
    return 2 - m * m, -np.ones_like(m)


#: warp id -> (slip generator(sign, k, **params) -> (sites, jumps), count(**params) or None)
WARP_SLIPS: dict[str, tuple[Callable, Callable]] = {
    "identity": (lambda sign, k, **p: (np.zeros(0, np.int64), np.zeros(0, np.int64)),
                 lambda **p: 0),
    "sqrtshift": (_sqrt_slips, lambda **p: None),
    "sqrtshift_capped": (_sqrt_slips, lambda cap=4: max(int(cap) - 1, 0)),
}

WARP_FORMULAS = {
    "identity": "x",
    "sqrtshift": "x + floor(sqrt(1 + |x|))",
    "sqrtshift_capped": "x + min(floor(sqrt(1 + |x|)), cap)",
}


class Warp:
    """Integer warp ``theta(x) = x + g(x)`` on Z from the :data:`WARPS` registry."""

    def __init__(self, name: str = "identity", params=None):
        if name not in WARPS:
            raise UnknownId(f"unknown warp {name!r}")
        self.name = name
        self.params = tuple(sorted((params or {}).items()))

    def displacement(self, x) -> np.ndarray:
        return WARPS[self.name](np.asarray(x, dtype=np.int64), **dict(self.params))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return x + self.displacement(x)

    def slips(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Sites ``s`` in ``(lo, hi]`` with ``theta(s) - theta(s-1) != 1`` and the jumps."""
        x = np.arange(lo, hi + 1, dtype=np.int64)
        g = self.displacement(x)
        jump = np.diff(g)
        k = np.flatnonzero(jump)
        return x[1:][k], jump[k]

    @property
    def slip_count(self) -> int | None:
        """Number of slips on each side (None when infinite)."""
        return WARP_SLIPS[self.name][1](**dict(self.params))

    def slip_at(self, sign: int, k) -> tuple[np.ndarray, np.ndarray]:
        """Slip sites (0-based index ``k``, ordered away from 0) on one side and their jumps."""
        k = np.asarray(k, dtype=np.int64)
        n = self.slip_count
        if n is not None and np.any(k >= n):
            raise IndexError("slip index beyond the last slip")
        return WARP_SLIPS[self.name][0](sign, k, **dict(self.params))

    def defect(self, a_max: int, x: np.ndarray) -> np.ndarray:
        """``max_{|a| <= a_max} |theta(a + x) - a - theta(x)|`` at each ``x``."""
        x = np.asarray(x, dtype=np.int64)
        out = np.zeros(x.shape, dtype=np.int64)
        tx = self(x)
        for a in range(-a_max, a_max + 1):
            out = np.maximum(out, np.abs(self(x + a) - a - tx))
        return out

    def _key(self):
        return (self.name, self.params)

    def __eq__(self, other):
        return isinstance(other, Warp) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Warp({self.name!r}, {dict(self.params)})"


class WarpedPeriodic(Coefficient):
    """1D ``table[theta(x + offset) mod p]`` for a registered warp ``theta``."""

    kind = "warped_periodic"

    def __init__(self, table, warp: str | Warp = "identity", warp_params=None, offset: int = 0):
        t = np.array(table, dtype=float).ravel()
        if t.size == 0:
            raise InvalidSpec("empty period table")
        t.setflags(write=False)
        self.table = t
        self.warp = warp if isinstance(warp, Warp) else Warp(warp, warp_params)
        self.offset = int(offset)
        self.dim = 1

    @property
    def period(self) -> int:
        return self.table.size

    @property
    def base(self) -> Periodic:
        return Periodic((self.period,), self.table)

    def values(self, x):
        p = as_points(x, 1)[:, 0] + self.offset
        return self.table[np.mod(self.warp(p), self.period)]

    def slip_pattern(self, sign: int, k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(site, a, b)`` of slips ``k`` in the coordinates of this function.

        Left of the site the function reads ``table[(a + y) mod p]`` and from
        the site on ``table[(b + y) mod p]``, with ``y`` relative to the site.
        """
        s, _ = self.warp.slip_at(sign, k)
        a = np.mod(self.warp(s - 1) + 1, self.period)
        b = np.mod(self.warp(s), self.period)
        return s - self.offset, a, b

    @property
    def sup(self):
        return float(np.abs(self.table).max())

    def shifted(self, v):
        (s,) = as_vector(v, 1)
        if s == 0:
            return self
        return WarpedPeriodic(self.table, self.warp, offset=self.offset + s)

    def _key(self):
        return (tuple(self.table.tolist()), self.warp._key(), self.offset)

    def to_dict(self):
        return {"kind": self.kind, "table": self.table.tolist(), "warp": self.warp.name,
                "warp_params": dict(self.warp.params), "offset": self.offset}


# ---------------------------------------------------------------------------
# tabulated and composites

class Tabulated(Coefficient):
    """Values on a box ``[lo, hi]`` plus an extension rule outside it.

    ``extension`` is ``"zero"``, ``"edge"`` (nearest box value), ``"periodic"``
    (wrap around the box) or ``"function"`` (call ``fn`` on the points).
    Limits of tabulated inputs can only be detected numerically.
    """

    kind = "tabulated"

    def __init__(self, lo, values, extension: str = "zero", fn: Callable | None = None,
                 sup_bound: float | None = None):
        v = np.array(values, dtype=float)
        self.dim = v.ndim
        self.lo = as_vector(lo, self.dim)
        if extension not in ("zero", "edge", "periodic", "function"):
            raise UnknownId(f"unknown extension rule {extension!r}")
        if extension == "function" and fn is None:
            raise InvalidSpec("extension 'function' needs fn")
        v.setflags(write=False)
        self.table = v
        self.extension = extension
        self.fn = fn
        self._sup = sup_bound

    def values(self, x):
        p = as_points(x, self.dim) - np.asarray(self.lo)
        shape = np.array(self.table.shape)
        inside = np.all((p >= 0) & (p < shape), axis=1)
        out = np.zeros(p.shape[0])
        q = p[inside]
        out[inside] = self.table[tuple(q.T)]
        rest = ~inside
        if not rest.any():
            return out
        if self.extension == "edge":
            q = np.clip(p[rest], 0, shape - 1)
            out[rest] = self.table[tuple(q.T)]
        elif self.extension == "periodic":
            q = np.mod(p[rest], shape)
            out[rest] = self.table[tuple(q.T)]
        elif self.extension == "function":
            pts = p[rest] + np.asarray(self.lo)
            out[rest] = np.asarray(self.fn(pts[:, 0] if self.dim == 1 else pts), dtype=float)
        return out

    @property
    def sup(self):
        if self._sup is not None:
            return float(self._sup)
        if self.extension == "function":
            raise InvalidSpec("a tabulated function with a black-box extension needs sup_bound")
        return float(np.abs(self.table).max()) if self.table.size else 0.0

    def _key(self):
        return (self.lo, tuple(self.table.ravel().tolist()), self.table.shape, self.extension,
                id(self.fn) if self.fn else None)

    def to_dict(self):
        return {"kind": self.kind, "lo": list(self.lo), "shape": list(self.table.shape),
                "values": self.table.ravel().tolist(), "extension": self.extension}


class AxisFunction(Coefficient):
    """2D function ``x -> inner(x[axis])`` of a single coordinate."""

    kind = "axis_function"

    def __init__(self, inner: Coefficient, axis: int, dim: int = 2):
        if inner.dim != 1:
            raise InvalidSpec("inner function must be one-dimensional")
        if not 0 <= axis < dim:
            raise InvalidSpec(f"axis {axis} out of range for dimension {dim}")
        self.inner, self.axis, self.dim = inner, int(axis), int(dim)

    def values(self, x):
        return self.inner.values(as_points(x, self.dim)[:, self.axis])

    @property
    def sup(self):
        return self.inner.sup

    def shifted(self, v):
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        return AxisFunction(self.inner.shifted(v[self.axis]), self.axis, self.dim)

    def _key(self):
        return (self.inner._key(), type(self.inner).__name__, self.axis, self.dim)

    def to_dict(self):
        return {"kind": self.kind, "axis": self.axis, "inner": self.inner.to_dict()}


class Composite(Coefficient):
    """Lazy combination of coefficients evaluated pointwise.

    ``op`` is ``"sum"``, ``"product"``, ``"scale"`` (``factor * parts[0]``) or
    ``"shift"`` (``y -> parts[0](y + shift)``).
    """

    kind = "composite"

    def __init__(self, op: str, parts: Sequence[Coefficient], shift=None, factor: float = 1.0):
        if op not in ("sum", "product", "scale", "shift"):
            raise InvalidSpec(f"unknown composite op {op!r}")
        parts = tuple(parts)
        if not parts:
            raise InvalidSpec("composite needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise InvalidSpec("composite parts have mixed dimensions")
        self.dim = dims.pop()
        self.op, self.parts, self.factor = op, parts, float(factor)
        self.shift = as_vector(shift, self.dim) if shift is not None else (0,) * self.dim

    def values(self, x):
        p = as_points(x, self.dim)
        if self.op == "sum":
            return np.sum([c.values(p) for c in self.parts], axis=0)
        if self.op == "product":
            return np.prod([c.values(p) for c in self.parts], axis=0)
        if self.op == "scale":
            return self.factor * self.parts[0].values(p)
        return self.parts[0].values(p + np.asarray(self.shift))

    @property
    def sup(self):
        if self.op == "sum":
            return float(sum(c.sup for c in self.parts))
        if self.op == "product":
            return float(np.prod([c.sup for c in self.parts]))
        if self.op == "scale":
            return abs(self.factor) * self.parts[0].sup
        return self.parts[0].sup

    def shifted(self, v):
        v = as_vector(v, self.dim)
        if not any(v):
            return self
        if self.op == "shift":
            s = tuple(a + b for a, b in zip(self.shift, v))
            return self.parts[0] if not any(s) else Composite("shift", self.parts, shift=s)
        return Composite(self.op, [c.shifted(v) for c in self.parts], factor=self.factor)

    def _key(self):
        return (self.op, tuple((type(c).__name__, c._key()) for c in self.parts),
                self.shift, self.factor)

    def to_dict(self):
        d = {"kind": self.kind, "op": self.op, "parts": [c.to_dict() for c in self.parts]}
        if self.op == "shift":
            d["shift"] = list(self.shift)
        if self.op == "scale":
            d["factor"] = self.factor
        return d


# ---------------------------------------------------------------------------
# algebra helpers with constant folding

def add(*parts: Coefficient) -> Coefficient:
    parts = [p for p in parts if not (isinstance(p, Constant) and p.value == 0.0)] or [parts[0]]
    if all(isinstance(p, Constant) for p in parts):
        return Constant(sum(p.value for p in parts), parts[0].dim)
    if len(parts) == 1:
        return parts[0]
    return Composite("sum", parts)


def mul(*parts: Coefficient) -> Coefficient:
    dim = parts[0].dim
    if any(isinstance(p, Constant) and p.value == 0.0 for p in parts):
        return Constant(0.0, dim)
    const = math.prod(p.value for p in parts if isinstance(p, Constant))
    rest = [p for p in parts if not isinstance(p, Constant)]
    if not rest:
        return Constant(const, dim)
    core = rest[0] if len(rest) == 1 else Composite("product", rest)
    return scale(core, const)


def scale(c: Coefficient, factor: float) -> Coefficient:
    factor = float(factor)
    if factor == 1.0:
        return c
    if isinstance(c, Constant):
        return Constant(factor * c.value, c.dim)
    if factor == 0.0:
        return Constant(0.0, c.dim)
    return Composite("scale", (c,), factor=factor)


def is_zero(c: Coefficient) -> bool:
    return isinstance(c, Constant) and c.value == 0.0
