"""Limit operators along explicit directions to infinity and the assembled essential spectrum.

A :class:`Direction` is a deterministic sequence of lattice points ``x_n``
escaping to infinity. The limit operator along it is the operator whose
coefficients are ``y -> lim phi_a(x_n + y)``. Each coefficient class knows
a family of directions whose limit operators exhaust all localizations at
infinity up to translation, and the essential spectrum is the closed union
of their spectra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import band as bd
from . import coefficients as cf
from . import limit_solvers as ls
from .coefficients import (AxisFunction, Coefficient, Composite, Constant, Decaying, DomainWall,
                           Periodic, SlowlyOscillating, SparseBumps, Tabulated, WarpedPeriodic)
from .errors import ClassUnsupported, NonHermitianOperator, NotConverged
from .spectral_sets import SpectralSet, closure_union, one_sided_hausdorff

#: Probe indices 2^6 ... 2^24 used by convergence certificates (capped by COORD_LIMIT).
PROBE_EXPONENTS = (6, 24)
#: Points that may not be exceeded when probing (keeps int64 arithmetic exact).
COORD_LIMIT = 2**52
#: Consecutive indices examined at each probe scale.
PROBE_BLOCK = 12


# ---------------------------------------------------------------------------
# directions

class Direction:
    """A way to infinity: ``point_at(n)`` for ``n = 0, 1, ...`` escapes in norm.

    Parameters
    ----------
    kind : str
        One of ``plus``, ``minus``, ``axis``, ``sequence``, ``cluster``,
        ``periodic_phase``, ``sparse_center``, ``sparse_off``, ``warp_phase``,
        ``warp_slip``, ``projected``.
    dim : int
    descriptor : dict
        JSON-friendly parameters; together with ``kind`` they define equality.
    generator : callable
        Maps an int64 index array to an ``(n, dim)`` point array.
    max_index : int or None
        Largest admissible index (None for unbounded).
    source : object
        Coefficient the direction was generated for (not part of equality).
    """

    def __init__(self, kind: str, dim: int, descriptor: dict, generator: Callable,
                 max_index: int | None = None, source=None):
        self.kind = kind
        self.dim = int(dim)
        self.descriptor = dict(descriptor)
        self._gen = generator
        self.max_index = max_index
        self.source = source

    def point_at(self, idx) -> np.ndarray:
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        pts = np.asarray(self._gen(idx), dtype=np.int64).reshape(len(idx), self.dim)
        return pts

    def points(self, count: int, start: int = 0) -> np.ndarray:
        return self.point_at(np.arange(start, start + count))

    def escapes(self, count: int = 64) -> bool:
        """Norms of the first ``count`` points are strictly increasing."""
        n = count if self.max_index is None else min(count, self.max_index + 1)
        p = self.points(n).astype(float)
        r = np.sqrt(np.sum(p * p, axis=1))
        return bool(np.all(np.diff(r) > 0))

    def _key(self):
        return (self.kind, self.dim, tuple(sorted((k, _freeze(v)) for k, v in self.descriptor.items())))

    def __eq__(self, other):
        return isinstance(other, Direction) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.descriptor}

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.descriptor.items())
        return f"Direction({self.kind}{', ' + args if args else ''})"


def _freeze(v):
    if isinstance(v, (list, tuple)):
        return tuple(_freeze(t) for t in v)
    if isinstance(v, dict):
        return tuple(sorted((k, _freeze(t)) for k, t in v.items()))
    return v


def toward_plus_infinity() -> Direction:
    return Direction("plus", 1, {}, lambda n: (n + 1).reshape(-1, 1))


def toward_minus_infinity() -> Direction:
    return Direction("minus", 1, {}, lambda n: -(n + 1).reshape(-1, 1))


def axis_ray(axis: int, sign: int, dim: int = 2) -> Direction:
    """Points ``sign * (n + 1) * e_axis``; in 1D this is the +/- infinity ray."""
    if dim == 1:
        return toward_plus_infinity() if sign > 0 else toward_minus_infinity()
    e = np.zeros(dim, dtype=np.int64)
    e[axis] = sign
    return Direction("axis", dim, {"axis": int(axis), "sign": int(sign)},
                     lambda n: (n + 1)[:, None] * e[None, :])


def diagonal_ray(signs) -> Direction:
    s = np.asarray(signs, dtype=np.int64)
    return Direction("sequence", len(s), {"diagonal": [int(t) for t in s]},
                     lambda n: (n + 1)[:, None] * s[None, :])


def along_sequence(points: Callable, name: str, dim: int = 1, max_index=None) -> Direction:
    """Direction from a user generator of escaping points."""
    return Direction("sequence", dim, {"name": name}, points, max_index)


def axis_rays(dim: int) -> list[Direction]:
    return [axis_ray(a, s, dim) for a in range(dim) for s in (1, -1)]


def periodic_phase(residue, period, axis: int, sign: int) -> Direction:
    """Points ``residue + sign (n + 1) period[axis] e_axis``, all congruent to ``residue``."""
    r = np.asarray(residue, dtype=np.int64)
    p = np.asarray(period, dtype=np.int64)
    dim = len(p)
    e = np.zeros(dim, dtype=np.int64)
    e[axis] = sign * p[axis]
    return Direction("periodic_phase", dim,
                     {"residue": r.tolist(), "period": p.tolist(), "axis": int(axis), "sign": int(sign)},
                     lambda n: r[None, :] + (n + 1)[:, None] * e[None, :])


def cluster_direction(fn: SlowlyOscillating, value: float) -> Direction:
    """Sequence along the first axis on which ``fn`` tends to ``value``."""
    _, power, trig = cf.OSCILLATORS[fn.expr]
    t = (value - fn.mean) / fn.amplitude if fn.amplitude else 0.0
    t = min(1.0, max(-1.0, t))
    base = math.asin(t) if trig == "sin" else math.acos(t)
    off = np.asarray(fn.offset, dtype=np.int64)
    dim = fn.dim

    def gen(n):
        r = np.round((base + 2.0 * np.pi * (n + 1).astype(float)) ** power).astype(np.int64)
        pts = np.zeros((len(n), dim), dtype=np.int64)
        pts[:, 0] = r
        return pts - off[None, :]

    max_index = int((COORD_LIMIT ** (1.0 / power)) / (2 * np.pi)) - 2
    return Direction("cluster", dim, {"expr": fn.expr, "value": float(value),
                                      "offset": list(fn.offset)}, gen, max_index, fn)


def sparse_center_class(fn: SparseBumps, t: int) -> Direction:
    """Centers of bump type ``t`` (in the coordinates of ``fn``)."""
    T = fn.ntypes

    def gen(n):
        return (fn.center_at(t + T * n) - fn.offset).reshape(-1, 1)

    mi = None if fn.max_index is None else (fn.max_index - t) // T
    return Direction("sparse_center", 1, {"type": int(t), "schedule": fn.schedule,
                                          "offset": fn.offset}, gen, mi, fn)


def sparse_off_center(fn: SparseBumps) -> Direction:
    """Midpoints between consecutive centers: the bump-free localization."""

    def gen(n):
        j = n + 1
        return ((fn.center_at(j) + fn.center_at(j + 1)) // 2 - fn.offset).reshape(-1, 1)

    mi = None if fn.max_index is None else fn.max_index - 2
    return Direction("sparse_off", 1, {"schedule": fn.schedule, "offset": fn.offset}, gen, mi, fn)


def warp_phase(fn: WarpedPeriodic, residue: int, sign: int) -> Direction:
    """Slip-free stretches on one side where ``theta(x) = residue (mod p)``."""
    p = fn.period
    w = fn.warp
    cnt = w.slip_count

    def gen(n):
        if cnt is None:
            # midpoints of consecutive slips (gaps grow, so the window fits)
            k = n + 4 * p
            s0, _ = w.slip_at(sign, k)
            s1, _ = w.slip_at(sign, k + 1)
            u = (s0 + s1) // 2
        else:
            last = w.slip_at(sign, np.array([cnt - 1]))[0][0] if cnt else 0
            u = last + sign * (n + 1) * 16 * p + sign * 16 * p
        u = u + np.mod(residue - w(u), p)
        return (u - fn.offset).reshape(-1, 1)

    return Direction("warp_phase", 1, {"residue": int(residue), "sign": int(sign),
                                       "warp": w.name, "offset": fn.offset}, gen, None, fn)


def recurring_slip_patterns(fn: WarpedPeriodic, sign: int, sample: int = 4096) -> list[tuple]:
    """Slip patterns ``(a, b)`` seen among slips ``sample .. 2 sample`` on one side."""
    if fn.warp.slip_count is not None:
        return []
    _, a, b = fn.slip_pattern(sign, np.arange(sample, 2 * sample))
    return sorted({(int(x), int(y)) for x, y in zip(a, b)})


def warp_slip(fn: WarpedPeriodic, a: int, b: int, sign: int) -> Direction:
    """Slip sites on one side whose phase pattern is ``(a, b)``."""
    cache: dict = {}

    def matches(count):
        hi = max(64, cache.get("hi", 64))
        while True:
            s, pa, pb = fn.slip_pattern(sign, np.arange(hi))
            sel = s[(pa == a) & (pb == b)]
            if len(sel) >= count:
                cache["hi"] = hi
                return sel
            hi *= 2

    def gen(n):
        sel = matches(int(n.max()) + 1)
        return sel[n].reshape(-1, 1)

    return Direction("warp_slip", 1, {"a": int(a), "b": int(b), "sign": int(sign),
                                      "warp": fn.warp.name, "offset": fn.offset}, gen, 2**16, fn)


def projected(direction: Direction, axis: int) -> Direction:
    """1D direction formed by one coordinate of a 2D direction."""
    return Direction("projected", 1, {"of": direction.to_dict(), "axis": int(axis)},
                     lambda n: direction.point_at(n)[:, axis].reshape(-1, 1), direction.max_index)


# ---------------------------------------------------------------------------
# limits of coefficients

@dataclass(frozen=True)
class Certificate:
    """Evidence that ``phi(x_n + y)`` approaches the limit on ``|y| <= window``."""

    window: int
    radius: float
    residual: float
    index: int

    def to_dict(self):
        return {"window": self.window, "radius": self.radius, "residual": self.residual,
                "index": self.index}


def _window(dim: int, w: int) -> np.ndarray:
    return bd.box_points((-w,) * dim, (w,) * dim)


def _probe_indices(direction: Direction):
    lo, hi = PROBE_EXPONENTS
    for k in range(lo, hi + 1):
        n = 2**k - 1
        if direction.max_index is not None and n > direction.max_index:
            n = direction.max_index
            yield n
            return
        yield n


def probe(fn: Coefficient, direction: Direction, window: int, tol: float,
          limit: Coefficient | None = None) -> tuple[Certificate, np.ndarray | None]:
    """Convergence certificate at doubling probe indices.

    Each probe looks at a block of ``PROBE_BLOCK`` consecutive indices
    starting at ``2^k - 1``, so that values alternating along the
    direction (a periodic function on a plain ray) are seen. With a known
    ``limit`` the residual is ``sup |phi(x_n + y) - limit(y)|`` over the
    block; otherwise it is the spread within the block together with the
    change from the previous probe (Cauchy test). Returns the certificate
    and, for the Cauchy test, the converged window values.

    Raises
    ------
    NotConverged
        If the residual stays above ``tol`` up to index 2^24 or the coordinate limit.
    """
    ys = _window(fn.dim, window)
    ref = limit.values(ys) if limit is not None else None
    prev, res, last = None, np.inf, None
    for n in _probe_indices(direction):
        block = np.arange(n, n + PROBE_BLOCK)
        if direction.max_index is not None:
            block = block[block <= direction.max_index]
        xs = direction.point_at(block)
        if np.max(np.abs(xs)) > COORD_LIMIT:
            break
        vals = fn.values((xs[:, None, :] + ys[None, :, :]).reshape(-1, fn.dim)).reshape(len(block), -1)
        if ref is not None:
            res = float(np.max(np.abs(vals - ref)))
        else:
            res = float(np.max(np.abs(vals - vals[0])))
            if prev is not None:
                res = max(res, float(np.max(np.abs(vals[0] - prev))))
            else:
                res = np.inf
        prev, last = vals[0], (n, float(np.linalg.norm(xs[0])))
        if res < tol:
            return Certificate(window, last[1], res, last[0]), vals[0]
    raise NotConverged(direction.to_dict(), res)


def _constant_residue(direction: Direction, period) -> tuple | None:
    p = np.asarray(period, dtype=np.int64)
    n = np.concatenate([np.arange(64), 2 ** np.arange(6, 21) - 1])
    if direction.max_index is not None:
        n = n[n <= direction.max_index]
    r = np.mod(direction.point_at(n), p[None, :])
    if np.all(r == r[0]):
        return tuple(int(t) for t in r[0])
    return None


def _numeric_limit(fn: Coefficient, direction: Direction, window: int, tol: float) -> Coefficient:
    _, vals = probe(fn, direction, window, tol)
    if np.max(vals) - np.min(vals) < tol:
        return Constant(float(np.mean(vals)), fn.dim)
    # only the window is known; outside it the limit is reported as 0
    shape = (2 * window + 1,) * fn.dim
    return Tabulated((-window,) * fn.dim, vals.reshape(shape), extension="zero")


def _same_source(direction: Direction, fn: Coefficient) -> bool:
    return direction.source is not None and direction.source == fn


def _same_oscillator(direction: Direction, fn: SlowlyOscillating) -> bool:
    # a finite offset does not move the cluster values of a slowly oscillating function
    src = direction.source
    return (isinstance(src, SlowlyOscillating) and src.expr == fn.expr and src.dim == fn.dim
            and src.amplitude == fn.amplitude and src.mean == fn.mean)


def limit_coefficient(fn: Coefficient, direction: Direction, window: int = 4,
                      tol: float = 1e-6) -> Coefficient:
    """``y -> lim_n phi(x_n + y)`` along ``direction``.

    Structured variants are handled symbolically; anything else falls back
    to numerical Cauchy detection on ``|y| <= window``.
    """
    if window < 1 or not tol > 0:
        raise ValueError("window must be >= 1 and tol > 0")
    if fn.dim != direction.dim:
        raise ValueError("direction and coefficient dimensions differ")
    if isinstance(fn, Constant):
        return fn
    if isinstance(fn, Decaying):
        return Constant(fn.limit, fn.dim)
    if isinstance(fn, Periodic):
        r = _constant_residue(direction, fn.period)
        if r is None:
            return _numeric_limit(fn, direction, window, tol)
        return fn.shifted(r)
    if isinstance(fn, SlowlyOscillating):
        if direction.kind == "cluster" and _same_oscillator(direction, fn):
            return Constant(direction.descriptor["value"], fn.dim)
        return _numeric_limit(fn, direction, window, tol)
    if isinstance(fn, SparseBumps):
        if _same_source(direction, fn):
            if direction.kind == "sparse_center":
                return fn.bump(direction.descriptor["type"])
            if direction.kind == "sparse_off":
                return Constant(0.0)
        return _numeric_limit(fn, direction, window, tol)
    if isinstance(fn, WarpedPeriodic):
        src = direction.source
        if (isinstance(src, WarpedPeriodic) and src.warp == fn.warp
                and np.array_equal(src.table, fn.table)):
            # a finite offset only relabels the phase seen along the direction
            d, delta = direction.descriptor, fn.offset - src.offset
            if direction.kind == "warp_phase":
                return fn.base.shifted(d["residue"] + delta)
            if direction.kind == "warp_slip":
                return DomainWall(fn.base.shifted(d["a"] + delta), fn.base.shifted(d["b"] + delta), -delta)
        if fn.warp.slip_count is not None:
            r = _constant_residue(direction, (fn.period,))
            if r is not None:
                # beyond the last slip theta is a translation
                x = int(direction.point_at([2**12])[0, 0]) + fn.offset
                return fn.base.shifted(int(fn.warp([x])[0]))
        return _numeric_limit(fn, direction, window, tol)
    if isinstance(fn, DomainWall):
        x = direction.point_at([64])[0, 0]
        side = fn.right if x >= fn.wall else fn.left
        r = _constant_residue(direction, side.period)
        if r is not None:
            return side.shifted(r)
        return _numeric_limit(fn, direction, window, tol)
    if isinstance(fn, AxisFunction):
        sub = projected(direction, fn.axis)
        n = np.concatenate([np.arange(64), 2 ** np.arange(6, 21) - 1])
        if direction.max_index is not None:
            n = n[n <= direction.max_index]
        coords = sub.point_at(n)[:, 0]
        if np.all(coords == coords[0]):
            return AxisFunction(fn.inner.shifted(int(coords[0])), fn.axis, fn.dim)
        inner = limit_coefficient(fn.inner, sub, window, tol)
        if isinstance(inner, Constant):
            return Constant(inner.value, fn.dim)
        return AxisFunction(inner, fn.axis, fn.dim)
    if isinstance(fn, Composite):
        if fn.op == "shift":
            return limit_coefficient(fn.parts[0], direction, window, tol).shifted(fn.shift)
        lims = [limit_coefficient(p, direction, window, tol) for p in fn.parts]
        if fn.op == "sum":
            return normalize(cf.add(*lims))
        if fn.op == "product":
            return normalize(cf.mul(*lims))
        return normalize(cf.scale(lims[0], fn.factor))
    if isinstance(fn, Tabulated):
        return _numeric_limit(fn, direction, window, tol)
    raise ClassUnsupported(f"no limit rule for {type(fn).__name__}")


def _leaves(c: Coefficient):
    if isinstance(c, Composite):
        for p in c.parts:
            yield from _leaves(p)
    else:
        yield c


def normalize(c: Coefficient) -> Coefficient:
    """Collapse composites of periodic or finitely supported pieces to one variant."""
    if not isinstance(c, Composite):
        return c
    leaves = list(_leaves(c))
    if all(isinstance(t, (Constant, Periodic)) for t in leaves):
        periods = [t.period for t in leaves if isinstance(t, Periodic)]
        if not periods:
            return Constant(float(c.values(np.zeros((1, c.dim), int))[0]), c.dim)
        p = tuple(math.lcm(*[q[i] for q in periods]) for i in range(c.dim))
        cells = bd.box_points((0,) * c.dim, tuple(t - 1 for t in p))
        return Periodic(p, c.values(cells).reshape(p), c.dim)
    if all(isinstance(t, Constant) or (isinstance(t, Decaying) and t.form is None) for t in leaves):
        prof = ls.decay_profile(c)
        lim, lo, hi = prof
        if lo is None:
            return Constant(lim, c.dim)
        pts = bd.box_points(lo, hi)
        v = c.values(pts) - lim
        keep = v != 0.0
        return Decaying(lim, {tuple(p): x for p, x in zip(pts[keep].tolist(), v[keep])}, dim=c.dim)
    return c


# ---------------------------------------------------------------------------
# limit operators

@dataclass
class LimitOperator:
    """Limit operator along a direction with its class tag and certificate."""

    op: bd.BandOperator
    cls: str
    direction: Direction
    certificate: Certificate
    note: str = ""

    def to_dict(self) -> dict:
        return {"direction": self.direction.to_dict(), "class": self.cls,
                "certificate": self.certificate.to_dict(), "note": self.note}


@dataclass(frozen=True)
class LocalizationConfig:
    """Tolerances for limit extraction and limit spectra."""

    window: int = 4
    tol: float = 1e-6
    edge_tol: float = ls.EDGE_TOL
    clusters: int = 21
    k_samples: int = 128
    closure_tol: float = 1e-12

    def __post_init__(self):
        if self.window < 1 or not (self.tol > 0 and self.edge_tol > 0 and self.closure_tol > 0):
            raise ValueError("window must be >= 1 and tolerances positive")
        if self.clusters < 1 or self.k_samples < 4:
            raise ValueError("clusters >= 1 and k_samples >= 4 required")


def limit_operator(op: bd.BandOperator, direction: Direction,
                   cfg: LocalizationConfig | None = None) -> LimitOperator:
    """Limit of ``U_x T U_x^*`` along ``direction``, coefficient by coefficient.

    Non-hermitian operators are accepted (the limit map is an algebra
    morphism, which tests exercise on products); their class tag is
    ``"Unclassified"`` when no solver applies.
    """
    cfg = cfg or LocalizationConfig()
    coeffs, worst = {}, None
    for a, c in op.coeffs.items():
        lim = normalize(limit_coefficient(c, direction, cfg.window, cfg.tol))
        coeffs[a] = lim
        cert, _ = probe(c, direction, cfg.window, cfg.tol, lim) if not isinstance(lim, Tabulated) \
            else probe(c, direction, cfg.window, cfg.tol)
        if worst is None or cert.residual > worst.residual:
            worst = cert
    lop = bd.BandOperator(coeffs, op.dim, op.hermitian or None)
    if worst is None:
        worst = Certificate(cfg.window, 0.0, 0.0, 0)
    try:
        cls = ls.classify(lop) if lop.hermitian else "Unclassified"
        note = ""
    except ClassUnsupported as exc:
        cls, note = "Unclassified", str(exc)
    return LimitOperator(lop, cls, direction, worst, note)


# ---------------------------------------------------------------------------
# direction families

NONTRIVIAL = ("periodic", "slowly_oscillating", "sparse_bumps", "warped_periodic", "domain_wall")


def _collect(c: Coefficient, out: list):
    if isinstance(c, Composite):
        for p in c.parts:
            _collect(p, out)
    else:
        out.append(c)


def sufficient_family(op: bd.BandOperator, cfg: LocalizationConfig | None = None) -> list[Direction]:
    """Directions whose limit operators cover every localization up to translation.

    Raises
    ------
    ClassUnsupported
        For tabulated coefficients or mixtures of two nontrivial classes.
    """
    cfg = cfg or LocalizationConfig()
    leaves: list = []
    for c in op.coeffs.values():
        _collect(c, leaves)
    kinds = set()
    for c in leaves:
        if isinstance(c, Tabulated):
            raise ClassUnsupported("tabulated coefficients have no computable direction family")
        if isinstance(c, AxisFunction):
            if not isinstance(c.inner, (Constant, Decaying)):
                raise ClassUnsupported("axis functions must be constant or decaying")
            kinds.add("axis")
        elif c.kind in NONTRIVIAL:
            kinds.add(c.kind)
    if len(kinds - {"axis"}) > 1 or ("axis" in kinds and len(kinds) > 1):
        raise ClassUnsupported(f"mixture of classes {sorted(kinds)} is not supported")
    dirs: list[Direction] = []
    kind = next(iter(kinds), None)
    if kind is None:
        dirs = axis_rays(op.dim)
    elif kind == "axis":
        dirs = axis_rays(2) + [diagonal_ray(s) for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    elif kind == "periodic":
        periods = [c.period for c in leaves if isinstance(c, Periodic)]
        p = tuple(math.lcm(*[q[i] for q in periods]) for i in range(op.dim))
        for axis in range(op.dim):
            for sign in (1, -1):
                for r in bd.box_points((0,) * op.dim, tuple(t - 1 for t in p)):
                    dirs.append(periodic_phase(r, p, axis, sign))
    elif kind == "slowly_oscillating":
        for c in leaves:
            if isinstance(c, SlowlyOscillating):
                lo, hi = c.asymptotic_range
                vals = np.linspace(lo, hi, cfg.clusters) if hi > lo else np.array([lo])
                dirs.extend(cluster_direction(c, float(v)) for v in vals)
    elif kind == "sparse_bumps":
        for c in leaves:
            if isinstance(c, SparseBumps):
                dirs.extend(sparse_center_class(c, t) for t in range(c.ntypes))
                dirs.append(sparse_off_center(c))
    elif kind == "warped_periodic":
        for c in leaves:
            if isinstance(c, WarpedPeriodic):
                for sign in (1, -1):
                    dirs.extend(warp_phase(c, r, sign) for r in range(c.period))
                    dirs.extend(warp_slip(c, a, b, sign) for a, b in recurring_slip_patterns(c, sign))
    elif kind == "domain_wall":
        walls = [c for c in leaves if isinstance(c, DomainWall)]
        p = (math.lcm(*[w.left.period[0] for w in walls] + [w.right.period[0] for w in walls]),)
        for sign in (1, -1):
            dirs.extend(periodic_phase((r,), p, 0, sign) for r in range(p[0]))
    out, seen = [], set()
    for d in dirs:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


# ---------------------------------------------------------------------------
# assembly

def canonical_form(lop: bd.BandOperator, cls: str) -> bd.BandOperator:
    """Translate a limit operator to a representative of its translation class."""
    if cls == ls.PERIODIC:
        lifted = ls.lift_period(lop)
        p = ls.common_period(lifted)
        best, best_s = None, None
        for s in bd.box_points((0,) * lop.dim, tuple(t - 1 for t in p)):
            t = bd.translate(lifted, s)
            key = tuple(tuple(c.table.ravel().tolist()) if isinstance(c, Periodic) else (c.value,)
                        for c in t.coeffs.values())
            if best is None or key < best:
                best, best_s = key, t
        return best_s
    if cls == ls.TWO_BODY:
        _, box = ls.split_two_body(lop)
        if box is None:
            return lop
        return bd.translate(lop, tuple((l + h) // 2 for l, h in zip(*box)))
    if cls == ls.INTERFACE:
        _, _, wall = ls.split_interface(lop)
        return bd.translate(lop, (wall,))
    return lop


def operator_key(op: bd.BandOperator) -> tuple:
    return (op.dim, tuple((a, type(c).__name__, c._key()) for a, c in op.coeffs.items()))


@dataclass
class DirectionRecord:
    direction: Direction
    cls: str
    spectrum: SpectralSet
    certificate: Certificate
    redundant_of: int | None = None
    in_union: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"direction": self.direction.to_dict(), "class": self.cls,
                "spectrum": self.spectrum.to_dict(), "certificate": self.certificate.to_dict(),
                "redundant_of": self.redundant_of, "in_union": self.in_union,
                "details": self.details}


@dataclass
class EssentialSpectrumReport:
    spectrum: SpectralSet
    records: list

    def to_dict(self) -> dict:
        return {"essential_spectrum": self.spectrum.to_dict(),
                "directions": [r.to_dict() for r in self.records]}


def essential_spectrum_report(op: bd.BandOperator,
                              cfg: LocalizationConfig | None = None) -> EssentialSpectrumReport:
    """Closed union of limit-operator spectra over :func:`sufficient_family`.

    Limit operators that are translates of one already seen share its
    spectrum and are marked redundant. For sparse-bump operators the
    off-center (free) localization is reported but left out of the union,
    since every two-body spectrum already contains the free band.
    """
    cfg = cfg or LocalizationConfig()
    if not op.hermitian:
        raise NonHermitianOperator("essential_spectrum needs a hermitian operator")
    dirs = sufficient_family(op, cfg)
    records: list[DirectionRecord] = []
    cache: dict = {}
    for i, d in enumerate(dirs):
        lo = limit_operator(op, d, cfg)
        if lo.cls == "Unclassified":
            raise ClassUnsupported(f"limit along {d!r} is outside the supported classes: {lo.note}")
        canon = canonical_form(lo.op, lo.cls)
        key = operator_key(canon)
        if key in cache:
            j, res = cache[key]
            red = j
        else:
            res = ls.analyse(canon, lo.cls, cfg.edge_tol, cfg.k_samples)
            cache[key] = (i, res)
            red = None
        details = {"points": res.points, "flagged_near_edge": res.flagged}
        records.append(DirectionRecord(d, lo.cls, res.spectrum, lo.certificate, red,
                                       d.kind != "sparse_off", details))
    spec = closure_union([r.spectrum for r in records if r.in_union], cfg.closure_tol)
    return EssentialSpectrumReport(spec, records)


def essential_spectrum(op: bd.BandOperator, cfg: LocalizationConfig | None = None) -> SpectralSet:
    """Essential spectrum as the closed union of limit-operator spectra."""
    return essential_spectrum_report(op, cfg).spectrum


def inclusion_defects(report: EssentialSpectrumReport) -> list[float]:
    """One-sided distance of each direction's spectrum to the assembled set."""
    return [one_sided_hausdorff(r.spectrum, report.spectrum) for r in report.records]
