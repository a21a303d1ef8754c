"""Spectra of limit operators, computed class by class.

``Laurent``
    Constant coefficients: the range of the symbol over the torus.
``Periodic``
    Constant/periodic coefficients: Floquet-Bloch bands.
``TwoBody``
    Constant coefficients plus a perturbation vanishing at infinity: the
    free band plus converged discrete eigenvalues of growing truncations.
``Interface``
    A periodic domain wall (different phases left and right of a site):
    Bloch bands of both sides plus converged wall-localized eigenvalues.
``Separable``
    2D tensor sums ``H1 x 1 + 1 x H2`` of 1D operators of the classes above:
    Minkowski sums of the parts.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import band as bd
from . import coefficients as cf
from .coefficients import (AxisFunction, Coefficient, Composite, Constant, Decaying,
                           DomainWall, Periodic)
from .eig import dense_sym_eigen, eigenvalues_by_index, hermitian_eigvalsh, inverse_iteration, sturm_count
from .errors import ClassUnsupported, EmptyOperand, MixedPeriods, NoConvergence, NonHermitianSymbol
from .spectral_sets import SpectralSet, from_samples, minkowski_sum, union

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
#: Band-edge zone inside which discrete eigenvalues are flagged.
EDGE_TOL = 1e-3
#: Successive truncation eigenvalues must agree to this for acceptance.
CONVERGENCE_TOL = 1e-8
#: Middle-half mass required of a discrete eigenvector.
LOCALIZATION_MASS = 0.9
MAX_HALF_WIDTH_1D = 2**17


def _edge_half_width(tol: float, dim: int) -> int:
    # a state at distance tol from a quadratic band edge decays like
    # exp(-sqrt(tol) |x|); start wide enough to resolve it (e^-8 at the walls)
    return int(math.ceil(8.0 / math.sqrt(tol))) if dim == 1 else 0
MAX_DENSE_SIZE = 4900


class SpectrumWarning(UserWarning):
    """Weakly bound or unresolved discrete eigenvalue near a band edge."""


def golden_section(f, a: float, b: float, tol: float = 1e-10, maximize: bool = False,
                   maxiter: int = 200) -> tuple[float, float]:
    """Extremum of a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    sgn = -1.0 if maximize else 1.0
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = sgn * f(c), sgn * f(d)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sgn * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sgn * f(d)
    # all candidates in the sign-flipped frame, minimized there
    cands = [(a, sgn * f(a)), (b, sgn * f(b)), (c, fc), (d, fd)]
    x, v = min(cands, key=lambda t: t[1])
    return x, sgn * v


def _local_extrema(vals: np.ndarray, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    if periodic:
        left, right = np.roll(vals, 1), np.roll(vals, -1)
    else:
        left = np.concatenate([[np.inf], vals[:-1]])
        right = np.concatenate([vals[1:], [np.inf]])
    mins = np.flatnonzero((vals <= left) & (vals <= right))
    if periodic:
        left2, right2 = left, right
    else:
        left2 = np.concatenate([[-np.inf], vals[:-1]])
        right2 = np.concatenate([vals[1:], [-np.inf]])
    maxs = np.flatnonzero((vals >= left2) & (vals >= right2))
    return mins, maxs


def _refine_extremes_1d(f, grid: np.ndarray, vals: np.ndarray, periodic: bool,
                        tol: float = 1e-10, keep: int = 4) -> tuple[float, float]:
    """Global min and max of ``f`` refined from grid values by golden section."""
    mins, maxs = _local_extrema(vals, periodic)
    h = grid[1] - grid[0]
    lo, hi = float(vals.min()), float(vals.max())
    for i in mins[np.argsort(vals[mins])][:keep]:
        _, v = golden_section(f, grid[i] - h, grid[i] + h, tol) if periodic or 0 < i < len(grid) - 1 \
            else golden_section(f, max(grid[0], grid[i] - h), min(grid[-1], grid[i] + h), tol)
        lo = min(lo, v)
    for i in maxs[np.argsort(-vals[maxs])][:keep]:
        _, v = golden_section(f, grid[i] - h, grid[i] + h, tol, maximize=True) if periodic or 0 < i < len(grid) - 1 \
            else golden_section(f, max(grid[0], grid[i] - h), min(grid[-1], grid[i] + h), tol, maximize=True)
        hi = max(hi, v)
    return lo, hi


# ---------------------------------------------------------------------------
# Laurent

@dataclass(frozen=True)
class SymbolFunction:
    """``h(k) = sum_a c_a exp(i <a, k>)`` for constant coefficients ``c_a``."""

    offsets: tuple
    coeffs: tuple
    dim: int = 1

    @classmethod
    def from_operator(cls, op: bd.BandOperator) -> "SymbolFunction":
        cs = []
        for a, c in op.coeffs.items():
            if not isinstance(c, Constant):
                raise ClassUnsupported(f"coefficient at {a} is not constant")
            cs.append((a, c.value))
        return cls(tuple(a for a, _ in cs), tuple(v for _, v in cs), op.dim)

    @property
    def hermitian(self) -> bool:
        d = dict(zip(self.offsets, self.coeffs))
        return all(d.get(tuple(-t for t in a), 0.0) == v for a, v in d.items())

    @property
    def lipschitz(self) -> float:
        return float(sum(math.sqrt(sum(t * t for t in a)) * abs(c)
                         for a, c in zip(self.offsets, self.coeffs)))

    def __call__(self, k) -> np.ndarray:
        """Real symbol at quasimomenta ``k`` of shape ``(..., dim)`` (or ``(...)`` in 1D)."""
        k = np.asarray(k, dtype=float)
        if self.dim == 1 and (k.ndim == 0 or k.shape[-1] != 1):
            k = k[..., None]
        out = np.zeros(k.shape[:-1])
        for a, c in zip(self.offsets, self.coeffs):
            out += c * np.cos(k @ np.asarray(a, dtype=float))
        return out

    def shifted(self, c: float) -> "SymbolFunction":
        d = dict(zip(self.offsets, self.coeffs))
        z = (0,) * self.dim
        d[z] = d.get(z, 0.0) + c
        return SymbolFunction(tuple(d), tuple(d.values()), self.dim)


def laurent_spectrum(sym: SymbolFunction, resolution: int = 512) -> SpectralSet:
    """Range of a real symbol over the torus."""
    if not sym.hermitian:
        raise NonHermitianSymbol("symbol is not real-valued (c_{-a} != c_a)")
    if not sym.offsets:
        return SpectralSet.point(0.0)
    z = (0,) * sym.dim
    d = dict(zip(sym.offsets, sym.coeffs))
    c0 = d.pop(z, 0.0)
    if not d:
        return SpectralSet.point(c0)
    # constant part is added exactly at the end, so shifted symbols shift exactly
    core = SymbolFunction(tuple(d), tuple(d.values()), sym.dim)
    if sym.dim == 1:
        # h(-k) = h(k), so [0, pi] suffices; the grid contains 0 and pi
        grid = np.linspace(0.0, np.pi, resolution + 1)
        vals = core(grid)
        lo, hi = _refine_extremes_1d(lambda t: float(core(t)), grid, vals, periodic=False)
        return SpectralSet.interval(lo + c0, hi + c0) if hi > lo else SpectralSet.point(lo + c0)
    n = int(resolution)
    ks = 2.0 * np.pi * np.arange(n) / n
    grid = np.stack(np.meshgrid(*([ks] * sym.dim), indexing="ij"), -1)
    vals = core(grid)
    flat = np.sort(vals.ravel())
    s = from_samples(flat, merge_gap=2.0 * core.lipschitz * (2.0 * np.pi / n))
    lo = _refine_nd(core, grid, vals, maximize=False)
    hi = _refine_nd(core, grid, vals, maximize=True)
    comps = s.components()
    comps[0] = (min(lo, comps[0][0]), comps[0][1])
    comps[-1] = (comps[-1][0], max(hi, comps[-1][1]))
    return SpectralSet([(a + c0, b + c0) for a, b in comps if b > a],
                       [a + c0 for a, b in comps if b == a])


def _refine_nd(f, grid, vals, maximize: bool, rounds: int = 6) -> float:
    idx = np.unravel_index(np.argmax(vals) if maximize else np.argmin(vals), vals.shape)
    x = grid[idx].astype(float).copy()
    best = float(vals[idx])
    h = float(grid.reshape(-1, grid.shape[-1])[1, -1] - grid.reshape(-1, grid.shape[-1])[0, -1])
    for _ in range(rounds):
        for ax in range(x.size):
            def g(t, ax=ax):
                y = x.copy()
                y[ax] = t
                return float(f(y))
            t, v = golden_section(g, x[ax] - h, x[ax] + h, 1e-11, maximize=maximize)
            if (v > best) if maximize else (v < best):
                best, x[ax] = v, t
        h *= 0.5
    return best


# ---------------------------------------------------------------------------
# Bloch

def common_period(op: bd.BandOperator, strict: bool = True) -> tuple:
    """Common period of the coefficients (all constant or periodic)."""
    periods = set()
    for a, c in op.coeffs.items():
        if isinstance(c, Periodic):
            periods.add(c.period)
        elif not isinstance(c, Constant):
            raise ClassUnsupported(f"coefficient at {a} is neither constant nor periodic")
    if not periods:
        return (1,) * op.dim
    if len(periods) > 1:
        if strict:
            raise MixedPeriods(f"coefficients have periods {sorted(periods)}")
        return tuple(math.lcm(*[p[i] for p in periods]) for i in range(op.dim))
    return periods.pop()


def lift_period(op: bd.BandOperator) -> bd.BandOperator:
    """Re-tabulate every periodic coefficient on the least common period."""
    p = common_period(op, strict=False)
    out = {}
    for a, c in op.coeffs.items():
        out[a] = c.with_period(p) if isinstance(c, Periodic) else c
    return bd.BandOperator(out, op.dim, op.hermitian)


class BlochFamily:
    """Bloch matrices ``H(k)`` of a periodic band operator (one cell, ``prod(p)`` sites)."""

    def __init__(self, op: bd.BandOperator):
        self.op = op
        self.period = common_period(op)
        self.dim = op.dim
        p = np.asarray(self.period)
        self.cells = bd.box_points((0,) * self.dim, tuple(int(t) - 1 for t in p))
        m = len(self.cells)
        self.size = m
        # list of (row, col, value, winding) contributions
        rows, cols, vals, wind = [], [], [], []
        for a, c in op.coeffs.items():
            v = c.values(self.cells)
            tgt = self.cells + np.asarray(a)
            w = np.floor_divide(tgt, p)
            t = tgt - w * p
            j = np.ravel_multi_index(tuple(t.T), tuple(p))
            rows.append(np.arange(m))
            cols.append(j)
            vals.append(v)
            wind.append(w)
        self._rows = np.concatenate(rows) if rows else np.zeros(0, int)
        self._cols = np.concatenate(cols) if cols else np.zeros(0, int)
        self._vals = np.concatenate(vals) if vals else np.zeros(0)
        self._wind = np.concatenate(wind) if wind else np.zeros((0, self.dim))

    def matrix(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        phase = np.exp(1j * (self._wind @ k))
        h = np.zeros((self.size, self.size), dtype=complex)
        np.add.at(h, (self._rows, self._cols), self._vals * phase)
        return h

    def eigenvalues(self, k) -> np.ndarray:
        h = self.matrix(k)
        if self.size == 1:
            return np.array([h[0, 0].real])
        if np.allclose(h.imag, 0.0, atol=0.0):
            return dense_sym_eigen(h.real).eigenvalues
        return hermitian_eigvalsh(h)


def bloch_spectrum(op: bd.BandOperator, k_samples: int = 128) -> SpectralSet:
    """Union of Bloch bands of a periodic operator.

    Each band's extremes over the sampled quasimomenta are refined by
    golden-section search on the band function (1D) or coordinate-wise
    golden sections (2D), so edges are accurate to well below 1e-8.
    """
    fam = BlochFamily(op)
    if fam.size == 1:
        return laurent_spectrum(SymbolFunction.from_operator(
            bd.BandOperator({a: Constant(c.values(np.zeros((1, op.dim), int))[0], op.dim)
                             for a, c in op.coeffs.items()}, op.dim, True)))
    if op.dim == 1:
        grid = np.linspace(0.0, np.pi, int(k_samples) + 1)
        ev = np.array([fam.eigenvalues(k) for k in grid])
        bands = []
        for j in range(fam.size):
            f = (lambda t, j=j: float(fam.eigenvalues(t)[j]))
            lo, hi = _refine_extremes_1d(f, grid, ev[:, j], periodic=False, tol=1e-10)
            bands.append((lo, hi))
    else:
        n = int(k_samples)
        ks = 2.0 * np.pi * np.arange(n) / n
        grid = np.stack(np.meshgrid(ks, ks, indexing="ij"), -1)
        ev = np.array([[fam.eigenvalues(grid[i, j]) for j in range(n)] for i in range(n)])
        bands = []
        for j in range(fam.size):
            f = (lambda t, j=j: float(fam.eigenvalues(t)[j]))
            vals = ev[..., j]
            bands.append((_refine_nd(f, grid, vals, False), _refine_nd(f, grid, vals, True)))
    return SpectralSet([b for b in bands if b[1] > b[0]], [b[0] for b in bands if b[1] == b[0]])


# ---------------------------------------------------------------------------
# perturbations vanishing at infinity

def decay_profile(c: Coefficient):
    """``(limit, lo, hi)``: value at infinity and a box outside which ``c == limit``.

    Returns None for coefficients that do not tend to a constant, or
    ``(value, None, None)`` for constants.
    """
    if isinstance(c, Constant):
        return c.value, None, None
    if isinstance(c, Decaying):
        box = c.support_box()
        return (c.limit, None, None) if box is None else (c.limit, *box)
    if isinstance(c, Composite):
        parts = [decay_profile(p) for p in c.parts]
        if any(p is None for p in parts):
            return None
        boxes = [(l, h) for _, l, h in parts if l is not None]
        lo = tuple(min(b[0][i] for b in boxes) for i in range(c.dim)) if boxes else None
        hi = tuple(max(b[1][i] for b in boxes) for i in range(c.dim)) if boxes else None
        if c.op == "sum":
            lim = sum(p[0] for p in parts)
        elif c.op == "product":
            lim = math.prod(p[0] for p in parts)
        elif c.op == "scale":
            lim = c.factor * parts[0][0]
        else:
            lim = parts[0][0]
            if lo is not None:
                lo = tuple(t - s for t, s in zip(lo, c.shift))
                hi = tuple(t - s for t, s in zip(hi, c.shift))
        return lim, lo, hi
    return None


def split_two_body(op: bd.BandOperator):
    """Free (constant-coefficient) part of a two-body operator and the perturbation box."""
    free, boxes = {}, []
    for a, c in op.coeffs.items():
        prof = decay_profile(c)
        if prof is None:
            raise ClassUnsupported(f"coefficient at {a} does not tend to a constant")
        free[a] = Constant(prof[0], op.dim)
        if prof[1] is not None:
            lo, hi = prof[1], prof[2]
            # the coefficient at offset a couples x and x + a
            boxes.append((tuple(min(l, l + s) for l, s in zip(lo, a)),
                          tuple(max(h, h + s) for h, s in zip(hi, a))))
    if not boxes:
        return bd.BandOperator(free, op.dim, True), None
    lo = tuple(min(b[0][i] for b in boxes) for i in range(op.dim))
    hi = tuple(max(b[1][i] for b in boxes) for i in range(op.dim))
    return bd.BandOperator(free, op.dim, True), (lo, hi)


@dataclass
class DiscreteSpectrumResult:
    """Outcome of a band-plus-discrete-eigenvalue computation."""

    spectrum: SpectralSet
    band: SpectralSet
    points: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    rejected: int = 0
    sizes: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    center: tuple = ()

    def to_dict(self) -> dict:
        return {"spectrum": self.spectrum.to_dict(), "band": self.band.to_dict(),
                "points": list(self.points), "flagged_near_edge": list(self.flagged),
                "unresolved": list(self.unresolved), "rejected_nonlocalized": self.rejected,
                "sizes": list(self.sizes), "middle_half_mass": list(self.masses)}


def _outside_eigenvalues_tridiag(tm: bd.TruncationMatrix, bandset: SpectralSet) -> np.ndarray:
    d, e = tm.diag, tm.offdiag
    n = len(d)
    inside = np.zeros(n, dtype=bool)
    for lo, hi in bandset.components():
        c = sturm_count(d, e, np.array([lo, np.nextafter(hi, np.inf)]))
        inside[int(c[0]):int(c[1])] = True
    idx = np.flatnonzero(~inside)
    return eigenvalues_by_index(d, e, idx) if len(idx) else np.zeros(0)


def _middle_half_mass(vec: np.ndarray, shape: tuple) -> float:
    v = np.abs(vec.reshape(shape)) ** 2
    sl = tuple(slice(s // 4, s - s // 4) for s in shape)
    return float(v[sl].sum() / v.sum())


def _eigvecs(tm: bd.TruncationMatrix, lam: np.ndarray) -> np.ndarray:
    if tm.tridiagonal:
        return inverse_iteration(tm.diag, tm.offdiag, lam)
    res = dense_sym_eigen(tm.dense(), want_vectors=True)
    j = [int(np.argmin(np.abs(res.eigenvalues - x))) for x in lam]
    return res.eigenvectors[:, j]


def _truncation_spectrum(op: bd.BandOperator, half: int, bandset: SpectralSet):
    tm = bd.truncate(op, ((-half,) * op.dim, (half,) * op.dim))
    if tm.tridiagonal:
        lam = _outside_eigenvalues_tridiag(tm, bandset)
    else:
        if tm.size > MAX_DENSE_SIZE:
            raise NoConvergence(f"truncation of size {tm.size} exceeds the dense limit")
        ev = dense_sym_eigen(tm.dense()).eigenvalues
        lam = ev[bandset.distance_to(ev) > 0]
    return tm, np.sort(lam)


def _matched(prev: np.ndarray, cur: np.ndarray, bandset: SpectralSet, tol: float) -> bool:
    """Every eigenvalue farther than ``2 tol`` from the band has a partner at the other size."""
    for x, y in ((prev, cur), (cur, prev)):
        far = x[bandset.distance_to(x) > 2 * tol] if len(x) else x
        for lam in far:
            if len(y) == 0 or np.min(np.abs(y - lam)) >= CONVERGENCE_TOL:
                return False
    return True


def discrete_spectrum(op: bd.BandOperator, bandset: SpectralSet, start_half: int,
                      tol: float = EDGE_TOL, max_half: int | None = None) -> DiscreteSpectrumResult:
    """Band plus converged, localized truncation eigenvalues outside the band.

    Truncations on ``[-N, N]^d`` are taken at doubling ``N`` starting from
    ``start_half`` until the eigenvalues outside the band reappear within
    ``CONVERGENCE_TOL`` at the next size. An eigenvalue is kept only if its
    eigenvector holds more than ``LOCALIZATION_MASS`` of its weight in the
    middle half of the box (others are edge artifacts of the truncation).
    Kept eigenvalues within ``tol`` of the band are flagged with a
    :class:`SpectrumWarning` instead of being dropped.

    Raises
    ------
    NoConvergence
        If eigenvalues away from the band edge have not stabilized at
        the largest admissible size.
    """
    if max_half is None:
        max_half = MAX_HALF_WIDTH_1D if op.dim == 1 else 34
    half = min(int(start_half), max_half // 2)
    tm, cur = _truncation_spectrum(op, half, bandset)
    sizes = [tm.size]
    converged = False
    while 2 * half <= max_half:
        half *= 2
        prev = cur
        tm, cur = _truncation_spectrum(op, half, bandset)
        sizes.append(tm.size)
        if _matched(prev, cur, bandset, tol):
            converged = True
            break
    far = bandset.distance_to(cur) > tol if len(cur) else np.zeros(0, bool)
    if not converged and np.any(bandset.distance_to(cur) > 2 * tol):
        raise NoConvergence(f"discrete eigenvalues did not stabilize up to size {sizes[-1]}")
    points, masses, flagged, unresolved, rejected = [], [], [], [], 0
    if len(cur):
        vecs = _eigvecs(tm, cur)
        for j, lam in enumerate(cur):
            m = _middle_half_mass(vecs[:, j], tm.shape)
            if m <= LOCALIZATION_MASS:
                rejected += 1
            elif far[j]:
                points.append(float(lam))
                masses.append(m)
            elif converged:
                flagged.append(float(lam))
            else:
                unresolved.append(float(lam))
    if flagged or unresolved:
        warnings.warn(f"eigenvalues within {tol} of the band edge: {flagged + unresolved}",
                      SpectrumWarning, stacklevel=2)
    spec = SpectralSet(bandset.intervals, list(bandset.points) + points + flagged)
    return DiscreteSpectrumResult(spec, bandset, points, flagged, unresolved, rejected, sizes, masses)


def two_body_analysis(op: bd.BandOperator, tol: float = EDGE_TOL) -> DiscreteSpectrumResult:
    """Detailed two-body computation; see :func:`two_body_spectrum`."""
    free, box = split_two_body(op)
    bandset = laurent_spectrum(SymbolFunction.from_operator(free))
    if box is None:
        return DiscreteSpectrumResult(bandset, bandset)
    # recentre the perturbation so that translated inputs give identical matrices
    center = tuple((l + h) // 2 for l, h in zip(*box))
    centred = bd.translate(op, center)
    radius = max(max(h - c, c - l) for l, h, c in zip(box[0], box[1], center))
    start = max(16, 4 * (radius + op.width), _edge_half_width(tol, op.dim))
    res = discrete_spectrum(centred, bandset, start, tol)
    res.center = center
    return res


def two_body_spectrum(op: bd.BandOperator, tol: float = EDGE_TOL) -> SpectralSet:
    """Free band plus the discrete eigenvalues of a decaying perturbation."""
    return two_body_analysis(op, tol).spectrum


# ---------------------------------------------------------------------------
# domain walls

def split_interface(op: bd.BandOperator):
    """Left and right periodic operators of a domain-wall operator and the wall site."""
    walls = {c.wall for c in op.coeffs.values() if isinstance(c, DomainWall)}
    if op.dim != 1 or not walls:
        raise ClassUnsupported("not a one-dimensional domain-wall operator")
    if len(walls) > 1:
        raise ClassUnsupported("domain-wall coefficients with different wall sites")
    left, right = {}, {}
    for a, c in op.coeffs.items():
        if isinstance(c, DomainWall):
            left[a], right[a] = c.left, c.right
        elif isinstance(c, (Constant, Periodic)):
            left[a] = right[a] = c
        else:
            raise ClassUnsupported(f"coefficient at {a} is not constant, periodic or a wall")
    return (lift_period(bd.BandOperator(left, 1, True)),
            lift_period(bd.BandOperator(right, 1, True)), walls.pop())


def interface_analysis(op: bd.BandOperator, tol: float = EDGE_TOL,
                       k_samples: int = 128) -> DiscreteSpectrumResult:
    left, right, wall = split_interface(op)
    bandset = union(bloch_spectrum(left, k_samples), bloch_spectrum(right, k_samples))
    centred = bd.translate(op, (wall,))
    p = max(common_period(left)[0], common_period(right)[0])
    start = max(32, 16 * p, _edge_half_width(tol, 1))
    res = discrete_spectrum(centred, bandset, start, tol)
    res.center = (wall,)
    return res


def interface_spectrum(op: bd.BandOperator, tol: float = EDGE_TOL) -> SpectralSet:
    """Bloch bands of both sides plus wall-localized eigenvalues."""
    return interface_analysis(op, tol).spectrum


# ---------------------------------------------------------------------------
# tensor sums

def separable_sum_spectrum(parts) -> SpectralSet:
    """Iterated Minkowski sum of the part spectra."""
    parts = list(parts)
    if not parts:
        raise EmptyOperand("no parts to sum")
    return reduce(minkowski_sum, parts)


def _flatten_sum(c: Coefficient) -> list:
    if isinstance(c, Composite) and c.op == "sum":
        return [t for p in c.parts for t in _flatten_sum(p)]
    return [c]


def split_separable(op: bd.BandOperator) -> list[bd.BandOperator]:
    """1D operators ``H_i`` with ``op = sum_i H_i acting on coordinate i``.

    Off-diagonal offsets must lie on coordinate axes with constant
    coefficients; the diagonal must be a sum of constants and
    :class:`AxisFunction` terms.
    """
    if op.dim != 2:
        raise ClassUnsupported("separable splitting needs a 2D operator")
    parts: list[dict] = [{} for _ in range(op.dim)]
    zero = (0,) * op.dim
    for a, c in op.coeffs.items():
        if a == zero:
            continue
        nz = [i for i, t in enumerate(a) if t]
        if len(nz) != 1 or not isinstance(c, Constant):
            raise ClassUnsupported(f"offset {a} is not a constant axis hopping")
        parts[nz[0]][(a[nz[0]],)] = Constant(c.value, 1)
    const = 0.0
    pots: list[list] = [[] for _ in range(op.dim)]
    if zero in op.coeffs:
        for t in _flatten_sum(op.coeffs[zero]):
            if isinstance(t, Constant):
                const += t.value
            elif isinstance(t, AxisFunction):
                pots[t.axis].append(t.inner)
            else:
                raise ClassUnsupported("diagonal term depends on both coordinates")
    out = []
    for i in range(op.dim):
        diag_terms = pots[i] + ([Constant(const, 1)] if i == 0 and const else [])
        if diag_terms:
            parts[i][(0,)] = cf.add(*diag_terms)
        out.append(bd.BandOperator(parts[i], 1, True))
    return out


# ---------------------------------------------------------------------------
# classification and dispatch

LAURENT, PERIODIC, TWO_BODY, INTERFACE, SEPARABLE = "Laurent", "Periodic", "TwoBody", "Interface", "Separable"


def classify(op: bd.BandOperator) -> str:
    """Class tag of a limit operator, or :class:`ClassUnsupported`."""
    cs = list(op.coeffs.values())
    if all(isinstance(c, Constant) for c in cs):
        return LAURENT
    if all(isinstance(c, (Constant, Periodic)) for c in cs):
        return PERIODIC
    if any(isinstance(c, DomainWall) for c in cs):
        split_interface(op)
        return INTERFACE
    if all(decay_profile(c) is not None for c in cs):
        return TWO_BODY
    if op.dim == 2:
        split_separable(op)
        return SEPARABLE
    raise ClassUnsupported("limit operator is outside the supported classes")


def analyse(op: bd.BandOperator, cls: str | None = None, tol: float = EDGE_TOL,
            k_samples: int = 128) -> DiscreteSpectrumResult:
    """Spectrum of a limit operator with class-specific details."""
    cls = cls or classify(op)
    if cls == LAURENT:
        s = laurent_spectrum(SymbolFunction.from_operator(op))
        return DiscreteSpectrumResult(s, s)
    if cls == PERIODIC:
        s = bloch_spectrum(lift_period(op), k_samples)
        return DiscreteSpectrumResult(s, s)
    if cls == TWO_BODY:
        return two_body_analysis(op, tol)
    if cls == INTERFACE:
        return interface_analysis(op, tol, k_samples)
    if cls == SEPARABLE:
        subs = [analyse(p, tol=tol, k_samples=k_samples) for p in split_separable(op)]
        s = separable_sum_spectrum([r.spectrum for r in subs])
        return DiscreteSpectrumResult(s, s, points=[p for r in subs for p in r.points])
    raise ClassUnsupported(f"unknown class {cls!r}")


def spectrum(op: bd.BandOperator, cls: str | None = None, tol: float = EDGE_TOL) -> SpectralSet:
    return analyse(op, cls, tol).spectrum
