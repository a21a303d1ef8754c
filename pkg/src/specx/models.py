"""Scenario builders, class-specific assemblers and the finite-section oracle.

Each :class:`ModelSpec` variant builds a hermitian band operator whose
essential spectrum can be assembled in two independent ways: through the
generic localization machinery and through a class-specific formula
(Klaus union for sparse bumps, Bloch bands for warped periodic
potentials, atom decomposition for the two-dimensional N-body model).
:func:`finite_section_oracle` provides the brute-force check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import band as bd
from . import coefficients as cf
from . import limit_solvers as ls
from . import localization as lz
from .eig import (dense_sym_eigen, eigenvalues_by_index, gershgorin_bounds, inverse_iteration,
                  sturm_count)
from .errors import InfeasibleSize, InvalidSpec, UnsupportedLattice
from .spectral_sets import SpectralSet, closure_union, from_samples, hausdorff, one_sided_hausdorff

VARIANTS = ("two_body", "slowly_oscillating", "sparse_klaus", "warped_periodic", "grassmann_nbody")

#: Largest tridiagonal truncation and largest dense truncation (sites).
MAX_TRIDIAG = 10**6
MAX_DENSE = 4900
#: Centers excluded one by one when evaluating the Klaus intersection.
KLAUS_DEPTH = 32


def _int_keys(d) -> dict:
    return {int(k): float(v) for k, v in (d or {}).items()}


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of a model operator.

    Parameters
    ----------
    variant : str
        One of :data:`VARIANTS`.
    hopping : dict
        Positive offset -> weight; mirrored to negative offsets and applied
        along every axis.
    params : dict
        Variant parameters:

        * ``two_body``: ``potential`` {site: value}
        * ``slowly_oscillating``: ``expr``, ``amplitude``, ``mean``, ``range``
        * ``sparse_klaus``: ``profiles`` (list of {site: value}),
          ``schedule``, ``schedule_params``
        * ``warped_periodic``: ``table``, ``warp``, ``warp_params``
        * ``grassmann_nbody``: ``interactions``, a list of
          ``{"axis": i, "potential": {site: value}}``; each interaction
          depends on coordinate ``i`` only.
    """

    variant: str
    hopping: dict = field(default_factory=lambda: {1: 1.0})
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidSpec(f"unknown model variant {self.variant!r}")
        hop = _int_keys(self.hopping)
        if any(k <= 0 for k in hop):
            raise InvalidSpec("hopping offsets must be positive (they are mirrored)")
        object.__setattr__(self, "hopping", hop)

    @property
    def dim(self) -> int:
        return 2 if self.variant == "grassmann_nbody" else 1

    def to_dict(self) -> dict:
        return {"variant": self.variant, "hopping": dict(self.hopping), "params": self.params}


def free_operator(hopping: dict, dim: int = 1) -> bd.BandOperator:
    coeffs = {}
    for k, w in hopping.items():
        for axis in range(dim):
            for s in (k, -k):
                a = [0] * dim
                a[axis] = s
                coeffs[tuple(a)] = cf.Constant(w, dim)
    return bd.BandOperator(coeffs, dim, hermitian=True)


def _potential(d) -> cf.Decaying:
    return cf.Decaying(0.0, {(k,): v for k, v in _int_keys(d).items()})


def _interactions(spec: ModelSpec) -> list[tuple[int, cf.Decaying]]:
    out = []
    for item in spec.params.get("interactions", []):
        axis = int(item["axis"])
        if axis not in (0, 1):
            raise UnsupportedLattice(f"interaction axis {axis} is not a coordinate axis of Z^2")
        out.append((axis, _potential(item["potential"])))
    return out


def build(spec: ModelSpec) -> bd.BandOperator:
    """Hermitian band operator of a model spec.

    Raises
    ------
    InvalidSpec
        On missing or inconsistent parameters.
    """
    p = spec.params
    free = free_operator(spec.hopping, spec.dim)
    try:
        if spec.variant == "two_body":
            v = _potential(p.get("potential", {}))
        elif spec.variant == "slowly_oscillating":
            rng = p.get("range")
            v = cf.SlowlyOscillating(p.get("expr", "sin_sqrt"), p.get("amplitude", 1.0),
                                     p.get("mean", 0.0), tuple(rng) if rng is not None else None)
        elif spec.variant == "sparse_klaus":
            profiles = [_int_keys(q) for q in p.get("profiles", [{0: -3.0}])]
            v = cf.SparseBumps(p.get("schedule", "square"), profiles, p.get("schedule_params"))
        elif spec.variant == "warped_periodic":
            v = cf.WarpedPeriodic(p.get("table", [0.0, 3.0]), p.get("warp", "identity"),
                                  p.get("warp_params"))
        else:
            terms = [cf.AxisFunction(w, axis) for axis, w in _interactions(spec)]
            v = cf.add(*terms) if terms else cf.Constant(0.0, 2)
    except (TypeError, KeyError, ValueError) as exc:
        raise InvalidSpec(f"bad parameters for {spec.variant}: {exc}") from exc
    if cf.is_zero(v):
        return free
    return bd.add(free, bd.potential(v))


# ---------------------------------------------------------------------------
# class-specific assemblers

def _bump_operator(spec: ModelSpec, profile: dict, at: int = 0) -> bd.BandOperator:
    free = free_operator(spec.hopping)
    v = cf.Decaying(0.0, {(k + at,): x for k, x in profile.items()})
    return free if cf.is_zero(v) else bd.add(free, bd.potential(v))


def klaus_spectrum(spec: ModelSpec, tol: float = ls.EDGE_TOL) -> SpectralSet:
    """Union over bump types of the two-body spectrum of hopping plus that bump."""
    if spec.variant != "sparse_klaus":
        raise InvalidSpec("klaus_spectrum needs a sparse_klaus model")
    fn = build(spec).coefficient(0)
    profiles = fn.profiles if isinstance(fn, cf.SparseBumps) else [{}]
    return closure_union([ls.two_body_spectrum(_bump_operator(spec, dict(q)), tol) for q in profiles])


def klaus_exclusion_sequence(spec: ModelSpec, depth: int = KLAUS_DEPTH, window: int | None = None,
                             tol: float = ls.EDGE_TOL) -> list[SpectralSet]:
    """Sets ``U_{l not in F} sigma(H_l)`` for ``F`` = the first ``m`` centers, ``m = 0..depth``.

    ``H_l`` is the hopping plus the single bump sitting at center ``l``.
    The union over the complement is truncated to the next ``window``
    centers (default: two full cycles of bump types).
    """
    if spec.variant != "sparse_klaus":
        raise InvalidSpec("klaus_exclusion_sequence needs a sparse_klaus model")
    fn = build(spec).coefficient(0)
    if not isinstance(fn, cf.SparseBumps):
        return [ls.two_body_spectrum(free_operator(spec.hopping))] * (depth + 1)
    window = window or 2 * fn.ntypes
    spectra: dict[int, SpectralSet] = {}

    def sigma(j: int) -> SpectralSet:
        if j not in spectra:
            t = j % fn.ntypes
            c = int(fn.center_at(np.array([j]))[0]) - fn.offset
            spectra[j] = ls.two_body_spectrum(_bump_operator(spec, dict(fn.profiles[t]), c), tol)
        return spectra[j]

    return [closure_union([sigma(j) for j in range(m, m + window)]) for m in range(depth + 1)]


def warp_defect_profile(warp: cf.Warp, a_max: int = 8, x_max: int = 10**6) -> list[dict]:
    """``max_{|a| <= a_max} |theta(a + x) - a - theta(x)|`` over dyadic shells of ``|x|``."""
    out = []
    lo = 1
    while lo <= x_max:
        hi = min(2 * lo - 1, x_max)
        for sign in (1, -1):
            x = sign * np.arange(lo, hi + 1, dtype=np.int64)
            out.append({"sign": sign, "lo": lo, "hi": hi, "defect": int(warp.defect(a_max, x).max())})
        lo *= 2
    return out


def unwarped_operator(spec: ModelSpec) -> bd.BandOperator:
    table = np.asarray(spec.params.get("table", [0.0, 3.0]), dtype=float)
    per = cf.Periodic((table.size,), table)
    free = free_operator(spec.hopping)
    return free if cf.is_zero(per) else bd.add(free, bd.potential(per))


@dataclass
class WarpInvariance:
    bloch: SpectralSet
    assembled: SpectralSet
    distance: float
    report: lz.EssentialSpectrumReport | None = None

    def to_dict(self) -> dict:
        return {"bloch": self.bloch.to_dict(), "assembled": self.assembled.to_dict(),
                "distance": self.distance}


def warp_invariance(spec: ModelSpec, cfg: lz.LocalizationConfig | None = None) -> WarpInvariance:
    """Bloch spectrum of the unwarped operator against the assembled warped one."""
    if spec.variant != "warped_periodic":
        raise InvalidSpec("warp_invariance needs a warped_periodic model")
    cfg = cfg or lz.LocalizationConfig()
    bloch = ls.bloch_spectrum(ls.lift_period(unwarped_operator(spec)), cfg.k_samples)
    rep = lz.essential_spectrum_report(build(spec), cfg)
    return WarpInvariance(bloch, rep.spectrum, hausdorff(bloch, rep.spectrum), rep)


def _atom_operator(spec: ModelSpec, axis: int) -> bd.BandOperator:
    """1D transverse part of the atom along ``axis``: interactions in the other coordinate."""
    terms = [w for a, w in _interactions(spec) if a != axis]
    free = free_operator(spec.hopping)
    if not terms:
        return free
    return bd.add(free, bd.potential(cf.add(*terms)))


def hvz_spectrum(spec: ModelSpec, tol: float = ls.EDGE_TOL) -> SpectralSet:
    """Union over the coordinate-axis atoms of free band plus transverse two-body spectrum.

    Along the atom spanned by ``e_j`` only interactions depending on the
    other coordinate survive, so the atom Hamiltonian is a tensor sum of
    the free 1D operator and a 1D two-body operator. The localization
    toward the zero subspace is the free 2D operator, whose spectrum is
    contained in each atom spectrum.
    """
    if spec.variant != "grassmann_nbody":
        raise UnsupportedLattice("hvz_spectrum needs the two-dimensional grassmann_nbody model")
    band = ls.laurent_spectrum(ls.SymbolFunction.from_operator(free_operator(spec.hopping)))
    atoms = []
    for axis in range(2):
        transverse = ls.two_body_spectrum(_atom_operator(spec, axis), tol)
        atoms.append(ls.separable_sum_spectrum([band, transverse]))
    s = atoms[0]
    for t in atoms[1:]:
        s = s | t
    return s


# ---------------------------------------------------------------------------
# finite-section oracle

@dataclass(frozen=True)
class OracleConfig:
    """Filtering and sampling for :func:`finite_section_oracle`.

    Attributes
    ----------
    boundary_fraction, boundary_mass : float
        Eigenpairs with more than ``boundary_mass`` of their weight in the
        outer ``boundary_fraction`` of the box are edge artifacts.
    essential_only : bool
        Also drop eigenpairs holding more than ``bound_mass`` of their
        weight in the middle half of the box: bound states of the full
        operator, which belong to the discrete spectrum.
    samples : int
        Energy-grid cells for large tridiagonal truncations; smaller ones
        are solved completely.
    min_run : int
        Eigenvalue groups up to this size are resolved individually and
        screened by their eigenvectors.
    """

    boundary_fraction: float = 0.1
    boundary_mass: float = 0.5
    essential_only: bool = False
    bound_mass: float = 0.9
    samples: int = 4096
    merge_gap: float | None = None
    min_run: int = 16

    def __post_init__(self):
        if not (0 < self.boundary_fraction < 0.5 and 0 < self.boundary_mass <= 1
                and 0 < self.bound_mass <= 1):
            raise ValueError("fractions and masses must lie in (0, 1)")
        if self.samples < 16 or self.min_run < 1:
            raise ValueError("samples >= 16 and min_run >= 1 required")
        if self.merge_gap is not None and not self.merge_gap > 0:
            raise ValueError("merge_gap must be positive")


@dataclass
class OracleReport:
    """Finite-section eigenvalue cloud with boundary and bound-state bookkeeping."""

    shape: tuple
    total: int
    retained: int
    boundary_removed: int
    bound_removed: int
    cloud: np.ndarray
    spectrum: SpectralSet
    removed_values: list = field(default_factory=list)
    distances: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def removed(self) -> int:
        return self.boundary_removed + self.bound_removed

    def compare(self, assembled: SpectralSet) -> dict:
        """Hausdorff distances between the oracle set and an assembled spectrum."""
        if self.spectrum.is_empty:
            self.distances = {"hausdorff": math.inf, "oracle_to_assembled": math.inf,
                              "assembled_to_oracle": math.inf}
            return self.distances
        self.distances = {
            "hausdorff": hausdorff(self.spectrum, assembled),
            "oracle_to_assembled": one_sided_hausdorff(self.spectrum, assembled),
            "assembled_to_oracle": one_sided_hausdorff(assembled, self.spectrum),
        }
        return self.distances

    def to_dict(self) -> dict:
        return {"shape": list(self.shape), "total": self.total, "retained": self.retained,
                "boundary_removed": self.boundary_removed, "bound_removed": self.bound_removed,
                "removed_values": list(self.removed_values), "spectrum": self.spectrum.to_dict(),
                "distances": dict(self.distances)}


def _frame_masses(vecs: np.ndarray, shape: tuple, frac: float) -> tuple[np.ndarray, np.ndarray]:
    """Fraction of weight in the outer ``frac`` frame and in the middle half, per column."""
    w = np.abs(vecs) ** 2
    w = w / w.sum(axis=0, keepdims=True)
    grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
    outer = np.zeros(shape, dtype=bool)
    middle = np.ones(shape, dtype=bool)
    for g, s in zip(grids, shape):
        b = max(1, int(math.ceil(frac * s)))
        outer |= (g < b) | (g >= s - b)
        middle &= (g >= s // 4) & (g < s - s // 4)
    return w[outer.ravel()].sum(axis=0), w[middle.ravel()].sum(axis=0)


@dataclass
class _Run:
    """Consecutive occupied grid cells; ``first``/``last`` are eigenvalue indices."""

    first: int
    last: int
    cells: np.ndarray

    @property
    def count(self) -> int:
        return self.last - self.first + 1


def _grid_runs(d, e, cells: int) -> tuple[np.ndarray, list[_Run]]:
    """One Sturm pass over an energy grid, grouped into runs of occupied cells."""
    lo, hi = gershgorin_bounds(d, e)
    grid = np.linspace(lo, hi, cells + 1)
    cnt = sturm_count(d, e, grid)
    occ = np.diff(cnt) > 0
    edges = np.flatnonzero(np.diff(np.concatenate([[0], occ.astype(np.int8), [0]])))
    runs = [_Run(int(cnt[s]), int(cnt[t]) - 1, np.arange(s, t)) for s, t in zip(edges[::2], edges[1::2])]
    return grid, runs


def finite_section_oracle(op: bd.BandOperator, N: int, cfg: OracleConfig | None = None,
                          center=None) -> OracleReport:
    """Dirichlet truncation to a box of side ``N`` with artifact filtering.

    1D nearest-neighbour operators up to ``10^6`` sites are handled by
    Sturm counts on an energy grid (see :func:`_grid_oracle`); isolated
    eigenvalues are always bisected individually. Other operators are solved densely up to
    ``4900`` sites (a 70 x 70 box in 2D).

    Raises
    ------
    InfeasibleSize
        When the truncation exceeds those limits.
    """
    cfg = cfg or OracleConfig()
    N = int(N)
    if N < 2:
        raise InfeasibleSize("box side must be at least 2")
    c = (0,) * op.dim if center is None else cf.as_vector(center, op.dim)
    lo = tuple(t - N // 2 for t in c)
    hi = tuple(t + N - 1 for t in lo)
    tridiag = op.dim == 1 and all(abs(a[0]) <= 1 for a in op.coeffs)
    size = N ** op.dim
    if tridiag and size > MAX_TRIDIAG:
        raise InfeasibleSize(f"tridiagonal truncation of {size} sites exceeds {MAX_TRIDIAG}")
    if not tridiag and size > MAX_DENSE:
        raise InfeasibleSize(f"dense truncation of {size} sites exceeds {MAX_DENSE}")
    tm = bd.truncate(op, (lo, hi))
    if tm.tridiagonal and size > cfg.samples:
        return _grid_oracle(tm, cfg)
    if tm.tridiagonal:
        d, e = tm.diag, tm.offdiag
        lam = eigenvalues_by_index(d, e, np.arange(size))
        checked = _small_components(lam, cfg)
        vecs = inverse_iteration(d, e, lam[checked]) if len(checked) else np.zeros((size, 0))
    else:
        res = dense_sym_eigen(tm.dense(), want_vectors=True)
        lam, vecs = res.eigenvalues, res.eigenvectors
        checked = np.arange(size)
    is_edge, is_bound = _classify_states(vecs, tm.shape, cfg)
    drop = np.zeros(len(lam), dtype=bool)
    drop[checked[is_edge | is_bound]] = True
    cloud = lam[~drop]
    n_edge, n_bound = int(is_edge.sum()), int(is_bound.sum())
    return OracleReport(tm.shape, size, size - n_edge - n_bound, n_edge, n_bound, cloud,
                        from_samples(cloud, cfg.merge_gap), [float(x) for x in lam[drop]])


def _small_components(lam: np.ndarray, cfg: OracleConfig) -> np.ndarray:
    """Indices of eigenvalues in sample components with at most ``min_run`` members."""
    out = []
    for lo, hi in from_samples(lam, cfg.merge_gap).components():
        sel = np.flatnonzero((lam >= lo) & (lam <= hi))
        if len(sel) <= cfg.min_run:
            out.append(sel)
    return np.concatenate(out) if out else np.zeros(0, np.int64)


def _classify_states(vecs: np.ndarray, shape: tuple, cfg: OracleConfig):
    if vecs.shape[1] == 0:
        return np.zeros(0, bool), np.zeros(0, bool)
    outer, middle = _frame_masses(vecs, shape, cfg.boundary_fraction)
    is_edge = outer > cfg.boundary_mass
    is_bound = (middle > cfg.bound_mass) & ~is_edge if cfg.essential_only else np.zeros_like(is_edge)
    return is_edge, is_bound


def _grid_oracle(tm: bd.TruncationMatrix, cfg: OracleConfig) -> OracleReport:
    """Large tridiagonal truncations: Sturm counts on an energy grid.

    Runs of occupied grid cells holding more than ``min_run`` eigenvalues
    become intervals between their exactly bisected extreme eigenvalues
    (interior cells contribute their midpoints to the cloud). Smaller runs
    are resolved eigenvalue by eigenvalue and screened for edge and bound
    states. Gaps narrower than one grid cell are not resolved.
    """
    d, e = tm.diag, tm.offdiag
    size = len(d)
    grid, runs = _grid_runs(d, e, cfg.samples)
    h = grid[1] - grid[0]
    small = [r for r in runs if r.count <= cfg.min_run]
    big = [r for r in runs if r.count > cfg.min_run]
    cand = np.concatenate([np.arange(r.first, r.last + 1) for r in small]) if small \
        else np.zeros(0, np.int64)
    ends = np.array([i for r in big for i in (r.first, r.last)], dtype=np.int64)
    lam_c = eigenvalues_by_index(d, e, cand) if len(cand) else np.zeros(0)
    lam_e = eigenvalues_by_index(d, e, ends) if len(ends) else np.zeros(0)
    vecs = inverse_iteration(d, e, lam_c) if len(cand) else np.zeros((size, 0))
    is_edge, is_bound = _classify_states(vecs, tm.shape, cfg)
    drop = is_edge | is_bound
    kept = lam_c[~drop]
    sets, cloud = [], [kept]
    for k, r in enumerate(big):
        a, b = lam_e[2 * k], lam_e[2 * k + 1]
        mids = 0.5 * (grid[r.cells[1:-1]] + grid[r.cells[1:-1] + 1])
        cloud.append(np.concatenate([[a], mids, [b]]))
        sets.append(SpectralSet.interval(a, b))
    if len(kept):
        sets.append(from_samples(kept, cfg.merge_gap or h))
    n_edge, n_bound = int(is_edge.sum()), int(is_bound.sum())
    return OracleReport(tm.shape, size, size - n_edge - n_bound, n_edge, n_bound,
                        np.sort(np.concatenate(cloud)), closure_union(sets),
                        [float(x) for x in lam_c[drop]])

