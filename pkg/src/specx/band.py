"""Band operators ``(Tf)(x) = sum_a phi_a(x) f(x + a)`` on Z^d and their algebra."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import coefficients as cf
from .coefficients import Coefficient, Constant, as_points, as_vector
from .errors import DimensionMismatch, InvalidSpec, NonHermitianOperator

#: Window half-width and far radii used by the sampled hermiticity check.
HERMITIAN_WINDOW = 24
HERMITIAN_FAR = (10**3, 10**4, 10**5, 10**6)


def sample_points(dim: int, window: int = HERMITIAN_WINDOW, far=HERMITIAN_FAR) -> np.ndarray:
    """Deterministic probe points: a full window around 0 plus far blocks on each axis."""
    r = np.arange(-window, window + 1)
    if dim == 1:
        near = r.reshape(-1, 1)
        blocks = [near]
        for R in far:
            for sgn in (1, -1):
                blocks.append((sgn * R + np.arange(-4, 5)).reshape(-1, 1))
        return np.concatenate(blocks)
    g = np.stack(np.meshgrid(r, r, indexing="ij"), -1).reshape(-1, 2)
    blocks = [g]
    s = np.arange(-3, 4)
    for R in far:
        for axis in range(2):
            for sgn in (1, -1):
                pts = np.stack(np.meshgrid(s, s, indexing="ij"), -1).reshape(-1, 2)
                pts[:, axis] += sgn * R
                blocks.append(pts)
    return np.concatenate(blocks)


class BandOperator:
    """Finite-band operator on Z^dim.

    Parameters
    ----------
    coeffs : mapping offset -> Coefficient
        Offsets are integer vectors (ints allowed when ``dim == 1``).
    hermitian : bool or None
        Declared hermiticity. ``None`` decides by sampling
        ``phi_{-a}(x) == phi_a(x - a)`` on :func:`sample_points`.
    """

    def __init__(self, coeffs: Mapping, dim: int = 1, hermitian: bool | None = None):
        self.dim = int(dim)
        if self.dim not in (1, 2):
            raise InvalidSpec("only d = 1 and d = 2 lattices are supported")
        items = {}
        for a, c in coeffs.items():
            a = as_vector(a, self.dim)
            if not isinstance(c, Coefficient):
                c = Constant(c, self.dim)
            if c.dim != self.dim:
                raise DimensionMismatch(f"coefficient at {a} has dimension {c.dim}")
            if cf.is_zero(c):
                continue
            items[a] = c
        self.coeffs = dict(sorted(items.items()))
        self.hermitian = self.check_hermitian() if hermitian is None else bool(hermitian)

    @property
    def offsets(self) -> list[tuple]:
        return list(self.coeffs)

    @property
    def width(self) -> int:
        """Largest sup-norm offset."""
        return max((max(abs(t) for t in a) for a in self.coeffs), default=0)

    def coefficient(self, a) -> Coefficient:
        return self.coeffs.get(as_vector(a, self.dim), Constant(0.0, self.dim))

    def check_hermitian(self, points=None, atol: float = 0.0) -> bool:
        pts = sample_points(self.dim) if points is None else as_points(points, self.dim)
        for a, c in self.coeffs.items():
            neg = tuple(-t for t in a)
            if neg not in self.coeffs:
                return False
            lhs = self.coeffs[neg].values(pts)
            rhs = c.values(pts - np.asarray(a))
            if np.max(np.abs(lhs - rhs)) > atol:
                return False
        return True

    @property
    def sup_norm_bound(self) -> float:
        """Bound on the operator norm: sum of coefficient sup bounds."""
        return float(sum(c.sup for c in self.coeffs.values()))

    def apply(self, f: np.ndarray, lo) -> np.ndarray:
        """Apply to ``f`` supported on the box starting at ``lo`` (Dirichlet)."""
        lo = as_vector(lo, self.dim)
        shape = f.shape
        pts = box_points(lo, tuple(l + s - 1 for l, s in zip(lo, shape)))
        out = np.zeros(pts.shape[0], dtype=np.result_type(f, float))
        flat = f.ravel()
        for a, c in self.coeffs.items():
            tgt = pts + np.asarray(a)
            rel = tgt - np.asarray(lo)
            ok = np.all((rel >= 0) & (rel < np.asarray(shape)), axis=1)
            idx = np.ravel_multi_index(tuple(rel[ok].T), shape)
            out[ok] += c.values(pts[ok]) * flat[idx]
        return out.reshape(shape)

    def __repr__(self):
        terms = ", ".join(f"{a if self.dim > 1 else a[0]}: {c.kind}" for a, c in self.coeffs.items())
        return f"BandOperator(dim={self.dim}, hermitian={self.hermitian}, {{{terms}}})"


# ---------------------------------------------------------------------------
# constructors

def identity(dim: int = 1) -> BandOperator:
    return BandOperator({(0,) * dim: Constant(1.0, dim)}, dim, hermitian=True)


def hopping(dim: int = 1, weight: float = 1.0) -> BandOperator:
    """Nearest-neighbour hopping (discrete Laplacian without diagonal)."""
    coeffs = {}
    for axis in range(dim):
        for s in (1, -1):
            a = [0] * dim
            a[axis] = s
            coeffs[tuple(a)] = Constant(weight, dim)
    return BandOperator(coeffs, dim, hermitian=True)


def potential(v: Coefficient) -> BandOperator:
    return BandOperator({(0,) * v.dim: v}, v.dim, hermitian=True)


# ---------------------------------------------------------------------------
# algebra

def _same_dim(a: BandOperator, b: BandOperator):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")


def translate(op: BandOperator, x) -> BandOperator:
    """``U_x T U_x^*``: every coefficient becomes ``y -> phi_a(y + x)``."""
    x = as_vector(x, op.dim)
    return BandOperator({a: c.shifted(x) for a, c in op.coeffs.items()}, op.dim, op.hermitian)


def add(a: BandOperator, b: BandOperator) -> BandOperator:
    _same_dim(a, b)
    out = dict(a.coeffs)
    for k, c in b.coeffs.items():
        out[k] = cf.add(out[k], c) if k in out else c
    herm = True if (a.hermitian and b.hermitian) else None
    return BandOperator(out, a.dim, herm)


def scale(a: BandOperator, c: float) -> BandOperator:
    return BandOperator({k: cf.scale(v, c) for k, v in a.coeffs.items()}, a.dim,
                        True if a.hermitian and np.isreal(c) else None)


def multiply(a: BandOperator, b: BandOperator) -> BandOperator:
    """Operator product; the coefficient at ``c`` is ``sum_{a+b=c} phi_a(x) psi_b(x+a)``."""
    _same_dim(a, b)
    terms: dict[tuple, list] = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            kc = tuple(s + t for s, t in zip(ka, kb))
            terms.setdefault(kc, []).append(cf.mul(ca, cb.shifted(ka)))
    return BandOperator({k: cf.add(*v) for k, v in terms.items()}, a.dim)


def adjoint(a: BandOperator) -> BandOperator:
    """Adjoint: the coefficient at ``-a`` is ``x -> phi_a(x - a)``."""
    out = {}
    for k, c in a.coeffs.items():
        out[tuple(-t for t in k)] = c.shifted(tuple(-t for t in k))
    return BandOperator(out, a.dim, a.hermitian or None)


# ---------------------------------------------------------------------------
# truncation

def box_points(lo, hi) -> np.ndarray:
    """Row-major list of lattice points in the box ``[lo, hi]``."""
    axes = [np.arange(l, h + 1) for l, h in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))


@dataclass(frozen=True)
class TruncationMatrix:
    """Dirichlet restriction of a hermitian band operator to a box.

    Tridiagonal-tagged instances (1D, offsets in {-1, 0, 1}) store only
    ``diag``/``offdiag``; others store a dense symmetric ``matrix``.
    """

    lo: tuple
    hi: tuple
    diag: np.ndarray | None = None
    offdiag: np.ndarray | None = None
    matrix: np.ndarray | None = None
    bc: str = "dirichlet"

    @property
    def tridiagonal(self) -> bool:
        return self.matrix is None

    @property
    def shape(self) -> tuple:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def points(self) -> np.ndarray:
        return box_points(self.lo, self.hi)

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        n = self.size
        m = np.diag(self.diag)
        if n > 1:
            i = np.arange(n - 1)
            m[i, i + 1] = self.offdiag
            m[i + 1, i] = self.offdiag
        return m

    def entry(self, x, y) -> float:
        """Matrix entry between lattice points ``x`` and ``y`` of the box."""
        sh = self.shape
        i = np.ravel_multi_index(tuple(np.subtract(x, self.lo)), sh)
        j = np.ravel_multi_index(tuple(np.subtract(y, self.lo)), sh)
        return float(self.dense()[i, j])


def _normalize_box(box, dim):
    lo, hi = box
    lo, hi = as_vector(lo if np.ndim(lo) else [lo] * dim, dim), as_vector(hi if np.ndim(hi) else [hi] * dim, dim)
    if any(h < l for l, h in zip(lo, hi)):
        raise InvalidSpec(f"empty box {lo}..{hi}")
    return lo, hi


def truncate(op: BandOperator, box, bc: str = "dirichlet") -> TruncationMatrix:
    """Restrict a hermitian operator to ``box = (lo, hi)`` with Dirichlet walls.

    Only the offset 0 and the lexicographically positive offsets are
    evaluated; the negative ones are mirrored, so the stored matrix is
    symmetric to exact equality.
    """
    if bc != "dirichlet":
        raise InvalidSpec("only Dirichlet truncation is available")
    if not op.hermitian:
        raise NonHermitianOperator("truncate needs a hermitian operator")
    lo, hi = _normalize_box(box, op.dim)
    zero = (0,) * op.dim
    positive = [a for a in op.coeffs if a > zero]
    if op.dim == 1 and all(abs(a[0]) <= 1 for a in op.coeffs):
        x = np.arange(lo[0], hi[0] + 1)
        d = op.coefficient(zero).values(x)
        e = op.coefficient((1,)).values(x[:-1]) if len(x) > 1 else np.zeros(0)
        return TruncationMatrix(lo, hi, diag=np.ascontiguousarray(d, dtype=float),
                                offdiag=np.ascontiguousarray(e, dtype=float))
    pts = box_points(lo, hi)
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    n = pts.shape[0]
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = op.coefficient(zero).values(pts)
    for a in positive:
        rel = pts - np.asarray(lo) + np.asarray(a)
        ok = np.all((rel >= 0) & (rel < np.asarray(shape)), axis=1)
        j = np.ravel_multi_index(tuple(rel[ok].T), shape)
        v = op.coeffs[a].values(pts[ok])
        m[idx[ok], j] = v
        m[j, idx[ok]] = v
    return TruncationMatrix(lo, hi, matrix=m)
