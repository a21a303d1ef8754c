"""Double-precision symmetric eigensolvers and norm estimation.

Tridiagonal problems use Sturm-sequence bisection for eigenvalues and
inverse iteration for eigenvectors. Dense symmetric (or Hermitian)
matrices are first reduced by Householder reflections; the tridiagonal
problem is then finished either by implicit-shift QL or by bisection.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatch, NoConvergence, NonSymmetricInput
from ._backend import BACKEND, kernels, num_threads

__all__ = [
    "BACKEND",
    "SymmetricEigenResult",
    "tridiag_eigen",
    "dense_sym_eigen",
    "hermitian_eigvalsh",
    "operator_norm",
    "sturm_count",
    "eigenvalues_by_index",
    "inverse_iteration",
    "gershgorin_bounds",
]

EPS = np.finfo(float).eps
QL_MAXIT = 50
# eigenvalues closer than this (relative to the matrix norm) are treated as
# a cluster and orthogonalised by a Rayleigh-Ritz step
CLUSTER_RTOL = 1e-6


@dataclass(frozen=True)
class SymmetricEigenResult:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.eigenvalues)


def _as_tridiag(diag, offdiag):
    d = np.ascontiguousarray(diag, dtype=float)
    e = np.ascontiguousarray(offdiag, dtype=float)
    if d.ndim != 1 or e.ndim != 1 or len(e) != max(len(d) - 1, 0):
        raise DimensionMismatch(
            f"offdiag must have length len(diag)-1, got {len(e)} for {len(d)}"
        )
    return d, e


def gershgorin_bounds(diag, offdiag):
    """Interval containing every eigenvalue of the tridiagonal matrix."""
    d, e = _as_tridiag(diag, offdiag)
    if len(d) == 0:
        return 0.0, 0.0
    r = np.zeros_like(d)
    r[:-1] += np.abs(e)
    r[1:] += np.abs(e)
    lo = float(np.min(d - r))
    hi = float(np.max(d + r))
    pad = 2 * EPS * max(abs(lo), abs(hi), 1.0) * len(d)
    return lo - pad, hi + pad


def _pivmin(e):
    if len(e) == 0:
        return np.finfo(float).tiny
    return np.finfo(float).tiny * max(1.0, float(np.max(e * e)))


def sturm_count(diag, offdiag, x):
    """Number of eigenvalues strictly smaller than each entry of ``x``."""
    d, e = _as_tridiag(diag, offdiag)
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=float)
    e2 = np.ascontiguousarray(e * e) if len(e) else np.zeros(1)
    return kernels.sturm_count(d, e2, x, _pivmin(e), num_threads())


def eigenvalues_by_index(diag, offdiag, idx, tol=None):
    """Eigenvalues with the given 0-based ascending indices, by bisection."""
    d, e = _as_tridiag(diag, offdiag)
    idx = np.ascontiguousarray(np.atleast_1d(idx), dtype=np.int64)
    if len(idx) == 0:
        return np.zeros(0)
    if idx.min() < 0 or idx.max() >= len(d):
        raise IndexError("eigenvalue index out of range")
    lo, hi = gershgorin_bounds(d, e)
    if tol is None:
        tol = 4 * EPS * max(abs(lo), abs(hi), 1.0)
    e2 = np.ascontiguousarray(e * e) if len(e) else np.zeros(1)
    return kernels.bisect(d, e2, idx, lo, hi, tol, _pivmin(e), num_threads())


def _blocks(d, e):
    """Split points where the off-diagonal is negligible."""
    small = np.abs(e) <= EPS * (np.abs(d[:-1]) + np.abs(d[1:]))
    cuts = np.flatnonzero(small) + 1
    starts = np.concatenate([[0], cuts])
    stops = np.concatenate([cuts, [len(d)]])
    return list(zip(starts.tolist(), stops.tolist()))


def _tri_matvec(d, e, y):
    out = d * y
    out[:-1] += e * y[1:]
    out[1:] += e * y[:-1]
    return out


def _normalize_rows(y):
    norms = np.linalg.norm(y, axis=1)
    norms[norms == 0.0] = 1.0
    return y / norms[:, None]


def inverse_iteration(diag, offdiag, eigenvalues, iterations=3, seed=0):
    """Eigenvectors (as columns) for accurately known eigenvalues.

    The matrix must be unreduced for the result to be reliable; use
    :func:`tridiag_eigen` for the general case.
    """
    d, e = _as_tridiag(diag, offdiag)
    lam = np.ascontiguousarray(eigenvalues, dtype=float)
    n, m = len(d), len(lam)
    if m == 0:
        return np.zeros((n, 0))
    if n == 1:
        return np.ones((1, m))
    tnorm = max(np.max(np.abs(d)) + 2 * np.max(np.abs(e)), 1.0)
    pivtiny = EPS * tnorm
    rng = np.random.default_rng(seed)
    y = rng.uniform(-1.0, 1.0, size=(m, n))
    for _ in range(iterations):
        y = _normalize_rows(kernels.shifted_solve(d, e, lam, np.ascontiguousarray(y), pivtiny))
    y = _orthogonalize_clusters(d, e, lam, y, CLUSTER_RTOL * tnorm)
    # deterministic sign: largest component positive
    pick = np.argmax(np.abs(y), axis=1)
    signs = np.sign(y[np.arange(m), pick])
    signs[signs == 0] = 1.0
    return (y * signs[:, None]).T.copy()


def _orthogonalize_clusters(d, e, lam, y, gap):
    order = np.argsort(lam, kind="stable")
    groups = []
    current = [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if lam[b] - lam[a] < gap:
            current.append(b)
        else:
            groups.append(current)
            current = [b]
    groups.append(current)
    for g in groups:
        if len(g) < 2:
            continue
        block = y[g].T.copy()  # (n, k)
        basis = _mgs(block)
        small = basis.T @ np.column_stack([_tri_matvec(d, e, basis[:, j]) for j in range(basis.shape[1])])
        small = 0.5 * (small + small.T)
        ritz = dense_sym_eigen(small, want_vectors=True, method="ql")
        y[g] = (basis @ ritz.eigenvectors).T  # g is in ascending eigenvalue order
    return y


def _mgs(block):
    q = block.copy()
    k = q.shape[1]
    for _ in range(2):
        for j in range(k):
            for i in range(j):
                q[:, j] -= (q[:, i] @ q[:, j]) * q[:, i]
            q[:, j] /= np.linalg.norm(q[:, j])
    return q


def tridiag_eigen(diag, offdiag, want_vectors=False):
    """All eigenvalues (ascending) of a real symmetric tridiagonal matrix.

    Eigenvalues come from Sturm-sequence bisection; eigenvectors, when
    requested, from inverse iteration on each unreduced block.

    Raises
    ------
    DimensionMismatch
        If ``len(offdiag) != len(diag) - 1``.
    """
    d, e = _as_tridiag(diag, offdiag)
    n = len(d)
    if n == 0:
        return SymmetricEigenResult(np.zeros(0), np.zeros((0, 0)) if want_vectors else None)
    values = np.empty(n)
    vectors = np.zeros((n, n)) if want_vectors else None
    for start, stop in _blocks(d, e):
        db, eb = d[start:stop], e[start:stop - 1]
        lam = eigenvalues_by_index(db, eb, np.arange(stop - start))
        values[start:stop] = lam
        if want_vectors:
            vectors[start:stop, start:stop] = inverse_iteration(db, eb, lam)
    order = np.argsort(values, kind="stable")
    values = values[order]
    if want_vectors:
        vectors = vectors[:, order]
    return SymmetricEigenResult(values, vectors)


def _check_symmetric(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetricInput(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if m.size and np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
        raise NonSymmetricInput("matrix is not symmetric/Hermitian")


def _real_sym_eigen(a, want_vectors, method):
    n = a.shape[0]
    if n == 0:
        return SymmetricEigenResult(np.zeros(0), np.zeros((0, 0)) if want_vectors else None)
    if n == 1:
        return SymmetricEigenResult(a[0].astype(float).copy(), np.ones((1, 1)) if want_vectors else None)
    work = np.asfortranarray(a, dtype=float).copy(order="F")
    d, e, q = kernels.householder(work, bool(want_vectors))
    if method == "auto":
        method = "ql" if (not want_vectors or n <= 400) else "bisect"
    if method == "ql":
        dd = np.ascontiguousarray(d.copy())
        ee = np.zeros(n)
        ee[: n - 1] = e
        zt = np.ascontiguousarray(q.T) if want_vectors else None
        status = kernels.ql_implicit(dd, ee, zt, QL_MAXIT)
        if status:
            raise NoConvergence(f"QL iteration cap reached at eigenvalue {status - 1}")
        order = np.argsort(dd, kind="stable")
        vals = dd[order]
        vecs = zt[order].T.copy() if want_vectors else None
        return SymmetricEigenResult(vals, vecs)
    if method == "bisect":
        tri = tridiag_eigen(d, e, want_vectors)
        vecs = q @ tri.eigenvectors if want_vectors else None
        return SymmetricEigenResult(tri.eigenvalues, vecs)
    raise ValueError(f"unknown method {method!r}")


def dense_sym_eigen(m, want_vectors=False, method="auto"):
    """Eigen-decomposition of a dense real symmetric or complex Hermitian matrix.

    Parameters
    ----------
    m : (n, n) array_like
        Symmetric (real) or Hermitian (complex) matrix.
    want_vectors : bool
        Also return orthonormal eigenvectors as columns.
    method : {"auto", "ql", "bisect"}
        How the tridiagonal stage is finished after Householder
        reduction. ``"auto"`` uses QL unless many vectors are wanted.

    Complex Hermitian input ``A + iB`` is solved through the real
    symmetric embedding ``[[A, -B], [B, A]]``, whose eigenvalues come in
    identical pairs; one of each pair is kept.
    """
    m = np.asarray(m)
    _check_symmetric(m)
    if not np.iscomplexobj(m) or not np.any(m.imag):
        return _real_sym_eigen(np.real(m).astype(float), want_vectors, method)
    n = m.shape[0]
    a, b = m.real, m.imag
    emb = np.block([[a, -b], [b, a]])
    res = _real_sym_eigen(emb, want_vectors, method)
    pairs = res.eigenvalues.reshape(n, 2)
    scale = max(1.0, float(np.max(np.abs(res.eigenvalues))))
    if np.max(pairs[:, 1] - pairs[:, 0]) > 1e-9 * scale:
        raise NoConvergence("real embedding produced unpaired eigenvalues")
    vals = pairs[:, 0].copy()
    if not want_vectors:
        return SymmetricEigenResult(vals)
    cand = res.eigenvectors[:n] + 1j * res.eigenvectors[n:]
    vecs = _pick_complex_vectors(cand, res.eigenvalues, 1e-9 * scale)
    return SymmetricEigenResult(vals, vecs)


def _pick_complex_vectors(cand, lam, tol):
    # each complex eigenvector appears twice (times i); keep an orthonormal half
    n2 = cand.shape[1]
    out = []
    j = 0
    while j < n2:
        k = j
        while k + 1 < n2 and lam[k + 1] - lam[k] <= tol:
            k += 1
        group = cand[:, j:k + 1]
        want = (k + 1 - j) // 2
        basis = []
        for col in group.T:
            v = col.copy()
            for _ in range(2):
                for u in basis:
                    v -= (u.conj() @ v) * u
            nv = np.linalg.norm(v)
            if nv > 0.5:
                basis.append(v / nv)
            if len(basis) == want:
                break
        out.extend(basis)
        j = k + 1
    return np.column_stack(out)


def hermitian_eigvalsh(h):
    """Sorted eigenvalues of a Hermitian matrix (convenience wrapper)."""
    return dense_sym_eigen(h, want_vectors=False).eigenvalues


def operator_norm(m, tol=1e-10, maxiter=20000, seed=0):
    """Spectral norm by power iteration on ``M^* M``.

    Symmetric/Hermitian input is cross-checked against the largest
    eigenvalue modulus; diagonal ``M^* M`` (partial isometries, diagonal
    matrices) is read off exactly.

    Raises
    ------
    NoConvergence
        If the power iteration stalls and no dense fallback applies, or
        the symmetric cross-check disagrees.
    """
    m = np.asarray(m)
    if m.size == 0 or not np.any(m):
        return 0.0
    g = m.conj().T @ m
    offdiag = g - np.diag(np.diag(g))
    if not np.any(offdiag):
        return float(np.sqrt(np.max(np.real(np.diag(g)))))
    n = g.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + (1j * rng.standard_normal(n) if np.iscomplexobj(g) else 0.0)
    x /= np.linalg.norm(x)
    lam = 0.0
    converged = False
    # clustered top singular values stall the power method; small problems
    # switch to the dense solver early instead of burning iterations
    budget = maxiter if n > 2000 else min(maxiter, 300)
    for _ in range(budget):
        y = g @ x
        new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            lam = new
            converged = True
            break
        lam = new
    symmetric = m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=1e-14 * np.max(np.abs(m)))
    if not converged:
        if n > 2000:
            raise NoConvergence("power iteration did not converge")
        lam = float(max(dense_sym_eigen(0.5 * (g + g.conj().T)).eigenvalues[-1], 0.0))
    value = float(np.sqrt(max(lam, 0.0)))
    if symmetric and n <= 1000:
        exact = float(np.max(np.abs(dense_sym_eigen(m).eigenvalues)))
        if abs(exact - value) > 1e-6 * max(exact, 1.0):
            raise NoConvergence(f"power iteration {value} disagrees with eigenvalues {exact}")
        return exact
    return value
