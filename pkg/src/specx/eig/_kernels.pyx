# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the symmetric eigensolvers.

Every function here has a NumPy twin with the same signature in
``_fallback.py``; ``specx.eig._backend`` picks one at import time.
"""
import numpy as np

from cython.parallel cimport prange
from libc.math cimport fabs, hypot, copysign
from scipy.linalg.cython_blas cimport dsymv, dsyr2, dgemv, dger, dnrm2, ddot

BACKEND = "compiled"


DEF BLOCK = 32


cdef void _count_block(const double* d, const double* e2, Py_ssize_t n,
                       const double* x, Py_ssize_t nb, double pivmin,
                       long long* out) noexcept nogil:
    # nb <= BLOCK energies advanced together; independent divisions pipeline
    cdef double q[BLOCK]
    cdef long long c[BLOCK]
    cdef Py_ssize_t i, j
    cdef double t
    for j in range(nb):
        t = d[0] - x[j]
        if fabs(t) < pivmin:
            t = -pivmin
        q[j] = t
        c[j] = 1 if t < 0 else 0
    for i in range(1, n):
        for j in range(nb):
            t = d[i] - x[j] - e2[i - 1] / q[j]
            t = -pivmin if fabs(t) < pivmin else t
            q[j] = t
            c[j] += t < 0
    for j in range(nb):
        out[j] = c[j]


def sturm_count(const double[::1] d, const double[::1] e2, const double[::1] x,
                double pivmin, int num_threads=1):
    """Number of eigenvalues strictly below each ``x[j]``."""
    cdef Py_ssize_t n = d.shape[0], m = x.shape[0], b, nblocks
    out = np.zeros(m, dtype=np.int64)
    cdef long long[::1] o = out
    if n == 0 or m == 0:
        return out
    nblocks = (m + BLOCK - 1) // BLOCK
    for b in prange(nblocks, nogil=True, num_threads=num_threads, schedule="static"):
        _count_block(&d[0], &e2[0], n, &x[b * BLOCK],
                     min(BLOCK, m - b * BLOCK), pivmin, &o[b * BLOCK])
    return out


cdef void _bisect_block(const double* d, const double* e2, Py_ssize_t n,
                        const long long* idx, Py_ssize_t nb, double lo, double hi,
                        double tol, double pivmin, double* out) noexcept nogil:
    cdef double a[BLOCK]
    cdef double b[BLOCK]
    cdef double mid[BLOCK]
    cdef long long cnt[BLOCK]
    cdef Py_ssize_t j
    cdef bint busy = True
    for j in range(nb):
        a[j] = lo
        b[j] = hi
    while busy:
        busy = False
        for j in range(nb):
            mid[j] = 0.5 * (a[j] + b[j])
            if b[j] - a[j] > tol and mid[j] > a[j] and mid[j] < b[j]:
                busy = True
        if not busy:
            break
        _count_block(d, e2, n, mid, nb, pivmin, cnt)
        for j in range(nb):
            if b[j] - a[j] > tol and mid[j] > a[j] and mid[j] < b[j]:
                if cnt[j] > idx[j]:
                    b[j] = mid[j]
                else:
                    a[j] = mid[j]
    for j in range(nb):
        out[j] = 0.5 * (a[j] + b[j])


def bisect(const double[::1] d, const double[::1] e2, const long long[::1] idx,
           double lo, double hi, double tol, double pivmin, int num_threads=1):
    """Eigenvalues with 0-based indices ``idx``, each bracketed in ``[lo, hi]``."""
    cdef Py_ssize_t n = d.shape[0], m = idx.shape[0], b, nblocks
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    if m == 0:
        return out
    nblocks = (m + BLOCK - 1) // BLOCK
    for b in prange(nblocks, nogil=True, num_threads=num_threads, schedule="dynamic"):
        _bisect_block(&d[0], &e2[0], n, &idx[b * BLOCK], min(BLOCK, m - b * BLOCK),
                      lo, hi, tol, pivmin, &o[b * BLOCK])
    return out


def shifted_solve(const double[::1] d, const double[::1] e, const double[::1] shifts,
                  const double[:, ::1] rhs, double pivtiny):
    """Solve ``(T - shifts[j]) y_j = rhs[j]`` for every row ``j`` of ``rhs``.

    Gaussian elimination with partial pivoting on the tridiagonal matrix
    (the ``dgtsv`` scheme); exactly singular pivots are replaced by
    ``pivtiny`` so the solve doubles as an inverse-iteration step.
    """
    cdef Py_ssize_t n = d.shape[0], m = shifts.shape[0], i, j
    out = np.array(rhs, dtype=np.float64, copy=True)
    cdef double[:, ::1] b = out
    dd_arr = np.empty(n)
    du_arr = np.empty(max(n - 1, 1))
    dl_arr = np.empty(max(n - 1, 1))
    du2_arr = np.empty(max(n - 1, 1))
    cdef double[::1] dd = dd_arr, du = du_arr, dl = dl_arr, du2 = du2_arr
    cdef double fact, temp, s
    for j in range(m):
        s = shifts[j]
        for i in range(n):
            dd[i] = d[i] - s
        for i in range(n - 1):
            du[i] = e[i]
            dl[i] = e[i]
            du2[i] = 0.0
        for i in range(n - 1):
            if fabs(dd[i]) >= fabs(dl[i]):
                if dd[i] == 0.0:
                    dd[i] = pivtiny
                fact = dl[i] / dd[i]
                dd[i + 1] = dd[i + 1] - fact * du[i]
                b[j, i + 1] = b[j, i + 1] - fact * b[j, i]
                du2[i] = 0.0
            else:
                fact = dd[i] / dl[i]
                dd[i] = dl[i]
                temp = dd[i + 1]
                dd[i + 1] = du[i] - fact * temp
                if i < n - 2:
                    du2[i] = du[i + 1]
                    du[i + 1] = -fact * du2[i]
                else:
                    du2[i] = 0.0
                du[i] = temp
                temp = b[j, i]
                b[j, i] = b[j, i + 1]
                b[j, i + 1] = temp - fact * b[j, i + 1]
        if dd[n - 1] == 0.0:
            dd[n - 1] = pivtiny
        b[j, n - 1] = b[j, n - 1] / dd[n - 1]
        if n > 1:
            if dd[n - 2] == 0.0:
                dd[n - 2] = pivtiny
            b[j, n - 2] = (b[j, n - 2] - du[n - 2] * b[j, n - 1]) / dd[n - 2]
        for i in range(n - 3, -1, -1):
            if dd[i] == 0.0:
                dd[i] = pivtiny
            b[j, i] = (b[j, i] - du[i] * b[j, i + 1] - du2[i] * b[j, i + 2]) / dd[i]
    return out


def ql_implicit(double[::1] d, double[::1] e, zt, int maxit=50):
    """Implicit-shift QL on a symmetric tridiagonal matrix, in place.

    ``e`` has length n with ``e[i]`` coupling i and i+1 (``e[n-1]`` is
    scratch). ``zt`` is None or an (n, n) C-contiguous array whose *rows*
    are rotated, so on exit row i holds the eigenvector for ``d[i]``
    when ``zt`` started as the identity. Returns 0, or ``l + 1`` when
    eigenvalue ``l`` exceeded ``maxit`` iterations.
    """
    cdef Py_ssize_t n = d.shape[0], l, m, i, k
    cdef int it
    cdef double g, r, s, c, p, f, b, dd, zi, zi1
    cdef double eps = np.finfo(np.float64).eps
    cdef double floor = 0.0
    cdef double[:, ::1] z
    cdef bint vectors = zt is not None
    if vectors:
        z = zt
    # absolute deflation floor so that rank-deficient blocks (d ~ 0) split
    for i in range(n):
        floor = max(floor, fabs(d[i]) + (fabs(e[i]) if i < n - 1 else 0.0))
    floor *= eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= eps * dd or fabs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            if it == maxit:
                return l + 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if vectors:
                    for k in range(n):
                        zi = z[i, k]
                        zi1 = z[i + 1, k]
                        z[i + 1, k] = s * zi + c * zi1
                        z[i, k] = c * zi - s * zi1
                i -= 1
            if r == 0.0 and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def householder(double[::1, :] a, bint want_q):
    """Reduce a symmetric Fortran-ordered matrix to tridiagonal form.

    Only the lower triangle of ``a`` is read; it is overwritten. Returns
    ``(diag, offdiag, Q)`` with ``A = Q T Q^T`` (``Q`` is None unless
    requested).
    """
    cdef int n = a.shape[0]
    cdef int k, k2, m, m1, one = 1, lda = n
    cdef double alpha, xnorm, beta, tau, scal, half, neg = -1.0, zero = 0.0
    cdef char lo = b"L"
    cdef char tr = b"T"
    diag = np.zeros(n)
    off = np.zeros(max(n - 1, 0))
    taus = np.zeros(max(n - 1, 1))
    cdef double[::1] dg = diag, of = off, ta = taus
    work_arr = np.zeros(max(n, 1))
    cdef double[::1] w = work_arr
    for k in range(n - 2):
        m = n - k - 1
        alpha = a[k + 1, k]
        m1 = m - 1
        xnorm = dnrm2(&m1, &a[k + 2, k], &one) if m1 > 0 else 0.0
        if xnorm == 0.0:
            tau = 0.0
            beta = alpha
        else:
            beta = -copysign(hypot(alpha, xnorm), alpha)
            tau = (beta - alpha) / beta
            scal = 1.0 / (alpha - beta)
            for k2 in range(k + 2, n):
                a[k2, k] *= scal
        a[k + 1, k] = 1.0
        dg[k] = a[k, k]
        of[k] = beta
        ta[k] = tau
        if tau != 0.0:
            # p = tau * A22 v ; w = p - (tau/2)(p.v) v ; A22 -= v w^T + w v^T
            dsymv(&lo, &m, &tau, &a[k + 1, k + 1], &lda, &a[k + 1, k], &one,
                  &zero, &w[0], &one)
            half = -0.5 * tau * ddot(&m, &w[0], &one, &a[k + 1, k], &one)
            for k2 in range(m):
                w[k2] += half * a[k + 1 + k2, k]
            dsyr2(&lo, &m, &neg, &a[k + 1, k], &one, &w[0], &one,
                  &a[k + 1, k + 1], &lda)
    if n >= 2:
        dg[n - 2] = a[n - 2, n - 2]
        of[n - 2] = a[n - 1, n - 2]
    if n >= 1:
        dg[n - 1] = a[n - 1, n - 1]
    if not want_q:
        return diag, off, None
    q_arr = np.asfortranarray(np.eye(n))
    cdef double[::1, :] q = q_arr
    for k in range(n - 3, -1, -1):
        tau = ta[k]
        if tau == 0.0:
            continue
        m = n - k - 1
        # w = Q_sub^T v ; Q_sub -= tau v w^T
        dgemv(&tr, &m, &m, &tau, &q[k + 1, k + 1], &lda, &a[k + 1, k], &one,
              &zero, &w[0], &one)
        dger(&m, &m, &neg, &a[k + 1, k], &one, &w[0], &one, &q[k + 1, k + 1], &lda)
    return diag, off, q_arr
