"""Pure NumPy versions of the compiled kernels in ``_kernels.pyx``.

Loops that the compiled core runs per eigenvalue are vectorised here
across eigenvalues (or energies) instead, so the fallback stays usable
for moderate sizes.
"""
import math

import numpy as np

BACKEND = "numpy"


def sturm_count(d, e2, x, pivmin, num_threads=1):
    x = np.asarray(x, dtype=float)
    n = len(d)
    counts = np.zeros(x.shape, dtype=np.int64)
    if n == 0:
        return counts
    q = d[0] - x
    q[np.abs(q) < pivmin] = -pivmin
    counts += q < 0
    for i in range(1, n):
        q = (d[i] - x) - e2[i - 1] / q
        q[np.abs(q) < pivmin] = -pivmin
        counts += q < 0
    return counts


def bisect(d, e2, idx, lo, hi, tol, pivmin, num_threads=1):
    idx = np.asarray(idx, dtype=np.int64)
    a = np.full(idx.shape, lo, dtype=float)
    b = np.full(idx.shape, hi, dtype=float)
    active = np.ones(idx.shape, dtype=bool)
    while active.any():
        mid = 0.5 * (a + b)
        stuck = (mid <= a) | (mid >= b)
        active &= ~stuck & (b - a > tol)
        if not active.any():
            break
        sel = np.flatnonzero(active)
        above = sturm_count(d, e2, mid[sel], pivmin) > idx[sel]
        b[sel[above]] = mid[sel[above]]
        a[sel[~above]] = mid[sel[~above]]
    return 0.5 * (a + b)


def shifted_solve(d, e, shifts, rhs, pivtiny):
    # Same elimination as the compiled kernel, vectorised over the shifts.
    shifts = np.asarray(shifts, dtype=float)
    b = np.array(rhs, dtype=float, copy=True).T.copy()  # (n, m)
    n = len(d)
    m = len(shifts)
    dd = d[:, None] - shifts[None, :]
    du = np.repeat(np.asarray(e, dtype=float)[:, None], m, axis=1) if n > 1 else np.zeros((0, m))
    dl = du.copy()
    du2 = np.zeros_like(du)
    for i in range(n - 1):
        keep = np.abs(dd[i]) >= np.abs(dl[i])
        swap = ~keep
        zero = keep & (dd[i] == 0.0)
        dd[i, zero] = pivtiny
        if keep.any():
            k = keep
            fact = dl[i, k] / dd[i, k]
            dd[i + 1, k] -= fact * du[i, k]
            b[i + 1, k] -= fact * b[i, k]
        if swap.any():
            s = swap
            fact = dd[i, s] / dl[i, s]
            dd[i, s] = dl[i, s]
            temp = dd[i + 1, s].copy()
            dd[i + 1, s] = du[i, s] - fact * temp
            if i < n - 2:
                du2[i, s] = du[i + 1, s]
                du[i + 1, s] = -fact * du2[i, s]
            du[i, s] = temp
            temp = b[i, s].copy()
            b[i, s] = b[i + 1, s]
            b[i + 1, s] = temp - fact * b[i + 1, s]
    dd[dd == 0.0] = pivtiny
    b[n - 1] /= dd[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]
    return b.T.copy()


def ql_implicit(d, e, zt, maxit=50):
    n = len(d)
    eps = np.finfo(float).eps
    floor = eps * max(abs(d[i]) + (abs(e[i]) if i < n - 1 else 0.0) for i in range(n))
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd or abs(e[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            if it == maxit:
                return l + 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
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
                if zt is not None:
                    zi = zt[i].copy()
                    zt[i] = c * zi - s * zt[i + 1]
                    zt[i + 1] = s * zi + c * zt[i + 1]
                i -= 1
            if r == 0.0 and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def householder(a, want_q):
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    diag = np.zeros(n)
    off = np.zeros(max(n - 1, 0))
    vs = []
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = x[0]
        xnorm = np.linalg.norm(x[1:])
        if xnorm == 0.0:
            tau, beta = 0.0, alpha
            v = np.zeros_like(x)
            v[0] = 1.0
        else:
            beta = -math.copysign(math.hypot(alpha, xnorm), alpha)
            tau = (beta - alpha) / beta
            v = x / (alpha - beta)
            v[0] = 1.0
        diag[k] = a[k, k]
        off[k] = beta
        vs.append((tau, v))
        if tau != 0.0:
            a22 = a[k + 1:, k + 1:]
            p = tau * (a22 @ v)
            w = p - 0.5 * tau * (p @ v) * v
            a22 -= np.outer(v, w) + np.outer(w, v)
    if n >= 2:
        diag[n - 2] = a[n - 2, n - 2]
        off[n - 2] = a[n - 1, n - 2]
    if n >= 1:
        diag[n - 1] = a[n - 1, n - 1]
    if not want_q:
        return diag, off, None
    q = np.eye(n)
    for k in range(n - 3, -1, -1):
        tau, v = vs[k]
        if tau == 0.0:
            continue
        sub = q[k + 1:, k + 1:]
        sub -= tau * np.outer(v, v @ sub)
    return diag, off, np.asfortranarray(q)
