import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import specx.eig as eig
from specx.eig import _fallback
from specx.errors import DimensionMismatch, NonSymmetricInput


def tri_dense(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def random_tridiag(rng, n):
    return rng.standard_normal(n), rng.standard_normal(n - 1)


# -- tridiagonal ----------------------------------------------------------

def test_tridiag_closed_form_n3():
    lam = eig.tridiag_eigen(np.zeros(3), np.ones(2)).eigenvalues
    np.testing.assert_allclose(lam, [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-13)
    # roots of the characteristic polynomial lambda^3 - 2 lambda
    np.testing.assert_allclose(lam ** 3 - 2 * lam, 0, atol=1e-12)


def test_tridiag_free_chain_closed_form():
    n = 200
    lam = eig.tridiag_eigen(np.zeros(n), np.ones(n - 1)).eigenvalues
    exact = np.sort(2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    assert np.max(np.abs(lam - exact)) <= 1e-11 * 2


def test_tridiag_identity_and_trace():
    assert np.all(eig.tridiag_eigen(np.ones(5), np.zeros(4)).eigenvalues == 1.0)
    lam = eig.tridiag_eigen([0.0, -3.0, 0.0], [1.0, 1.0]).eigenvalues
    assert abs(lam.sum() + 3.0) < 1e-12


def test_tridiag_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        eig.tridiag_eigen(np.zeros(4), np.ones(4))


def test_tridiag_against_lapack(rng):
    for n in (1, 2, 7, 64, 200):
        d, e = random_tridiag(rng, n) if n > 1 else (rng.standard_normal(1), np.zeros(0))
        lam = eig.tridiag_eigen(d, e).eigenvalues
        ref = np.linalg.eigvalsh(tri_dense(d, e))
        assert np.all(np.diff(lam) >= 0)
        assert np.max(np.abs(lam - ref)) <= 1e-11 * max(1.0, np.abs(ref).max())


def test_tridiag_vectors_residual_and_orthogonality(rng):
    d, e = random_tridiag(rng, 150)
    res = eig.tridiag_eigen(d, e, want_vectors=True)
    m = tri_dense(d, e)
    norm = np.abs(np.linalg.eigvalsh(m)).max()
    r = m @ res.eigenvectors - res.eigenvectors * res.eigenvalues
    assert np.linalg.norm(r, axis=0).max() <= 1e-10 * norm
    v = res.eigenvectors
    assert np.abs(v.T @ v - np.eye(150)).max() <= 1e-8


def test_tridiag_vectors_degenerate_blocks():
    # decoupled identical blocks give exactly repeated eigenvalues
    d = np.zeros(10)
    e = np.array([1, 1, 1, 1, 0, 1, 1, 1, 1], dtype=float)
    res = eig.tridiag_eigen(d, e, want_vectors=True)
    v = res.eigenvectors
    assert np.abs(v.T @ v - np.eye(10)).max() <= 1e-8
    assert np.abs(tri_dense(d, e) @ v - v * res.eigenvalues).max() <= 1e-10


@given(st.integers(3, 60), st.integers(0, 10**6))
def test_cauchy_interlacing(n, seed):
    rng = np.random.default_rng(seed)
    d, e = random_tridiag(rng, n)
    big = eig.tridiag_eigen(d, e).eigenvalues
    small = eig.tridiag_eigen(d[:-1], e[:-1]).eigenvalues
    slack = 1e-10
    assert np.all(big[:-1] <= small + slack)
    assert np.all(small <= big[1:] + slack)


@given(st.integers(2, 80), st.integers(0, 10**6))
def test_trace_identities(n, seed):
    rng = np.random.default_rng(seed)
    d, e = random_tridiag(rng, n)
    lam = eig.tridiag_eigen(d, e).eigenvalues
    assert abs(lam.sum() - d.sum()) <= 1e-9 * max(1.0, np.abs(d).sum())
    tr2 = np.sum(d ** 2) + 2 * np.sum(e ** 2)
    assert abs(np.sum(lam ** 2) - tr2) <= 1e-9 * max(1.0, tr2)


def test_sturm_count_matches_eigenvalues(rng):
    d, e = random_tridiag(rng, 300)
    lam = np.linalg.eigvalsh(tri_dense(d, e))
    x = np.linspace(lam[0] - 1, lam[-1] + 1, 97)
    counts = eig.sturm_count(d, e, x)
    assert np.array_equal(counts, np.searchsorted(lam, x))


def test_eigenvalues_by_index_subset(rng):
    d, e = random_tridiag(rng, 500)
    ref = np.linalg.eigvalsh(tri_dense(d, e))
    idx = np.array([0, 17, 250, 499])
    np.testing.assert_allclose(eig.eigenvalues_by_index(d, e, idx), ref[idx], atol=1e-11 * 5)


def test_gershgorin_encloses(rng):
    d, e = random_tridiag(rng, 50)
    lo, hi = eig.gershgorin_bounds(d, e)
    lam = np.linalg.eigvalsh(tri_dense(d, e))
    assert lo <= lam[0] and lam[-1] <= hi


# -- dense ------------------------------------------------------------------

def test_dense_small_cases():
    np.testing.assert_allclose(eig.dense_sym_eigen([[0.0, 1.0], [1.0, 0.0]]).eigenvalues, [-1, 1],
                               atol=1e-14)
    np.testing.assert_allclose(eig.dense_sym_eigen(np.diag([5.0, 2.0, 9.0])).eigenvalues, [2, 5, 9])


@pytest.mark.parametrize("method", ["ql", "bisect", "auto"])
def test_dense_random_trace_and_vectors(rng, method):
    a = rng.standard_normal((50, 50))
    a = a + a.T
    res = eig.dense_sym_eigen(a, want_vectors=True, method=method)
    assert abs(res.eigenvalues.sum() - np.trace(a)) <= 1e-9
    np.testing.assert_allclose(res.eigenvalues, np.linalg.eigvalsh(a), atol=1e-10)
    v = res.eigenvectors
    assert np.abs(v.T @ v - np.eye(50)).max() <= 1e-8
    norm = np.abs(res.eigenvalues).max()
    assert np.linalg.norm(a @ v - v * res.eigenvalues, axis=0).max() <= 1e-10 * norm


def test_dense_agrees_with_tridiag(rng):
    for n in (5, 60, 200):
        d, e = random_tridiag(rng, n)
        a = eig.tridiag_eigen(d, e).eigenvalues
        b = eig.dense_sym_eigen(tri_dense(d, e)).eigenvalues
        assert np.max(np.abs(a - b)) <= 1e-9


def test_dense_hermitian_embedding(rng):
    a = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
    h = a + a.conj().T
    res = eig.dense_sym_eigen(h, want_vectors=True)
    np.testing.assert_allclose(res.eigenvalues, np.linalg.eigvalsh(h), atol=1e-10)
    v = res.eigenvectors
    assert np.abs(v.conj().T @ v - np.eye(30)).max() <= 1e-8
    assert np.abs(h @ v - v * res.eigenvalues).max() <= 1e-9


def test_dense_rank_deficient():
    # low-rank Gram matrices leave long runs of zero diagonal after reduction
    rng = np.random.default_rng(3)
    b = rng.standard_normal((128, 3))
    g = b @ b.T
    lam = eig.dense_sym_eigen(g).eigenvalues
    np.testing.assert_allclose(lam, np.linalg.eigvalsh(g), atol=1e-10 * np.abs(lam).max())


def test_dense_rejects_nonsymmetric():
    with pytest.raises(NonSymmetricInput):
        eig.dense_sym_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


# -- operator norm ----------------------------------------------------------

def test_operator_norm_examples():
    assert eig.operator_norm(np.eye(6, k=-1)) == 1.0
    assert eig.operator_norm(np.zeros((4, 4))) == 0.0
    assert abs(eig.operator_norm(2 * np.array([[0.0, 1.0], [1.0, 0.0]])) - 2.0) < 1e-12


def test_operator_norm_against_svd(rng):
    for shape in ((10, 10), (40, 25), (64, 64)):
        m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        assert abs(eig.operator_norm(m) - np.linalg.norm(m, 2)) <= 1e-8 * np.linalg.norm(m, 2)


def test_operator_norm_clustered_singular_values():
    # two equal top singular values stall plain power iteration
    u = np.linalg.qr(np.random.default_rng(1).standard_normal((80, 80)))[0]
    s = np.ones(80) * 0.5
    s[:2] = 1.0
    m = u @ np.diag(s) @ u[::-1].T
    assert abs(eig.operator_norm(m) - 1.0) <= 1e-8


# -- compiled kernels vs fallback --------------------------------------------

needs_compiled = pytest.mark.skipif(eig.BACKEND != "compiled", reason="extension not built")


@needs_compiled
def test_kernel_fallback_sturm_and_bisect(rng):
    d, e = random_tridiag(rng, 1000)
    e2 = e ** 2
    x = np.linspace(-5, 5, 333)
    piv = eig._pivmin(e)
    assert np.array_equal(eig.kernels.sturm_count(d, e2, x, piv, 1),
                          _fallback.sturm_count(d, e2, x, piv, 1))
    lo, hi = eig.gershgorin_bounds(d, e)
    idx = np.arange(0, 1000, 7, dtype=np.int64)
    a = eig.kernels.bisect(d, e2, idx, lo, hi, 1e-13, piv, 1)
    b = _fallback.bisect(d, e2, idx, lo, hi, 1e-13, piv, 1)
    assert np.max(np.abs(a - b)) <= 1e-11


@needs_compiled
def test_kernel_fallback_full_pipeline(rng, fallback_backend):
    d, e = random_tridiag(rng, 120)
    a = rng.standard_normal((40, 40))
    a = a + a.T
    slow_tri = eig.tridiag_eigen(d, e, want_vectors=True)
    slow_dense = eig.dense_sym_eigen(a, want_vectors=True)
    assert eig.kernels is _fallback
    ref_tri = np.linalg.eigvalsh(tri_dense(d, e))
    assert np.max(np.abs(slow_tri.eigenvalues - ref_tri)) <= 1e-10
    assert np.max(np.abs(slow_dense.eigenvalues - np.linalg.eigvalsh(a))) <= 1e-10
    v = slow_dense.eigenvectors
    assert np.abs(v.T @ v - np.eye(40)).max() <= 1e-8


@needs_compiled
def test_kernel_fallback_same_results(rng):
    from specx.eig import _kernels

    a = rng.standard_normal((30, 30))
    a = a + a.T
    out = []
    for k in (_kernels, _fallback):
        w = np.asfortranarray(a.copy())
        d, e, q = k.householder(w, True)
        dd, ee = np.ascontiguousarray(d.copy()), np.zeros(30)
        ee[:29] = e
        assert k.ql_implicit(dd, ee, None, 50) == 0
        out.append(np.sort(dd))
    assert np.max(np.abs(out[0] - out[1])) <= 1e-12


def test_backend_flag():
    assert eig.BACKEND in ("compiled", "fallback")
