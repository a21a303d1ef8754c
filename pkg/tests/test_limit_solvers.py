import math
import warnings

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

import specx.band as bd
import specx.coefficients as cf
import specx.limit_solvers as ls
from specx.errors import ClassUnsupported, EmptyOperand, NonHermitianSymbol
from specx.spectral_sets import SpectralSet, hausdorff

S13, S29 = math.sqrt(13), math.sqrt(29)


def sym(**c):
    offs = {int(k[1:]) if k[0] == "p" else -int(k[1:]): v for k, v in c.items()}
    return ls.SymbolFunction(tuple((a,) for a in offs), tuple(offs.values()))


def hop_with(v):
    return bd.add(bd.hopping(), bd.potential(v))


# -- Laurent ------------------------------------------------------------------------

def test_laurent_cosine():
    s = ls.laurent_spectrum(ls.SymbolFunction.from_operator(bd.hopping()))
    assert s.intervals == ((-2.0, 2.0),)


def test_laurent_two_harmonics_against_dense_grid():
    s = ls.laurent_spectrum(sym(p1=1.0, m1=1.0, p2=1.0, m2=1.0))
    k = np.linspace(0, 2 * np.pi, 10**6, endpoint=False)
    h = 2 * np.cos(k) + 2 * np.cos(2 * k)
    (lo, hi), = s.intervals
    assert abs(lo - h.min()) < 1e-9 and abs(hi - h.max()) < 1e-9
    # stationary point: cos k = -1/4 gives -2.25 exactly
    assert abs(lo + 2.25) < 1e-10 and abs(hi - 4.0) < 1e-12


def test_laurent_2d_separable():
    s = ls.laurent_spectrum(ls.SymbolFunction.from_operator(bd.hopping(2)))
    assert hausdorff(s, SpectralSet.interval(-4, 4)) < 1e-10


def test_laurent_shift_exact():
    base = sym(p1=1.0, m1=1.0, p2=0.3, m2=0.3)
    a = ls.laurent_spectrum(base)
    for c in (-2.5, 0.75, 3.0):
        b = ls.laurent_spectrum(base.shifted(c))
        assert b == a.shift(c)


def test_laurent_rejects_non_hermitian():
    with pytest.raises(NonHermitianSymbol):
        ls.laurent_spectrum(sym(p1=1.0, m1=0.5))


# -- Bloch --------------------------------------------------------------------------

def test_bloch_period_two_closed_form():
    op = ls.lift_period(hop_with(cf.Periodic((2,), [0.0, 3.0])))
    s = ls.bloch_spectrum(op)
    assert hausdorff(s, SpectralSet([(-1, 0), (3, 4)])) < 1e-9
    # closed-form bands c/2 +- sqrt(c^2/4 + 2 + 2 cos 2k), c = 3
    k = np.linspace(0, np.pi, 200001)
    r = np.sqrt(2.25 + 2 + 2 * np.cos(2 * k))
    lower, upper = 1.5 - r, 1.5 + r
    assert abs(s.intervals[0][0] - lower.min()) < 1e-9 and abs(s.intervals[0][1] - lower.max()) < 1e-9
    assert abs(s.intervals[1][0] - upper.min()) < 1e-9 and abs(s.intervals[1][1] - upper.max()) < 1e-9


def test_bloch_against_truncation():
    n = 20000
    x = np.arange(n)
    d, e = np.where(x % 2, 3.0, 0.0), np.ones(n - 1)
    # the band edges are the extreme eigenvalues and the pair around index n/2
    edges = [eigvalsh_tridiagonal(d, e, select="i", select_range=(i, i))[0]
             for i in (0, n // 2 - 1, n // 2, n - 1)]
    s = ls.bloch_spectrum(ls.lift_period(hop_with(cf.Periodic((2,), [0.0, 3.0]))))
    want = [s.intervals[0][0], s.intervals[0][1], s.intervals[1][0], s.intervals[1][1]]
    assert np.max(np.abs(np.array(edges) - want)) < 1e-3


def test_bloch_trivial_and_constant_tables():
    for per in (1, 3):
        op = ls.lift_period(hop_with(cf.Periodic((per,), np.zeros(per))) if per > 1 else bd.hopping())
        assert hausdorff(ls.bloch_spectrum(op), SpectralSet.interval(-2, 2)) < 1e-9
    c = 1.7
    s = ls.bloch_spectrum(ls.lift_period(hop_with(cf.Periodic((2,), [c, c]))))
    assert hausdorff(s, SpectralSet.interval(c - 2, c + 2)) < 1e-9


def test_bloch_trivial_period_matches_laurent():
    op = bd.BandOperator({1: 1.0, -1: 1.0, 2: 0.4, -2: 0.4})
    a = ls.bloch_spectrum(op)
    b = ls.laurent_spectrum(ls.SymbolFunction.from_operator(op))
    assert hausdorff(a, b) <= 1e-9


def test_bloch_family_hermitian():
    fam = ls.BlochFamily(ls.lift_period(hop_with(cf.Periodic((3,), [0.0, 1.0, -2.0]))))
    for k in np.linspace(0, 2 * np.pi, 13):
        m = fam.matrix(k)
        assert np.allclose(m, m.conj().T, atol=0)


# -- two-body -----------------------------------------------------------------------

@pytest.mark.parametrize("lam,expect", [(-3.0, -S13), (5.0, S29)])
def test_two_body_single_site(lam, expect):
    s = ls.two_body_spectrum(hop_with(cf.single_site(lam)))
    assert s.intervals == ((-2.0, 2.0),)
    assert len(s.points) == 1 and abs(s.points[0] - expect) < 1e-10


def test_two_body_zero_perturbation():
    assert ls.two_body_spectrum(bd.hopping()) == SpectralSet.interval(-2, 2)


def test_two_body_sign_rule(rng):
    for lam in np.concatenate([rng.uniform(-6, -0.5, 10), rng.uniform(0.5, 6, 10)]):
        s = ls.two_body_spectrum(hop_with(cf.single_site(float(lam))))
        exact = math.copysign(math.sqrt(lam * lam + 4), lam)
        assert len(s.points) == 1 and abs(s.points[0] - exact) < 1e-9
        assert (s.points[0] < -2) == (lam < 0)


def test_two_body_bound_state_localized():
    op = hop_with(cf.Decaying(0.0, {-1: -1.5, 0: -2.0, 2: 1.0}))
    res = ls.two_body_analysis(op)
    assert res.points and all(m > 0.9 for m in res.masses)
    n = res.sizes[-1]
    half = n // 2
    c = res.center[0]
    x = np.arange(c - half, c - half + n)
    d = op.coefficient(0).values(x)
    lam = eigvalsh_tridiagonal(d, np.ones(n - 1))
    for p in res.points:
        assert np.min(np.abs(lam - p)) < 1e-6


def test_two_body_translation_invariant():
    a = ls.two_body_spectrum(hop_with(cf.Decaying(0.0, {0: -3.0, 1: 2.0})))
    b = ls.two_body_spectrum(hop_with(cf.Decaying(0.0, {1000: -3.0, 1001: 2.0})))
    assert a == b


def test_two_body_weak_state_warns():
    # a tiny attractive potential binds just below the edge
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ls.two_body_spectrum(hop_with(cf.single_site(-0.05)))
    assert any(issubclass(w.category, ls.SpectrumWarning) for w in rec)


# -- interface (domain walls) -----------------------------------------------------------

def test_interface_wall_states_against_truncation():
    wall = cf.DomainWall(cf.Periodic((2,), [0.0, 3.0]), cf.Periodic((2,), [3.0, 0.0]))
    op = hop_with(wall)
    s = ls.interface_spectrum(op)
    n = 4001
    x = np.arange(-(n // 2), n // 2 + 1)
    lam = eigvalsh_tridiagonal(wall.values(x), np.ones(n - 1))
    bands = SpectralSet([(-1, 0), (3, 4)])
    assert hausdorff(SpectralSet(s.intervals), bands) < 1e-9
    for p in s.points:
        assert np.min(np.abs(lam - p)) < 1e-8
    assert s.points  # a wall between two phases binds at least one state


# -- separable sums and dispatch ---------------------------------------------------------

def test_separable_sum_examples():
    band = SpectralSet.interval(-2, 2)
    assert ls.separable_sum_spectrum([band, band]).intervals == ((-4.0, 4.0),)
    s = ls.separable_sum_spectrum([SpectralSet([(-2, 2)], [-S13]), band])
    assert s.intervals == ((-S13 - 2, 4.0),)
    assert ls.separable_sum_spectrum([s, SpectralSet.point(0.0)]) == s
    with pytest.raises(EmptyOperand):
        ls.separable_sum_spectrum([])


def test_classify():
    assert ls.classify(bd.hopping()) == ls.LAURENT
    assert ls.classify(hop_with(cf.Periodic((2,), [0, 3]))) == ls.PERIODIC
    assert ls.classify(hop_with(cf.single_site(-3.0))) == ls.TWO_BODY
    with pytest.raises(ClassUnsupported):
        ls.classify(hop_with(cf.SlowlyOscillating("sin_sqrt")))


def test_golden_section_negative_extrema():
    x, v = ls.golden_section(lambda t: -(t - 1.0) ** 2 - 3.0, 0.0, 3.0, maximize=True)
    assert abs(x - 1.0) < 1e-6 and abs(v + 3.0) < 1e-12
    x, v = ls.golden_section(lambda t: (t - 2.0) ** 2 - 5.0, 0.0, 3.0)
    assert abs(x - 2.0) < 1e-6 and abs(v + 5.0) < 1e-12
    # maximum at the interval end with a negative value
    _, v = ls.golden_section(lambda t: -t - 1.0, 0.0, 1.0, maximize=True)
    assert abs(v + 1.0) < 1e-9


@pytest.mark.parametrize("c", [-2.0, -0.7, 0.0, 2.5])
def test_bloch_constant_table_any_sign(c):
    op = hop_with(cf.Periodic((2,), [c, c]))
    assert hausdorff(ls.bloch_spectrum(op), SpectralSet.interval(c - 2, c + 2)) < 1e-9
