import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specx.errors import EmptyOperand
from specx.spectral_sets import (SpectralSet, closure_union, default_merge_gaps, from_samples,
                                 hausdorff, minkowski_sum, one_sided_hausdorff, union)

S13 = math.sqrt(13)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def spectral_sets(draw, min_size=1):
    n_iv = draw(st.integers(0, 3))
    n_pt = draw(st.integers(0 if n_iv else max(min_size, 1), 3))
    ivs = []
    for _ in range(n_iv):
        a = draw(finite)
        w = draw(st.floats(0, 10))
        ivs.append((a, a + w))
    pts = [draw(finite) for _ in range(n_pt)]
    return SpectralSet(ivs, pts)


def brute_one_sided(s, t, grid=2001):
    """Sampled oracle for sup_{x in s} d(x, t)."""
    xs = []
    for a, b in s.intervals:
        xs.append(np.linspace(a, b, grid))
    xs.append(np.array(s.points))
    x = np.concatenate(xs)
    return float(t.distance_to(x).max())


# -- canonical form ---------------------------------------------------------------

def test_canonical_form():
    s = SpectralSet([(3, 4), (0, 1), (1, 2), (5, 5)], [0.5, 7, 7, 4])
    assert s.intervals == ((0.0, 2.0), (3.0, 4.0))
    assert s.points == (5.0, 7.0)
    assert SpectralSet(s.intervals, s.points) == s


def test_from_samples_examples():
    s = from_samples([1.0, 1.01, 1.02, 5.0], 0.1)
    assert s.intervals == ((1.0, 1.02),) and s.points == (5.0,)
    assert from_samples([], 0.1).is_empty
    assert from_samples([0, 0.5, 1.0], 0.6).intervals == ((0.0, 1.0),)


def test_default_merge_gap_is_local():
    # dense band on [0, 1] with spacing 1e-3 and a separate band on [3, 4]
    v = np.concatenate([np.linspace(0, 1, 1001), np.linspace(3, 4, 1001)])
    s = from_samples(v)
    assert s.intervals == ((0.0, 1.0), (3.0, 4.0)) and not s.points
    gaps = default_merge_gaps(v)
    assert gaps.shape == (len(v) - 1,)
    np.testing.assert_allclose(gaps[:5], 4e-3, rtol=1e-9)
    # an outlier 0.03 beyond a band with spacing 1e-3 stays isolated
    s2 = from_samples(np.append(np.linspace(0, 1, 1001), 1.03))
    assert s2.points == (1.03,)


def test_union_examples():
    u = union(SpectralSet.interval(-2, 2), SpectralSet.point(-S13))
    assert len(u.components()) == 2
    assert union(SpectralSet.interval(0, 1), SpectralSet.interval(1, 2)).intervals == ((0.0, 2.0),)
    s = SpectralSet([(0, 1)], [3])
    assert union(s, s) == s


def test_closure_union_absorbs_limit_points():
    parts = [SpectralSet.interval(0, 1), SpectralSet.point(1 + 1e-13), SpectralSet.point(2.0)]
    c = closure_union(parts)
    assert c.intervals == ((0.0, 1.0 + 1e-13),) or c.intervals == ((0.0, 1.0),)
    assert c.points == (2.0,)


def test_minkowski_examples():
    assert (SpectralSet.interval(-2, 2) + SpectralSet.interval(-2, 2)).intervals == ((-4.0, 4.0),)
    m = minkowski_sum(SpectralSet.point(-S13), SpectralSet.interval(-2, 2))
    assert m.intervals == ((-S13 - 2, -S13 + 2),)
    s = SpectralSet([(-2, 2)], [5])
    assert minkowski_sum(s, SpectralSet.point(0.0)) == s
    with pytest.raises(EmptyOperand):
        minkowski_sum(SpectralSet(), s)


def test_hausdorff_examples():
    a = SpectralSet.interval(0, 1)
    assert hausdorff(a, SpectralSet([(0, 1)], [2])) == 1.0
    assert hausdorff(a, a) == 0.0
    assert one_sided_hausdorff(a, SpectralSet.interval(0, 3)) == 0.0
    assert one_sided_hausdorff(SpectralSet.interval(0, 3), a) == 2.0
    with pytest.raises(EmptyOperand):
        hausdorff(SpectralSet(), a)


def test_json_round_trip_exact(rng):
    for _ in range(50):
        ivs = [tuple(sorted(rng.standard_normal(2) * 10)) for _ in range(3)]
        s = SpectralSet(ivs, list(rng.standard_normal(3) * 20))
        t = SpectralSet.from_json(s.to_json())
        assert t == s
        assert json.loads(s.to_json()) == {"intervals": [list(iv) for iv in s.intervals],
                                          "points": list(s.points)}


# -- properties -----------------------------------------------------------------------

@given(spectral_sets())
def test_canonicalization_idempotent(s):
    assert SpectralSet(s.intervals, s.points) == s
    ivs = s.intervals
    assert all(b[0] - a[1] > 0 for a, b in zip(ivs, ivs[1:]))
    for p in s.points:
        assert all(not (lo <= p <= hi) for lo, hi in ivs)


@given(spectral_sets(), spectral_sets(), spectral_sets())
def test_union_commutative_associative(a, b, c):
    assert union(a, b) == union(b, a)
    assert union(union(a, b), c) == union(a, union(b, c))


@given(spectral_sets(), spectral_sets(), spectral_sets())
def test_hausdorff_metric_axioms(a, b, c):
    dab, dba = hausdorff(a, b), hausdorff(b, a)
    assert dab == dba
    assert hausdorff(a, a) == 0.0
    assert dab >= 0.0
    assert hausdorff(a, c) <= dab + hausdorff(b, c) + 1e-12
    if dab == 0.0:
        assert a == b


@given(spectral_sets(), spectral_sets())
def test_one_sided_against_sampling(a, b):
    d = one_sided_hausdorff(a, b)
    sampled = brute_one_sided(a, b)
    # sampling can only underestimate, by at most half a grid step per interval
    step = max([hi - lo for lo, hi in a.intervals] + [0.0]) / 2000
    assert sampled <= d + 1e-12
    assert d <= sampled + step + 1e-12


@given(spectral_sets(), spectral_sets(), spectral_sets())
def test_minkowski_commutative_associative(a, b, c):
    assert minkowski_sum(a, b) == minkowski_sum(b, a)
    lhs, rhs = minkowski_sum(minkowski_sum(a, b), c), minkowski_sum(a, minkowski_sum(b, c))
    assert hausdorff(lhs, rhs) <= 1e-12


@given(spectral_sets(), st.floats(-10, 10))
def test_shift_moves_at_most_c(a, c):
    assert hausdorff(a, a.shift(c)) <= abs(c) + 1e-12
    b = a.shift(c)
    assert abs((b.bounds[0] - a.bounds[0]) - c) <= 1e-12
