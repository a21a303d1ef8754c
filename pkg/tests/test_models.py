import math

import numpy as np
import pytest

import specx.band as bd
import specx.coefficients as cf
import specx.localization as lz
import specx.models as md
from specx.errors import InfeasibleSize, InvalidSpec, UnsupportedLattice
from specx.spectral_sets import SpectralSet, hausdorff, one_sided_hausdorff

S13, S29 = math.sqrt(13), math.sqrt(29)


def subset(a: SpectralSet, b: SpectralSet) -> bool:
    return (a | b) == b


def sparse(profiles):
    return md.ModelSpec("sparse_klaus", params={"profiles": profiles})


def warped(table, warp):
    return md.ModelSpec("warped_periodic", params={"table": table, "warp": warp})


def nbody(*interactions):
    return md.ModelSpec("grassmann_nbody",
                        params={"interactions": [{"axis": a, "potential": p} for a, p in interactions]})


# -- build ----------------------------------------------------------------------------------

def test_build_two_body():
    op = md.build(md.ModelSpec("two_body", params={"potential": {0: -3.0}}))
    assert op.hermitian and set(op.coeffs) == {(-1,), (0,), (1,)}
    v = op.coefficient(0)
    assert v((0,)) == -3.0 and v((1,)) == 0.0 and v((-5,)) == 0.0


def test_build_sparse_and_warped():
    v = md.build(sparse([{0: -3.0}, {0: 5.0}])).coefficient(0)
    assert isinstance(v, cf.SparseBumps) and v.ntypes == 2
    w = md.build(warped([0.0, 3.0], "sqrtshift")).coefficient(0)
    assert isinstance(w, cf.WarpedPeriodic)
    x = np.arange(-50, 51)
    assert np.array_equal(w.warp(x), x + np.floor(np.sqrt(1 + np.abs(x))).astype(np.int64))


def test_build_rejects_bad_specs():
    with pytest.raises(InvalidSpec):
        md.ModelSpec("three_body")
    with pytest.raises(InvalidSpec):
        md.ModelSpec("two_body", hopping={-1: 1.0})
    with pytest.raises(InvalidSpec):
        md.build(md.ModelSpec("slowly_oscillating", params={"expr": "tan"}))


def test_warp_defect_profile():
    # the sqrt warp keeps isolated unit slips in every shell, at a vanishing density
    prof = md.warp_defect_profile(cf.Warp("sqrtshift"), a_max=8, x_max=10**6)
    assert max(p["defect"] for p in prof) <= 2
    assert all(p["defect"] == 1 for p in prof if p["lo"] >= 64)
    x = np.arange(2**19, 2**20, dtype=np.int64)
    frac = np.mean(cf.Warp("sqrtshift").defect(8, x) != 0)
    assert frac < 0.02
    assert all(p["defect"] == 0 for p in md.warp_defect_profile(cf.Warp("identity")))
    capped = md.warp_defect_profile(cf.Warp("sqrtshift_capped"))
    assert capped[-1]["defect"] == 0 and capped[-2]["defect"] == 0


# -- Klaus ----------------------------------------------------------------------------------

@pytest.mark.parametrize("profiles, expected", [
    ([{0: -3.0}], SpectralSet([(-2.0, 2.0)], [-S13])),
    ([{0: -3.0}, {0: 5.0}], SpectralSet([(-2.0, 2.0)], [-S13, S29])),
    ([{0: 0.0}], SpectralSet.interval(-2.0, 2.0)),
])
def test_klaus_examples(profiles, expected):
    spec = sparse(profiles)
    k = md.klaus_spectrum(spec)
    assert hausdorff(k, expected) < 1e-12
    assert k == lz.essential_spectrum(md.build(spec))


def test_klaus_exclusion_sequence_is_nested_and_stabilizes():
    spec = sparse([{0: -3.0, 1: 1.0}, {0: 5.0}, {0: -1.0}])
    seq = md.klaus_exclusion_sequence(spec, depth=12)
    assert len(seq) == 13
    assert all(subset(b, a) for a, b in zip(seq, seq[1:]))
    assert seq[-1] == md.klaus_spectrum(spec)


def test_klaus_needs_sparse():
    with pytest.raises(InvalidSpec):
        md.klaus_spectrum(md.ModelSpec("two_body"))


# -- warp invariance ------------------------------------------------------------------------

def test_warp_identity_is_exact():
    r = md.warp_invariance(warped([0.0, 3.0], "identity"))
    assert r.distance == 0.0
    assert hausdorff(r.bloch, SpectralSet([(-1.0, 0.0), (3.0, 4.0)])) < 1e-12


def test_warp_capped_matches_bloch():
    r = md.warp_invariance(warped([0.0, 3.0], "sqrtshift_capped"))
    assert r.distance < 1e-9


@pytest.mark.parametrize("warp", ["identity", "sqrtshift", "sqrtshift_capped"])
@pytest.mark.parametrize("c", [0.0, 1.5, -2.0])
def test_constant_table_is_warp_immune(warp, c):
    r = md.warp_invariance(warped([c, c], warp))
    assert r.distance < 1e-12
    assert hausdorff(r.assembled, SpectralSet.interval(c - 2, c + 2)) < 1e-12


def test_sqrtshift_bands_contained_in_assembled():
    # the bands always appear; the slip directions contribute the domain-wall states on top
    r = md.warp_invariance(warped([0.0, 3.0], "sqrtshift"))
    assert one_sided_hausdorff(r.bloch, r.assembled) < 1e-9
    extra = [p for p in r.assembled.points if r.bloch.distance_to(p) > 1e-9]
    assert np.allclose(sorted(extra), [1.5 + math.sqrt(13) / 2 - 1, 1.5 + math.sqrt(13) / 2 + 1])


# -- HVZ ------------------------------------------------------------------------------------

def test_hvz_examples():
    both = md.hvz_spectrum(nbody((0, {0: -3.0}), (1, {0: -3.0})))
    assert hausdorff(both, SpectralSet.interval(-S13 - 2, 4.0)) < 1e-9
    assert md.hvz_spectrum(nbody()) == SpectralSet.interval(-4.0, 4.0)
    one = md.hvz_spectrum(nbody((0, {0: -3.0})))
    assert hausdorff(one, SpectralSet.interval(-S13 - 2, 4.0)) < 1e-9


def test_hvz_axis_swap_invariance():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = {int(k): float(v) for k, v in zip(rng.integers(-3, 4, 2), 4 * rng.standard_normal(2))}
        q = {int(k): float(v) for k, v in zip(rng.integers(-3, 4, 2), 4 * rng.standard_normal(2))}
        assert md.hvz_spectrum(nbody((0, p), (1, q))) == md.hvz_spectrum(nbody((1, p), (0, q)))


def test_hvz_rejects_other_lattices():
    with pytest.raises(UnsupportedLattice):
        md.hvz_spectrum(md.ModelSpec("two_body"))
    with pytest.raises(UnsupportedLattice):
        md.hvz_spectrum(nbody((2, {0: -1.0})))


# -- finite-section oracle ------------------------------------------------------------------

def test_oracle_free_band_closed_form():
    r = md.finite_section_oracle(md.build(md.ModelSpec("two_body")), 1000)
    j = np.arange(1, 1001)
    exact = 2 * np.cos(j * np.pi / 1001)
    assert r.removed == 0 and r.retained + r.removed == r.total == 1000
    assert np.max(np.abs(np.sort(r.cloud) - np.sort(exact))) < 1e-10
    assert hausdorff(r.spectrum, SpectralSet.interval(-2.0, 2.0)) < 0.01


def test_oracle_two_body_bound_state():
    r = md.finite_section_oracle(md.build(md.ModelSpec("two_body", params={"potential": {0: -3.0}})), 4000)
    below = r.cloud[r.cloud < -2]
    assert len(below) == 1 and abs(below[0] + S13) < 1e-6
    ess = md.finite_section_oracle(md.build(md.ModelSpec("two_body", params={"potential": {0: -3.0}})),
                                   4000, md.OracleConfig(essential_only=True))
    assert ess.bound_removed == 1 and np.all(ess.cloud >= -2)


def test_oracle_size_consistency():
    op = md.build(md.ModelSpec("two_body", params={"potential": {0: -3.0, 2: 1.5}}))
    a, b = bd.truncate(op, ((-50,), (49,))), bd.truncate(op, ((-100,), (99,)))
    assert np.array_equal(a.diag, b.diag[50:150]) and np.array_equal(a.offdiag, b.offdiag[50:149])
    ra, rb = md.finite_section_oracle(op, 100), md.finite_section_oracle(op, 200)
    assert hausdorff(ra.spectrum, rb.spectrum) < 0.05


def test_oracle_boundary_filter_on_gapped_model():
    # Dirichlet walls of a period-3 potential create gap states; the filter removes exactly those
    op = md.unwarped_operator(warped([0.0, 3.0, 1.0], "identity"))
    bands = md.ls.bloch_spectrum(md.ls.lift_period(op))
    for N in (300, 301, 302):
        r = md.finite_section_oracle(op, N)
        assert r.boundary_removed == 2 and r.retained + r.removed == r.total
        assert np.all(bands.distance_to(np.array(r.removed_values)) > 1e-3)
        assert np.max(bands.distance_to(r.cloud)) < 1e-9


def test_oracle_infeasible_sizes():
    with pytest.raises(InfeasibleSize):
        md.finite_section_oracle(md.build(md.ModelSpec("two_body")), 2 * 10**6)
    with pytest.raises(InfeasibleSize):
        md.finite_section_oracle(md.build(nbody()), 71)
    with pytest.raises(InfeasibleSize):
        md.finite_section_oracle(md.build(md.ModelSpec("two_body")), 1)
