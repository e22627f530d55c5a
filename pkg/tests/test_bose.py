import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgdelta import _rspdm_py, bose, observables
from tgdelta.grid import SpatialGrid
from tgdelta.spectrum import TrapConfig, build_spectrum

_SP = {}


def spectrum_for(kappa, n):
    if (kappa, n) not in _SP:
        _SP[kappa, n] = build_spectrum(TrapConfig(kappa, n))
    return _SP[kappa, n]


def test_kernel_name_is_known():
    assert bose.kernel_name() in ("cython", "numpy")


def test_compiled_kernel_matches_fallback():
    try:
        from tgdelta import _rspdm_ext
    except ImportError:
        pytest.skip("compiled kernel not built")
    sp = spectrum_for(4.0, 5)
    ov = bose.cumulative_overlaps(sp)
    psi_t = np.ascontiguousarray(sp.samples.T)
    a, fa = _rspdm_ext.rspdm_upper(psi_t, ov.tensor, bose.DET_FLOOR)
    b, fb = _rspdm_py.rspdm_upper(psi_t, ov.tensor, bose.DET_FLOOR)
    np.testing.assert_array_equal(np.asarray(fa, bool), np.asarray(fb, bool))
    ok = ~np.asarray(fa, bool)
    np.testing.assert_allclose(np.asarray(a)[ok], np.asarray(b)[ok], rtol=1e-12, atol=1e-14)


def test_single_particle_is_pure_state():
    sp = spectrum_for(2.0, 1)
    rho = bose.bose_rspdm(sp)
    psi = sp.samples[0]
    np.testing.assert_allclose(rho.entries, np.outer(psi, psi), atol=1e-14)


@pytest.mark.parametrize("kappa", [0.0, 3.0])
def test_boson_matrix_invariants(kappa):
    sp = spectrum_for(kappa, 6)
    rho = bose.bose_rspdm(sp)
    e = rho.entries
    np.testing.assert_allclose(e, e.T, atol=1e-14)
    # even potential: rho(x, y) = rho(-x, -y)
    np.testing.assert_allclose(e, e[::-1, ::-1], atol=1e-10)
    np.testing.assert_allclose(rho.diagonal, observables.density(sp).values, atol=1e-12)
    assert rho.trace == pytest.approx(6, abs=1e-8)
    d = np.sqrt(np.outer(rho.diagonal, rho.diagonal))
    assert np.all(np.abs(e) <= d + 1e-10)


def test_boson_matrix_differs_from_fermion_off_diagonal():
    sp = spectrum_for(0.0, 4)
    b = bose.bose_rspdm(sp).entries
    f = observables.fermi_rspdm(sp).entries
    assert np.max(np.abs(b - f)) > 0.1


def test_two_particle_value_against_direct_formula():
    # N = 2: P is 2 x 2 and rho = psi(b)^T adj(P)^T psi(a) can be written out by hand
    sp = spectrum_for(1.5, 2)
    ov = bose.cumulative_overlaps(sp)
    rho = bose.bose_rspdm(sp, ov).entries
    a, b = 300, 700
    p = np.eye(2) - 2 * (ov.tensor[b] - ov.tensor[a])
    adj_t = np.array([[p[1, 1], -p[1, 0]], [-p[0, 1], p[0, 0]]])
    psi = sp.samples
    assert rho[a, b] == pytest.approx(psi[:, a] @ adj_t @ psi[:, b], abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_adjugate_matches_inverse_when_regular(n, seed):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(n, n)) + n * np.eye(n)
    ref = np.linalg.det(p) * np.linalg.inv(p).T
    np.testing.assert_allclose(bose.adjugate_transpose(p), ref, rtol=1e-9, atol=1e-9)


def test_adjugate_of_singular_matrix():
    p = np.array([[1.0, 2.0], [2.0, 4.0]])
    np.testing.assert_allclose(bose.adjugate_transpose(p), [[4.0, -2.0], [-2.0, 1.0]], atol=1e-12)


def test_natural_orbitals_reconstruct_and_have_parity():
    sp = spectrum_for(6.0, 5)
    rho = bose.bose_rspdm(sp)
    dec = bose.natural_orbitals(rho)
    assert np.all(np.diff(dec.occupations) <= 1e-15)
    assert dec.occupations.sum() == pytest.approx(5, abs=1e-8)
    rebuilt = (dec.orbitals.T * dec.occupations) @ dec.orbitals
    np.testing.assert_allclose(rebuilt, rho.entries, atol=1e-9)
    for phi, par in zip(dec.orbitals[:10], dec.parities[:10]):
        np.testing.assert_allclose(phi[::-1], par * phi, atol=1e-12)
    w = sp.grid.weights
    gram = (dec.orbitals[:10] * w) @ dec.orbitals[:10].T
    np.testing.assert_allclose(gram, np.eye(10), atol=1e-10)
    assert dec.parities[0] == 1
    assert 0 < bose.occupation_fraction(dec) <= 1


def test_reported_occupations_clamp_noise():
    dec = bose.natural_orbitals(bose.bose_rspdm(spectrum_for(0.0, 3)))
    rep = dec.reported_occupations
    assert np.all(rep >= 0)
    assert np.count_nonzero(rep) < len(rep)


def test_known_zero_kappa_coherence():
    # large-N asymptote of the condensate occupation in a harmonic trap
    dec = bose.natural_orbitals(bose.bose_rspdm(spectrum_for(0.0, 20)))
    assert dec.occupations[0] == pytest.approx(1.43 * np.sqrt(20) - 0.56, rel=0.01)


def test_caps():
    sp = spectrum_for(0.0, 3)
    with pytest.raises(ValueError):
        bose.bose_rspdm(sp, max_particles=2)
    with pytest.raises(MemoryError):
        bose.cumulative_overlaps(sp, max_entries=100)


def test_overlaps_on_other_grid():
    sp = spectrum_for(0.0, 3)
    g = SpatialGrid(sp.grid.half_width, 2 * sp.grid.n_points - 1)
    ov = bose.cumulative_overlaps(sp, g)
    np.testing.assert_allclose(ov.tensor[-1], np.eye(3), atol=1e-10)
