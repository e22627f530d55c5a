import math

import numpy as np
import pytest

from tgdelta import bose, oracle
from tgdelta.grid import SpatialGrid
from tgdelta.observables import pair_distribution
from tgdelta.spectrum import TrapConfig, build_spectrum


@pytest.fixture(scope="module")
def sp2():
    return build_spectrum(TrapConfig(0.0, 2))


def test_wavefunction_is_symmetric_and_vanishes_at_contact(sp2):
    psi = oracle.ManyBodyWavefunction(sp2)
    assert psi(np.array([0.3, -1.1])) == pytest.approx(psi(np.array([-1.1, 0.3])))
    assert psi(np.array([0.7, 0.7])) == 0.0
    assert psi.slater(np.array([0.3, -1.1])) == pytest.approx(-psi.slater(np.array([-1.1, 0.3])))


def test_wavefunction_normalized(sp2):
    g = SpatialGrid(7.0, 401)
    x1, x2 = np.meshgrid(g.points, g.points, indexing="ij")
    psi = oracle.ManyBodyWavefunction(sp2)(np.stack([x1, x2], axis=-1))
    assert g.weights @ (psi**2) @ g.weights == pytest.approx(1.0, abs=1e-9)


def test_wavefunction_limits():
    with pytest.raises(ValueError):
        oracle.ManyBodyWavefunction(build_spectrum(TrapConfig(0.0, 4)))
    with pytest.raises(ValueError):
        oracle.ManyBodyWavefunction(build_spectrum(TrapConfig(0.0, 2))).slater(np.zeros(3))


def test_pair_distribution_matches_determinant_route():
    sp = build_spectrum(TrapConfig(4.0, 2))
    for x1, x2 in [(0.1, 0.5), (-1.2, 0.8), (0.0, 2.0)]:
        assert oracle.brute_force_pair_distribution(sp, x1, x2) == pytest.approx(
            pair_distribution(sp, x1, x2), abs=1e-12)


def test_oracle_trace_and_agreement_n2(sp2):
    out = SpatialGrid(sp2.grid.half_width, 161)
    res = oracle.brute_force_rspdm(sp2, out, refine=4)
    assert res.matrix.trace == pytest.approx(2.0, abs=1e-6)
    fine = SpatialGrid(out.half_width, (out.n_points - 1) * 8 + 1)
    ours = bose.bose_rspdm(sp2, bose.cumulative_overlaps(sp2, fine)).entries[::8, ::8]
    assert np.max(np.abs(ours - res.matrix.entries)) < 1e-6
    assert np.max(res.error_estimate) < 1e-3


def test_oracle_n3_small_grid_matches():
    sp = build_spectrum(TrapConfig(1.0, 3))
    out = SpatialGrid(sp.grid.half_width, 41)
    res = oracle.brute_force_rspdm(sp, out, refine=8)
    fine = SpatialGrid(out.half_width, 40 * 32 + 1)
    ours = bose.bose_rspdm(sp, bose.cumulative_overlaps(sp, fine)).entries[::32, ::32]
    assert np.max(np.abs(ours - res.matrix.entries)) < 1e-4


def test_oracle_guards(sp2):
    g = SpatialGrid(8.0, 101)
    with pytest.raises(ValueError):
        oracle.brute_force_rspdm(sp2, g, refine=0)
    with pytest.raises(ValueError):
        oracle.brute_force_rspdm(sp2, g, max_cost=10.0)
    with pytest.raises(ValueError):
        oracle.brute_force_rspdm(build_spectrum(TrapConfig(0.0, 4)), g)
    with pytest.raises(ValueError):
        oracle.brute_force_pair_distribution(build_spectrum(TrapConfig(0.0, 3)), 0.0, 1.0)


def test_oracle_accepts_config():
    res = oracle.brute_force_rspdm(TrapConfig(0.0, 2), SpatialGrid(8.0, 41), refine=2)
    assert res.matrix.entries.shape == (41, 41)
    assert res.matrix.species == "boson"
    assert math.isfinite(float(res.error_estimate.max()))
