"""Acceptance checks, one test per criterion (or sub-claim) with a PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
repeated in the terminal summary.
"""
import math

import numpy as np
import pytest

from tgdelta import bose, dynamics, momentum, observables, oracle
from tgdelta.grid import SpatialGrid
from tgdelta.specfun import hermite_poly
from tgdelta.spectrum import TrapConfig, build_spectrum, eval_eigenstate, kappa_of_energy, solve_even_energy

_SPECTRA = {}
_DECOMP = {}


def spectrum(kappa, n):
    key = (kappa, n)
    if key not in _SPECTRA:
        _SPECTRA[key] = build_spectrum(TrapConfig(kappa, n))
    return _SPECTRA[key]


def decomposition(kappa, n):
    key = (kappa, n)
    if key not in _DECOMP:
        _DECOMP[key] = bose.natural_orbitals(bose.bose_rspdm(spectrum(kappa, n)))
    return _DECOMP[key]


def boson_momentum(kappa, n):
    sp = spectrum(kappa, n)
    grid = momentum.default_momentum_grid(sp, species="boson")
    return momentum.momentum_distribution(decomposition(kappa, n), grid)


def hermite_function(n, x):
    norm = math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return hermite_poly(n, x) * np.exp(-0.5 * x * x) / norm


def test_c01_critical_strength(verdict):
    k0 = kappa_of_energy(0.0)
    e0 = solve_even_energy(0.675978, 0)
    ok = abs(k0 - 0.675978) < 1e-5 and abs(e0) < 1e-6
    verdict(ok, f"kappa(E=0)={k0:.10f}, E0(kappa=0.675978)={e0:.3e}")


def test_c02_free_trap_reduction(verdict):
    sp = spectrum(0.0, 20)
    e_err = float(np.max(np.abs(sp.energies - (np.arange(20) + 0.5))))
    x = np.linspace(-8.0, 8.0, 1601)
    f_err = 0.0
    for state in sp.states[::2]:
        ours = eval_eigenstate(state, sp.config, x)
        ref = hermite_function(state.index, x)
        ref *= np.sign(ref[800]) * np.sign(ours[800])
        f_err = max(f_err, float(np.max(np.abs(ours - ref))))
    verdict(e_err < 1e-9 and f_err < 1e-7, f"energy err {e_err:.2e}, even-state err {f_err:.2e}")


def test_c03_deep_binding(verdict):
    e0 = solve_even_energy(20.0, 0)
    rel = abs(e0 + 200.0) / 200.0
    resid = abs(kappa_of_energy(e0) - 20.0)
    verdict(rel < 0.01 and resid < 1e-8, f"E0={e0:.8f}, rel dev {rel:.2e}, residual {resid:.2e}")


def test_c04_orthonormality(verdict):
    devs = {k: float(np.max(np.abs(spectrum(k, 20).gram() - np.eye(20)))) for k in (0.0, 5.0, 10.0, 20.0)}
    verdict(max(devs.values()) < 1e-6, ", ".join(f"kappa={k:g}: {d:.1e}" for k, d in devs.items()))


def test_c05_density(verdict):
    kappas = (0.0, 5.0, 10.0, 20.0)
    profiles = [observables.density(spectrum(k, 20)) for k in kappas]
    norm_err = max(abs(p.total - 20) for p in profiles)
    centre = [p.at(0.0) for p in profiles]
    increasing = all(b > a for a, b in zip(centre, centre[1:]))
    slope = (centre[-1] - centre[0]) / 20.0
    ok = norm_err < 1e-6 and increasing and 0.8 <= slope <= 1.2
    verdict(ok, f"norm err {norm_err:.1e}, rho(0)={np.round(centre, 4).tolist()}, slope {slope:.4f}")


@pytest.mark.slow
def test_c06_pair_distribution(verdict):
    diag, quad = 0.0, 0.0
    for kappa in (0.0, 10.0):
        for n in (2, 5, 20):
            sp = spectrum(kappa, n)
            d = observables.pair_distribution_grid(sp)
            diag = max(diag, float(np.max(np.abs(np.diagonal(d)))))
            w = sp.grid.weights
            quad = max(quad, abs(float(w @ d @ w) - n * (n - 1)) / n**2)
    sp = spectrum(10.0, 5)
    pts = np.linspace(-4.0, 4.0, 17)
    ident = max(
        abs(observables.pair_distribution(sp, a, b) - observables.pair_distribution_explicit(sp, a, b))
        for a in pts
        for b in pts
    )
    ok = diag < 1e-10 and quad < 1e-3 and ident < 1e-8
    verdict(ok, f"max|D(x,x)|={diag:.1e}, quadrature err/N^2={quad:.1e}, identity err {ident:.1e}")


@pytest.mark.slow
def test_c07_fermion_idempotency(verdict):
    sp = spectrum(10.0, 20)
    rho = observables.fermi_rspdm(sp)
    w = sp.grid.weights
    resid = float(np.max(np.abs((rho.entries * w) @ rho.entries - rho.entries)))
    lam = bose.natural_orbitals(rho).occupations
    occ_err = float(np.max(np.abs(lam[:20] - 1.0)))
    verdict(resid < 1e-6 and occ_err < 1e-6, f"idempotency residual {resid:.1e}, max|lambda_j - 1| {occ_err:.1e}")


def _oracle_gap(kappa, n, out_points, refine, bose_refine):
    sp = spectrum(kappa, n)
    half = sp.grid.half_width
    out = SpatialGrid(half, out_points)
    fine = SpatialGrid(half, (out_points - 1) * bose_refine + 1)
    ours = bose.bose_rspdm(sp, bose.cumulative_overlaps(sp, fine)).entries[::bose_refine, ::bose_refine]
    ref = oracle.brute_force_rspdm(sp, out, refine=refine).matrix.entries
    return float(np.max(np.abs(ours - ref)))


@pytest.mark.slow
def test_c08_oracle_equivalence(verdict):
    gaps = {
        "N=2 kappa=0": _oracle_gap(0.0, 2, 201, 8, 8),
        "N=2 kappa=10": _oracle_gap(10.0, 2, 201, 8, 8),
        "N=3 kappa=10": _oracle_gap(10.0, 3, 101, 8, 16),
    }
    verdict(max(gaps.values()) < 1e-4, ", ".join(f"{k}: {v:.1e}" for k, v in gaps.items()))


@pytest.mark.slow
def test_c09_boson_rspdm_structure(verdict):
    sp = spectrum(10.0, 20)
    rho = bose.bose_rspdm(sp)
    dec = decomposition(10.0, 20)
    trace = abs(rho.trace - 20)
    lam_min = float(dec.occupations.min())
    diag = float(np.max(np.abs(rho.diagonal - observables.density(sp).values)))
    rebuilt = (dec.orbitals.T * dec.occupations) @ dec.orbitals
    recon = float(np.max(np.abs(rebuilt - rho.entries)))
    ok = trace < 1e-6 and lam_min >= -1e-10 and diag < 1e-8 and recon < 1e-6
    verdict(ok, f"trace err {trace:.1e}, min lambda {lam_min:.1e}, diag err {diag:.1e}, reconstruction {recon:.1e}")


@pytest.mark.slow
def test_c10_sqrt_n_coherence(verdict):
    ns = np.arange(5, 31)
    lam0 = np.array([decomposition(0.0, int(n)).occupations[0] for n in ns])
    exponent = float(np.polyfit(np.log(ns), np.log(lam0), 1)[0])
    verdict(0.45 <= exponent <= 0.60, f"lambda_0 ~ N^{exponent:.4f} over N=5..30")


@pytest.mark.slow
def test_c11_odd_even_oscillation(verdict):
    f = {n: bose.occupation_fraction(decomposition(10.0, n)) for n in range(3, 21)}
    zigzag = all(f[2 * m] > 0.5 * (f[2 * m - 1] + f[2 * m + 1]) for m in range(2, 10))
    early = 0.5 * (f[4] + f[6]) - f[5]
    late = 0.5 * (f[18] + f[20]) - f[19]
    spread_early = max(f[4], f[5], f[6]) - min(f[4], f[5], f[6])
    spread_late = max(f[18], f[19], f[20]) - min(f[18], f[19], f[20])
    ok = zigzag and late < early and spread_late < spread_early
    verdict(ok, f"even above odd neighbours: {zigzag}; peak-to-trough {early:.4f} -> {late:.4f}, "
                f"spread {spread_early:.4f} -> {spread_late:.4f}")


@pytest.mark.slow
def test_c12a_momentum_normalization(verdict):
    errs = {}
    for kappa in (0.0, 20.0):
        sp = spectrum(kappa, 20)
        errs[f"fermion kappa={kappa:g}"] = abs(momentum.momentum_distribution(sp).total - 20) / 20
        errs[f"boson kappa={kappa:g}"] = abs(boson_momentum(kappa, 20).total - 20) / 20
    verdict(max(errs.values()) < 1e-4, ", ".join(f"{k}: {v:.1e}" for k, v in errs.items()))


@pytest.mark.slow
def test_c12b_self_fourier(verdict):
    sp = spectrum(0.0, 20)
    nk = momentum.momentum_distribution(sp)
    rho = np.sum(sp.evaluate(nk.grid.points) ** 2, axis=0)
    err = float(np.max(np.abs(nk.values - rho)))
    verdict(err < 1e-6, f"max|n_F(k) - rho(x=k)| = {err:.1e}")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="converged n_B(k) at kappa=20, N=20 peaks at k=0; see the decision ledger")
def test_c12c_bimodality(verdict):
    nk = boson_momentum(20.0, 20)
    v = nk.values
    c = nk.grid.n_points // 2
    right = v[c:]
    interior = np.nonzero((right[1:-1] > right[:-2]) & (right[1:-1] > right[2:]))[0] + 1
    local_min = v[c] < v[c - 1] and v[c] < v[c + 1]
    symmetric = bool(np.allclose(v, v[::-1], rtol=1e-8, atol=1e-12))
    k_peak = float(nk.grid.points[c + interior[0]]) if interior.size else float("nan")
    verdict(local_min and interior.size > 0 and symmetric,
            f"n_B(0)={v[c]:.4f}, local minimum at 0: {local_min}, first side maximum at k={k_peak:.3f}")


@pytest.mark.slow
def test_c12d_peak_lowering(verdict):
    deep = boson_momentum(20.0, 19)
    free = boson_momentum(0.0, 19)
    n_deep = deep.values[deep.grid.n_points // 2]
    n_free = free.values[free.grid.n_points // 2]
    verdict(n_deep < n_free, f"n_B(0): kappa=20 {n_deep:.4f} vs kappa=0 {n_free:.4f}")


def test_c13a_gaussian_expansion(verdict):
    sp = spectrum(0.0, 1)
    times = (0.0, 0.5, 1.0, 2.0, 3.0)
    res = dynamics.free_evolve(sp, None, times)
    x2 = res.grid.points**2
    widths = [math.sqrt(2.0 * (res.grid.weights @ (x2 * res.snapshots[i]))) for i in range(len(times))]
    err = max(abs(w / math.sqrt(1 + t * t) - 1) for w, t in zip(widths, times))
    drift = float(np.max(np.abs(res.norms - 1)))
    verdict(err < 1e-3 and drift < 1e-6, f"relative width err {err:.1e}, norm drift {drift:.1e}")


@pytest.mark.slow
def test_c13b_fringe_ordering(verdict):
    vis, drift = {}, 0.0
    for n in (9, 10):
        res = dynamics.free_evolve(spectrum(30.0, n), None, (2.0,))
        vis[n] = dynamics.fringe_visibility(res.snapshot(0), 5.0)
        drift = max(drift, float(np.max(np.abs(res.norms - 1))))
    ok = vis[10] > 2.0 * vis[9] and drift < 1e-6
    verdict(ok, f"V(N=10)={vis[10]:.4f}, V(N=9)={vis[9]:.4f}, ratio {vis[10] / vis[9]:.3f}, norm drift {drift:.1e}")
