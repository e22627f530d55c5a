"""Free expansion after the trap and the delta are switched off.

Each occupied orbital evolves under the free propagator, diagonal in k:
psi(k, t) = psi(k, 0) exp(-i k^2 t / 2).  The density of the hard-core gas
equals the fermionic one at all times, so snapshots are sum_n |psi_n(x, t)|^2.

Even orbitals have odd-derivative jumps at x = 0: psi' jumps by
-2 kappa psi(0), and the trap equation psi'' = (x^2 - 2E) psi makes the
third derivative jump by -2E times that.  Sampled kinks alias under the
FFT, so each orbital is split as

    psi_n = r_n + sum_i c_ni exp(-beta_i |x|),   beta = (b, 2b),  b = max(kappa, 2),

with c chosen so that r_n has no jump in its first or third derivative.
r_n is propagated by FFT on a power-of-two grid and each exponential by its
closed-form free evolution

    S(x, t) = 1/2 exp(i x^2 / 2t) [w(i z_-) + w(i z_+)],
    z_(+/-) = (i beta t +/- |x|) / sqrt(2 i t),

with w the Faddeeva function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import wofz

from .grid import SpatialGrid
from .observables import DensityProfile
from .spectrum import Spectrum, eval_eigenstate

__all__ = [
    "BoxOverflowError",
    "EvolutionResult",
    "dynamic_grid",
    "kink_propagator",
    "free_evolve",
    "fringe_visibility",
    "BOUNDARY_TOLERANCE",
]

BOUNDARY_TOLERANCE = 1e-6
# Orbitals are evaluated for |x| up to the outermost turning point plus this
# margin; beyond it they are below 1e-30.
_SUPPORT_MARGIN = 9.0


class BoxOverflowError(RuntimeError):
    """The expanding cloud reached the edge of the dynamic grid."""


def kink_propagator(x, t: float, beta: float) -> np.ndarray:
    """Free evolution of exp(-beta |x|) at time ``t`` (complex)."""
    ax = np.abs(np.asarray(x, dtype=float))
    if t == 0.0:
        return np.exp(-beta * ax).astype(complex)
    if t < 0.0:
        raise ValueError("times must be non-negative")
    root = np.sqrt(2j * t)
    zm = (1j * beta * t - ax) / root
    zp = (1j * beta * t + ax) / root
    return 0.5 * np.exp(1j * ax * ax / (2.0 * t)) * (wofz(1j * zm) + wofz(1j * zp))


@dataclass(frozen=True)
class EvolutionResult:
    times: tuple[float, ...]
    grid: SpatialGrid
    snapshots: np.ndarray = field(repr=False)
    norms: np.ndarray = field(repr=False)
    exterior: np.ndarray = field(repr=False)
    kinetic: np.ndarray = field(repr=False)
    particle_number: int

    def snapshot(self, i: int) -> DensityProfile:
        return DensityProfile(self.grid, self.snapshots[i], self.particle_number)


def _kink_tail_width(amplitude: float, t: float, tol: float) -> float:
    """Half-width beyond which the density radiated by the kinks stays below ``tol``.

    A derivative jump J gives |mu(k)|^2 ~ J^2 / (2 pi k^4); stationary phase
    turns this into a density (2/pi) A t^3 / x^4 at time t, with
    A = sum_n (J_n / 2)^2.
    """
    if amplitude == 0.0 or t == 0.0:
        return 0.0
    return (2.0 / math.pi * amplitude * t**3 / tol) ** 0.25


def _kink_split(spectrum: Spectrum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decay rates, per-orbital coefficients and psi_n(0) for the kink subtraction."""
    kappa = spectrum.config.kappa
    b = max(kappa, 2.0)
    betas = np.array([b, 2.0 * b])
    at0 = np.array([eval_eigenstate(s, spectrum.config, np.zeros(1))[0] for s in spectrum.states])
    if kappa == 0.0:
        return betas, np.zeros((len(at0), 2)), at0
    # sum_i c_i beta_i = kappa psi(0);  sum_i c_i beta_i^3 = -2 E kappa psi(0)
    mat = np.vstack([betas, betas**3])
    rhs = np.vstack([kappa * at0, -2.0 * spectrum.energies * kappa * at0])
    return betas, np.linalg.solve(mat, rhs).T, at0


def dynamic_grid(spectrum: Spectrum, t_max: float, base: SpatialGrid | None = None) -> SpatialGrid:
    """Power-of-two periodic grid (plus the closing node) for expansion up to ``t_max``.

    L covers (sqrt(2 E_top) + 5)(1 + t_max), the static grid, and the region
    where the density radiated by the kinks exceeds a tenth of the boundary
    tolerance.  The spacing is at most that of ``base`` and 0.05 / kappa.
    """
    base = base or spectrum.grid
    kappa = spectrum.config.kappa
    e_top = float(np.max(spectrum.energies))
    # free expansion stretches a trap state by sqrt(1 + t^2), tails included
    half = max((math.sqrt(max(2.0 * e_top, 0.0)) + 5.0) * (1.0 + t_max), base.half_width)
    h = base.spacing
    if kappa > 0.0:
        _, _, at0 = _kink_split(spectrum)
        amp = float(np.sum((kappa * at0) ** 2))
        half = max(half, _kink_tail_width(amp, t_max, 0.1 * BOUNDARY_TOLERANCE))
        h = min(h, 0.05 / kappa)
    p = 1 << int(math.ceil(math.log2(2.0 * half / h)))
    return SpatialGrid(half, p + 1)


def _exterior_weight(coeff: np.ndarray, betas: np.ndarray, half: float, t: float,
                     order: int = 64) -> np.ndarray:
    """int_{|x| > L} |sum_i c_ni S_i(x, t)|^2 dx for every orbital n.

    Outside the box only the propagated exponentials survive; their density
    falls off as x^-4, so the substitution x = L / u makes the integrand
    smooth on (0, 1].
    """
    if t == 0.0 or not np.any(coeff):
        return np.zeros(len(coeff))
    u, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    x = half / u
    s = np.array([kink_propagator(x, t, b) for b in betas])
    amp = coeff @ s
    return 2.0 * (np.abs(amp) ** 2 * (half / u**2)) @ w


def _kinetic(psi: np.ndarray, grid: SpatialGrid) -> float:
    """(1/2) int |d psi/dx|^2 from the discrete spectrum of the periodic samples."""
    p = grid.n_points - 1
    k = 2.0 * np.pi * np.fft.fftfreq(p, grid.spacing)
    coef = np.fft.fft(psi[:p])
    return float(0.5 * grid.spacing / p * np.sum(k * k * np.abs(coef) ** 2))


def free_evolve(spectrum: Spectrum, grid: SpatialGrid | None, times) -> EvolutionResult:
    """Densities at ``times`` after all potentials are switched off at t = 0.

    ``grid`` is the initial grid; it is enlarged and refined as needed (see
    ``dynamic_grid``).  Raises ``BoxOverflowError`` if any snapshot has
    density above 1e-6 at the box edge.

    ``norms`` are full-line norms of the evolved orbitals: the grid
    quadrature plus ``exterior``, the weight the kinks have radiated
    beyond the box, which is known in closed form.
    """
    ts = tuple(float(t) for t in times)
    if not ts:
        raise ValueError("no times given")
    if min(ts) < 0.0:
        raise ValueError("times must be non-negative")
    betas, coeff, _ = _kink_split(spectrum)
    kinked = bool(np.any(coeff != 0.0))
    dgrid = dynamic_grid(spectrum, max(ts), grid)
    x = dgrid.points
    p = dgrid.n_points - 1
    k = 2.0 * np.pi * np.fft.fftfreq(p, dgrid.spacing)

    support = math.sqrt(max(2.0 * float(np.max(spectrum.energies)), 0.0)) + _SUPPORT_MARGIN
    inside = np.abs(x[:p]) <= support
    smooth = []
    for state, c in zip(spectrum.states, coeff):
        r = np.zeros(p)
        if kinked:
            r -= c @ np.exp(-np.outer(betas, np.abs(x[:p])))
        r[inside] += eval_eigenstate(state, spectrum.config, x[:p][inside])
        smooth.append(np.fft.fft(r))

    centre = dgrid.center
    snaps = np.zeros((len(ts), dgrid.n_points))
    norms = np.zeros((len(ts), spectrum.n_states))
    exterior = np.zeros((len(ts), spectrum.n_states))
    kinetic = np.zeros(len(ts))
    for it, t in enumerate(ts):
        kinks = None
        if kinked:
            # S is even in x: evaluate on x >= 0 and mirror
            right = np.array([kink_propagator(x[centre:], t, b) for b in betas])
            kinks = np.concatenate([right[:, :0:-1], right], axis=1)
        phase = np.exp(-0.5j * k * k * t)
        for n, rhat in enumerate(smooth):
            psi = np.empty(dgrid.n_points, dtype=complex)
            psi[:p] = np.fft.ifft(rhat * phase)
            psi[p] = psi[0]
            if kinks is not None:
                psi += coeff[n] @ kinks
            dens = psi.real**2 + psi.imag**2
            snaps[it] += dens
            norms[it, n] = dgrid.weights @ dens
            kinetic[it] += _kinetic(psi, dgrid)
        exterior[it] = _exterior_weight(coeff, betas, dgrid.half_width, t)
        norms[it] += exterior[it]
        edge = max(snaps[it, 0], snaps[it, -1])
        if edge > BOUNDARY_TOLERANCE:
            raise BoxOverflowError(
                f"density {edge:.3g} at the box edge L={dgrid.half_width:.4g} at t={t:g}"
            )
    return EvolutionResult(ts, dgrid, snaps, norms, exterior, kinetic, spectrum.n_states)


def fringe_visibility(profile: DensityProfile, window: float, rel_tol: float = 1e-10) -> float:
    """Contrast (max - min) / (max + min) of interior local extrema on [-window, window].

    Extrema come from 3-point comparisons on the grid, ignoring differences
    below ``rel_tol`` times the window maximum.  Returns 0 when the window
    holds no interior local minimum.
    """
    grid = profile.grid
    if not 0.0 < window <= grid.half_width:
        raise ValueError("window must lie inside the grid")
    sel = np.abs(grid.points) <= window + 1e-12 * grid.half_width
    rho = np.asarray(profile.values)[sel]
    if rho.size < 3:
        raise ValueError("window holds fewer than 3 grid points")
    top = float(rho.max())
    if not top > 0.0:
        raise ValueError("density vanishes in the window")
    tol = rel_tol * top
    mid, left, right = rho[1:-1], rho[:-2], rho[2:]
    maxima = mid[(mid - left > tol) & (mid - right > tol)]
    minima = mid[(left - mid > tol) & (right - mid > tol)]
    if minima.size == 0 or maxima.size == 0:
        return 0.0
    hi, lo = float(maxima.max()), float(minima.min())
    return (hi - lo) / (hi + lo)
