"""Brute-force many-body evaluations for N = 2 and 3.

These integrate the symmetrized wavefunction directly and share nothing
with the determinant algorithm in ``bose`` beyond the single-particle
orbitals; they exist to check its sign and factor conventions.

Inner integrals use the plain trapezoid rule on a uniform refinement of the
output grid.  Every kink of the integrand (at s = x, s = y, s = t and at the
delta) then sits on a node, so the error is a clean series in h^2 and one
Richardson step between refinements r and 2r removes the leading term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import SpatialGrid
from .observables import DensityMatrix
from .spectrum import Spectrum, TrapConfig, build_spectrum

__all__ = [
    "ManyBodyWavefunction",
    "OracleResult",
    "brute_force_rspdm",
    "brute_force_pair_distribution",
    "MAX_ORACLE_COST",
]

# Upper bound on (output points)^2 x (inner nodes) per refinement level.
MAX_ORACLE_COST = 6e10


def _spectrum_for(config: TrapConfig | Spectrum) -> Spectrum:
    if isinstance(config, Spectrum):
        return config
    return build_spectrum(config)


@dataclass(frozen=True)
class ManyBodyWavefunction:
    """Psi_B(x_1..x_N) = |det psi_j(x_i)| / sqrt(N!) for N in {2, 3}."""

    spectrum: Spectrum

    def __post_init__(self):
        if self.spectrum.n_states not in (2, 3):
            raise ValueError("brute-force wavefunction supports N = 2 or 3 only")

    @property
    def n_particles(self) -> int:
        return self.spectrum.n_states

    def slater(self, coords) -> np.ndarray:
        """Signed determinant det psi_j(x_i) / sqrt(N!); ``coords`` has shape (..., N)."""
        c = np.asarray(coords, dtype=float)
        n = self.n_particles
        if c.shape[-1] != n:
            raise ValueError(f"expected {n} coordinates in the last axis")
        psi = self.spectrum.evaluate(c)  # (N_orb, ..., N_coord)
        mat = np.moveaxis(psi, 0, -1)  # (..., coord, orbital)
        return np.linalg.det(mat) / math.sqrt(math.factorial(n))

    def __call__(self, coords) -> np.ndarray:
        return np.abs(self.slater(coords))


@dataclass(frozen=True)
class OracleResult:
    matrix: DensityMatrix
    error_estimate: np.ndarray = field(repr=False)


def _gram(factor: np.ndarray, weights: np.ndarray) -> np.ndarray:
    f = factor * np.sqrt(weights)[None, :]
    return f @ f.T


def _level_n2(spectrum: Spectrum, out: SpatialGrid, refine: int) -> np.ndarray:
    inner = SpatialGrid(out.half_width, (out.n_points - 1) * refine + 1)
    po = spectrum.evaluate(out.points)
    pi = spectrum.evaluate(inner.points)
    # |D(x, s)| with D = psi_0(x) psi_1(s) - psi_1(x) psi_0(s)
    d = np.abs(np.outer(po[0], pi[1]) - np.outer(po[1], pi[0]))
    # rho = 2 * int Psi Psi ds and Psi = |D| / sqrt(2)
    return _gram(d, inner.trapezoid)


def _level_n3(spectrum: Spectrum, out: SpatialGrid, refine: int) -> np.ndarray:
    inner = SpatialGrid(out.half_width, (out.n_points - 1) * refine + 1)
    po = spectrum.evaluate(out.points).T  # (Mo, 3)
    pi = spectrum.evaluate(inner.points).T  # (Mi, 3)
    w = inner.trapezoid
    m = inner.n_points
    rho = np.zeros((out.n_points, out.n_points))
    # |D| is symmetric in (s, t) and vanishes on s = t: sum over s < t, doubled.
    for s in range(m - 1):
        cross = np.cross(pi[s], pi[s + 1 :])  # (m - s - 1, 3)
        d = np.abs(po @ cross.T)
        rho += _gram(d, w[s] * w[s + 1 :])
    # rho = 3 * int int Psi Psi, Psi = |D| / sqrt(6), doubled for t < s
    return rho


def brute_force_rspdm(config: TrapConfig | Spectrum, grid: SpatialGrid, refine: int = 8,
                      max_cost: float = MAX_ORACLE_COST) -> OracleResult:
    """rho_B(x, x') = N int Psi_B(x, s..) Psi_B(x', s..) ds.. on ``grid`` x ``grid``.

    Returns the Richardson-extrapolated matrix from refinements ``refine``
    and ``2 * refine`` together with the size of the extrapolation step as
    an error estimate.
    """
    spectrum = _spectrum_for(config)
    n = spectrum.n_states
    if n not in (2, 3):
        raise ValueError("brute force is limited to N = 2 or 3")
    if refine < 1:
        raise ValueError("refine must be a positive integer")
    fine = (grid.n_points - 1) * 2 * refine + 1
    cost = grid.n_points**2 * (fine if n == 2 else fine * fine / 2)
    if cost > max_cost:
        raise ValueError(f"oracle cost {cost:.2e} exceeds the cap {max_cost:.2e}; use a coarser grid")
    if n == 2:
        coarse, finer = (_level_n2(spectrum, grid, r) for r in (refine, 2 * refine))
    else:
        coarse, finer = (_level_n3(spectrum, grid, r) for r in (refine, 2 * refine))
    rho = (4.0 * finer - coarse) / 3.0
    rho = 0.5 * (rho + rho.T)
    return OracleResult(DensityMatrix(grid, rho, "boson", n), np.abs(finer - coarse) / 3.0)


def brute_force_pair_distribution(config: TrapConfig | Spectrum, x1: float, x2: float) -> float:
    """N (N - 1) |Psi_B(x1, x2)|^2 for two particles."""
    spectrum = _spectrum_for(config)
    if spectrum.n_states != 2:
        raise ValueError("brute-force pair distribution needs N = 2")
    psi = ManyBodyWavefunction(spectrum)
    return float(2.0 * psi(np.array([x1, x2])) ** 2)
