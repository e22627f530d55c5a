"""Spatial observables shared by the free Fermi gas and the Tonks-Girardeau gas.

Under the Bose-Fermi mapping both species have the same density and pair
distribution; only the one-body density matrix differs (see ``bose``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import SpatialGrid
from .spectrum import Spectrum

__all__ = [
    "DensityProfile",
    "DensityMatrix",
    "density",
    "pair_distribution",
    "pair_distribution_explicit",
    "pair_distribution_grid",
    "fermi_rspdm",
]


def _orbitals_on(spectrum: Spectrum, grid: SpatialGrid) -> np.ndarray:
    if grid is spectrum.grid or grid == spectrum.grid:
        return spectrum.samples
    return spectrum.evaluate(grid.points)


@dataclass(frozen=True)
class DensityProfile:
    grid: SpatialGrid
    values: np.ndarray = field(repr=False)
    particle_number: int

    @property
    def total(self) -> float:
        return float(self.grid.weights @ self.values)

    def at(self, x: float) -> float:
        return float(self.values[self.grid.index_of(x)])


@dataclass(frozen=True)
class DensityMatrix:
    """One-body density matrix sampled on ``grid`` x ``grid``."""

    grid: SpatialGrid
    entries: np.ndarray = field(repr=False)
    species: str
    trace_target: int

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.entries).copy()

    @property
    def trace(self) -> float:
        return float(self.grid.weights @ np.diagonal(self.entries))


def density(spectrum: Spectrum, grid: SpatialGrid | None = None) -> DensityProfile:
    """rho(x) = sum_n |psi_n(x)|^2 over the occupied levels."""
    grid = grid or spectrum.grid
    psi = _orbitals_on(spectrum, grid)
    return DensityProfile(grid, np.einsum("na,na->a", psi, psi), spectrum.n_states)


def pair_distribution(spectrum: Spectrum, x1, x2):
    """Pair distribution D(x1, x2) via rho(x1) rho(x2) - Delta(x1, x2)^2.

    ``Delta`` is the fermionic one-body density matrix; the identity is the
    expansion of the two-row Slater minors.  Broadcasts over ``x1``, ``x2``.
    """
    if spectrum.n_states < 2:
        raise ValueError("pair distribution needs at least two particles")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    p1 = spectrum.evaluate(x1)
    p2 = spectrum.evaluate(x2)
    rho1 = np.sum(p1 * p1, axis=0)
    rho2 = np.sum(p2 * p2, axis=0)
    delta = np.sum(p1 * p2, axis=0)
    # rounding can push the difference a few ulps below zero
    out = np.maximum(rho1 * rho2 - delta * delta, 0.0)
    return out if out.ndim else float(out)


def pair_distribution_explicit(spectrum: Spectrum, x1: float, x2: float) -> float:
    """Direct double sum over level pairs; O(N^2), kept as a cross-check."""
    if spectrum.n_states < 2:
        raise ValueError("pair distribution needs at least two particles")
    p1 = spectrum.evaluate(np.array([x1]))[:, 0]
    p2 = spectrum.evaluate(np.array([x2]))[:, 0]
    total = 0.0
    n = len(p1)
    for i in range(n):
        for j in range(i + 1, n):
            total += (p1[i] * p2[j] - p2[i] * p1[j]) ** 2
    return total


def pair_distribution_grid(spectrum: Spectrum, grid: SpatialGrid | None = None) -> np.ndarray:
    """D(x_a, x_b) on the full grid, shape (M, M)."""
    if spectrum.n_states < 2:
        raise ValueError("pair distribution needs at least two particles")
    grid = grid or spectrum.grid
    psi = _orbitals_on(spectrum, grid)
    rho = np.einsum("na,na->a", psi, psi)
    delta = psi.T @ psi
    return np.maximum(np.outer(rho, rho) - delta * delta, 0.0)


def fermi_rspdm(spectrum: Spectrum, grid: SpatialGrid | None = None) -> DensityMatrix:
    """rho_F(x, x') = sum_n psi_n(x) psi_n(x'), the projector on the occupied levels."""
    grid = grid or spectrum.grid
    psi = _orbitals_on(spectrum, grid)
    return DensityMatrix(grid, psi.T @ psi, "fermion", spectrum.n_states)
