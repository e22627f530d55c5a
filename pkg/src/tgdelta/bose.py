"""One-body density matrix of the Tonks-Girardeau gas and its natural orbitals.

The density matrix is built from the N occupied single-particle states with
the determinant construction for hard-core bosons: for x <= y

    rho_B(x, y) = sum_ij psi_i(x) A_ij(x, y) psi_j(y),
    P_ij(x, y)  = delta_ij - 2 int_x^y psi_i psi_j,
    A           = adj(P)^T  (= det(P) P^{-T} when P is invertible).

The pair loop runs in a compiled extension when available; set
``TGDELTA_PURE_PYTHON=1`` to force the NumPy kernel.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _rspdm_py
from .grid import SpatialGrid
from .observables import DensityMatrix, _orbitals_on
from .spectrum import Spectrum

try:
    if os.environ.get("TGDELTA_PURE_PYTHON"):
        raise ImportError("pure-Python kernel requested")
    from . import _rspdm_ext as _kernel
except ImportError:
    _kernel = _rspdm_py

__all__ = [
    "OverlapCumulative",
    "OrbitalDecomposition",
    "cumulative_overlaps",
    "bose_rspdm",
    "natural_orbitals",
    "occupation_fraction",
    "adjugate_transpose",
    "kernel_name",
    "MAX_PARTICLES",
    "MAX_OVERLAP_ENTRIES",
]

MAX_PARTICLES = 40
MAX_OVERLAP_ENTRIES = 60_000_000
# pairs with |det P| below this are redone through the SVD adjugate
DET_FLOOR = 1e-10


def kernel_name() -> str:
    return _kernel.NAME


@dataclass(frozen=True)
class OverlapCumulative:
    """``tensor[a, i, j]`` is the integral of psi_i psi_j from -L to x_a."""

    grid: SpatialGrid
    tensor: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class OrbitalDecomposition:
    grid: SpatialGrid
    occupations: np.ndarray = field(repr=False)
    orbitals: np.ndarray = field(repr=False)
    particle_number: int
    parities: np.ndarray = field(repr=False)

    @property
    def reported_occupations(self) -> np.ndarray:
        occ = self.occupations.copy()
        occ[occ < 1e-12] = 0.0
        return occ


def cumulative_overlaps(spectrum: Spectrum, grid: SpatialGrid | None = None,
                        max_entries: int = MAX_OVERLAP_ENTRIES) -> OverlapCumulative:
    grid = grid or spectrum.grid
    n = spectrum.n_states
    if grid.n_points * n * n > max_entries:
        raise MemoryError(
            f"overlap tensor of {grid.n_points} x {n} x {n} exceeds the cap of {max_entries} entries"
        )
    psi = _orbitals_on(spectrum, grid)
    products = np.einsum("ia,ja->aij", psi, psi)
    tensor = grid.cumulative(products)
    # symmetric by construction; remove rounding asymmetry
    tensor = 0.5 * (tensor + tensor.transpose(0, 2, 1))
    return OverlapCumulative(grid, tensor)


def adjugate_transpose(p: np.ndarray) -> np.ndarray:
    """Transposed adjugate of ``p`` via the SVD; finite even when ``p`` is singular."""
    u, s, vt = np.linalg.svd(p)
    n = len(s)
    cof = np.array([np.prod(np.delete(s, i)) for i in range(n)])
    sign = np.linalg.det(u) * np.linalg.det(vt)
    return sign * (u * cof) @ vt


def bose_rspdm(spectrum: Spectrum, overlaps: OverlapCumulative | None = None,
               max_particles: int = MAX_PARTICLES) -> DensityMatrix:
    """Hard-core boson density matrix on the overlap grid, normalized to trace N."""
    n = spectrum.n_states
    if n > max_particles:
        raise ValueError(f"N={n} exceeds the configured cap of {max_particles}")
    if overlaps is None:
        overlaps = cumulative_overlaps(spectrum)
    grid = overlaps.grid
    psi = _orbitals_on(spectrum, grid)
    psi_t = np.ascontiguousarray(psi.T)
    rho, flags = _kernel.rspdm_upper(psi_t, overlaps.tensor, DET_FLOOR)
    eye = np.eye(n)
    for a, b in zip(*np.nonzero(flags)):
        p = eye - 2.0 * (overlaps.tensor[b] - overlaps.tensor[a])
        v = psi_t[a] @ adjugate_transpose(p) @ psi_t[b]
        rho[a, b] = rho[b, a] = v
    dens = np.einsum("na,na->a", psi, psi)
    bound = np.sqrt(np.outer(dens, dens)) + 1e-8
    if np.any(np.abs(rho) > bound):
        warnings.warn("boson density matrix exceeds the Cauchy-Schwarz bound; check grid resolution",
                      RuntimeWarning, stacklevel=2)
    return DensityMatrix(grid, rho, "boson", n)


def _parity_basis(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Column-orthonormal maps from the even / odd subspaces to grid vectors."""
    c = m // 2
    k = np.arange(1, c + 1)
    r = 1.0 / np.sqrt(2.0)
    even = np.zeros((m, c + 1))
    even[c, 0] = 1.0
    even[c + k, k] = r
    even[c - k, k] = r
    odd = np.zeros((m, c))
    odd[c + k, k - 1] = r
    odd[c - k, k - 1] = -r
    return even, odd


def natural_orbitals(rspdm: DensityMatrix, grid: SpatialGrid | None = None) -> OrbitalDecomposition:
    """Occupations and natural orbitals of a density matrix on a symmetric grid.

    Diagonalizes R = sqrt(w) rho sqrt(w) block by block in the parity-adapted
    basis, so every orbital is exactly even or odd.  Orbitals are grid samples
    normalized under the grid quadrature and sorted by decreasing occupation.
    """
    grid = grid or rspdm.grid
    sw = np.sqrt(grid.weights)
    r = sw[:, None] * rspdm.entries * sw[None, :]
    r = 0.5 * (r + r.T)
    occs, vecs, pars = [], [], []
    for parity, basis in zip((1, -1), _parity_basis(grid.n_points)):
        lam, v = np.linalg.eigh(basis.T @ r @ basis)
        occs.append(lam)
        vecs.append(basis @ v)
        pars.append(np.full(len(lam), parity))
    lam = np.concatenate(occs)
    vec = np.concatenate(vecs, axis=1)
    par = np.concatenate(pars)
    order = np.argsort(-lam, kind="stable")
    orbitals = (vec[:, order] / sw[:, None]).T
    # fix the overall sign: positive where the orbital is largest
    idx = np.argmax(np.abs(orbitals), axis=1)
    orbitals *= np.sign(orbitals[np.arange(len(idx)), idx])[:, None]
    return OrbitalDecomposition(grid, lam[order], orbitals, rspdm.trace_target, par[order])


def occupation_fraction(decomposition: OrbitalDecomposition) -> float:
    """Fraction of the particles in the most occupied natural orbital."""
    if decomposition.occupations.size == 0:
        raise ValueError("empty decomposition")
    return float(decomposition.occupations[0] / decomposition.particle_number)
