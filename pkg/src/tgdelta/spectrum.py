"""Single-particle eigenstates of the harmonic trap with a central attractive delta.

Scaled units throughout: lengths in oscillator lengths, energies in hbar*omega.
Odd states are the unperturbed Hermite functions.  Even states are
``exp(-x^2/2) U(1/4 - E/2, 1/2, x^2)`` with E fixed by the delta boundary
condition, ``kappa = 2 Gamma(3/4 - E/2) / Gamma(1/4 - E/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .grid import SpatialGrid, default_grid
from .specfun import (
    ConvergenceError,
    GammaPoleError,
    gamma_ln_signed,
    kummer_u_half,
    log_kummer_u_half,
    rgamma,
)

__all__ = [
    "TrapConfig",
    "EigenState",
    "Spectrum",
    "BracketError",
    "GridResolutionError",
    "kappa_of_energy",
    "solve_even_energy",
    "eval_eigenstate",
    "build_spectrum",
    "CRITICAL_KAPPA",
]

#: Strength at which the even ground state crosses E = 0, 2 Gamma(3/4) / Gamma(1/4).
CRITICAL_KAPPA = 0.6759782400672848

_POLE_SHRINK = 1e-9


class BracketError(ConvergenceError):
    """The root of the even-state condition could not be bracketed."""


class GridResolutionError(ValueError):
    """The grid is too coarse or too narrow for the requested states."""


@dataclass(frozen=True)
class TrapConfig:
    kappa: float
    n_particles: int

    def __post_init__(self):
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa!r}")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be a positive integer, got {self.n_particles!r}")


@dataclass(frozen=True)
class EigenState:
    """One single-particle level.

    ``norm_constant`` multiplies the reduced shape function: ``H_n(x) exp(-x^2/2)``
    for odd states and ``exp(-x^2/2) U(a, 1/2, x^2) / U(a, 1/2, 0)`` for even ones.
    """

    index: int
    parity: str
    energy: float
    norm_constant: float = 1.0

    @property
    def kummer_a(self) -> float:
        return 0.25 - 0.5 * self.energy


def kappa_of_energy(energy: float) -> float:
    """Delta strength for which ``energy`` is an even eigenvalue.

    Poles of the denominator Gamma give zero (the unperturbed even levels);
    poles of the numerator raise :class:`GammaPoleError`.
    """
    num = gamma_ln_signed(0.75 - 0.5 * energy)
    try:
        den = gamma_ln_signed(0.25 - 0.5 * energy)
    except GammaPoleError:
        return 0.0
    return 2.0 * num.sign * den.sign * math.exp(num.log_magnitude - den.log_magnitude)


def _even_bracket(kappa: float, n: int) -> tuple[float, float]:
    if n == 0:
        return -0.5 * kappa * kappa - 2.0, 0.5
    return n - 0.5, n + 0.5


def solve_even_energy(kappa: float, n: int) -> float:
    """Energy of the even level ``n`` (0, 2, 4, ...) at delta strength ``kappa``."""
    if n < 0 or n % 2:
        raise ValueError(f"n must be a non-negative even integer, got {n!r}")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if kappa == 0:
        return n + 0.5
    lo, hi = _even_bracket(kappa, n)
    lo += _POLE_SHRINK

    def resid(e):
        return kappa_of_energy(e) - kappa

    f_lo, f_hi = resid(lo), resid(hi)
    if not (f_lo > 0 > f_hi):
        raise BracketError(f"no sign change for kappa={kappa} on E in [{lo}, {hi}]")
    # narrow by bisection before the Brent polish so neither end sits on the pole wing
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        if resid(mid) > 0:
            lo = mid
        else:
            hi = mid
    root, info = brentq(resid, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200, full_output=True)
    if not info.converged:
        raise ConvergenceError(f"even level {n} at kappa={kappa} did not converge")
    return float(root)


def _even_shape(energy: float, x: np.ndarray) -> np.ndarray:
    a = 0.25 - 0.5 * energy
    ax = np.abs(x)
    z = ax * ax
    if a >= 0.1:
        log_u0 = 0.5 * math.log(math.pi) - gamma_ln_signed(a + 0.5).log_magnitude
        return np.exp(log_kummer_u_half(a, z) - log_u0 - 0.5 * z)
    u0 = math.sqrt(math.pi) * rgamma(a + 0.5)
    return np.exp(-0.5 * z) * kummer_u_half(a, z) / u0


def _odd_shape(n: int, x: np.ndarray) -> np.ndarray:
    # recurrence on H_k(x) exp(-x^2/2) directly
    g = np.exp(-0.5 * x * x)
    prev, cur = g, 2.0 * x * g
    for k in range(1, n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
    return cur


def _shape(state: EigenState, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if state.parity == "odd":
        return _odd_shape(state.index, x)
    # evaluate on |x| once per distinct magnitude
    ax = np.abs(x).ravel()
    uniq, inv = np.unique(ax, return_inverse=True)
    return _even_shape(state.energy, uniq)[inv].reshape(x.shape)


def eval_eigenstate(state: EigenState, config: TrapConfig | None, x):
    """Normalized eigenfunction ``psi_n(x)``; ``config`` is accepted for symmetry with the builders."""
    xa = np.asarray(x, dtype=float)
    out = state.norm_constant * _shape(state, xa)
    return out if xa.ndim else float(out)


@dataclass(frozen=True)
class Spectrum:
    """The N lowest levels of one trap configuration, normalized on ``grid``."""

    config: TrapConfig
    states: tuple[EigenState, ...]
    grid: SpatialGrid
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    @property
    def n_states(self) -> int:
        return len(self.states)

    def evaluate(self, x) -> np.ndarray:
        """Array of shape (N, *x.shape) with every state evaluated at ``x``."""
        return np.stack([eval_eigenstate(s, self.config, np.asarray(x, dtype=float)) for s in self.states])

    def gram(self) -> np.ndarray:
        """Overlap matrix of the states under the grid quadrature."""
        return (self.samples * self.grid.weights) @ self.samples.T


def level_energies(kappa: float, n_levels: int) -> list[float]:
    return [solve_even_energy(kappa, n) if n % 2 == 0 else n + 0.5 for n in range(n_levels)]


def check_resolution(kappa: float, energies: Sequence[float], grid: SpatialGrid) -> None:
    h_max = 0.25 / max(kappa, 1.0)
    if grid.spacing > h_max * (1 + 1e-12):
        raise GridResolutionError(
            f"grid spacing {grid.spacing:.4g} exceeds {h_max:.4g} needed to resolve the bound state"
        )
    turning = math.sqrt(max(2.0 * max(energies), 0.0))
    if grid.half_width < turning + 3.0:
        raise GridResolutionError(
            f"half width {grid.half_width:.4g} too small for the classical turning point {turning:.4g}"
        )


def build_spectrum(config: TrapConfig, grid: SpatialGrid | None = None, check: bool = True) -> Spectrum:
    """Solve for the ``config.n_particles`` lowest levels and normalize them on ``grid``."""
    energies = level_energies(config.kappa, config.n_particles)
    if grid is None:
        grid = default_grid(config.kappa, energies[-1])
    if check:
        check_resolution(config.kappa, energies, grid)
    states = []
    rows = []
    for n, e in enumerate(energies):
        bare = EigenState(n, "even" if n % 2 == 0 else "odd", e)
        shape = _shape(bare, grid.points)
        norm2 = float(grid.weights @ (shape * shape))
        if not (norm2 > 0 and math.isfinite(norm2)):
            raise ConvergenceError(f"state {n} could not be normalized (norm^2={norm2})")
        c = 1.0 / math.sqrt(norm2)
        states.append(EigenState(n, bare.parity, e, c))
        rows.append(c * shape)
    for i in range(1, len(energies)):
        if not energies[i] > energies[i - 1]:
            raise ConvergenceError("energies are not strictly increasing")
    samples = np.array(rows)
    samples.setflags(write=False)
    return Spectrum(config, tuple(states), grid, samples)
