"""Uniform spatial grids and their quadrature weights."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = ["SpatialGrid", "default_grid", "kink_corrections"]

# Number of corrected weights on each side of a derivative discontinuity.
KINK_ORDER = 8


def _bernoulli(n: int) -> list[Fraction]:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(Fraction(math.comb(m + 1, k)) * b[k] for k in range(m)) / (m + 1))
    return b


@lru_cache(maxsize=None)
def kink_corrections(order: int = KINK_ORDER) -> tuple[float, ...]:
    """Gregory-type end corrections added to unit-spacing trapezoid weights.

    The ``order`` nodes nearest a panel end get corrections that cancel the
    Euler-Maclaurin end terms for polynomials of degree < ``order``.  Weights
    stay positive up to order 8.
    """
    q = order
    bern = _bernoulli(q + 1)
    mat = [[Fraction(i) ** m for i in range(q)] for m in range(q)]
    rhs = [bern[m + 1] / (m + 1) if m % 2 else Fraction(0) for m in range(q)]
    return tuple(float(v) for v in _solve_rational(mat, rhs))


def _solve_rational(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    mat = [row[:] for row in mat]
    rhs = rhs[:]
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        rhs[col] *= inv
        for r in range(n):
            if r != col and mat[r][col] != 0:
                fac = mat[r][col]
                mat[r] = [a - fac * b for a, b in zip(mat[r], mat[col])]
                rhs[r] -= fac * rhs[col]
    return rhs


@lru_cache(maxsize=None)
def end_stencil(offsets: tuple[int, ...]) -> tuple[float, ...]:
    """Weights d_s with sum_s d_s f(a + s) ~ sum_k B_2k / (2k)! f^(2k-1)(a).

    Subtracting ``h * sum d_s f(a+s)`` from a trapezoid sum that ends at node
    ``a`` removes its Euler-Maclaurin end error for polynomials of degree
    below ``len(offsets)``.  Offsets may lie on either side of ``a``.
    """
    q = len(offsets)
    bern = _bernoulli(q + 1)
    mat = [[Fraction(s) ** m for s in offsets] for m in range(q)]
    rhs = [bern[m + 1] / (m + 1) if m % 2 else Fraction(0) for m in range(q)]
    return tuple(float(v) for v in _solve_rational(mat, rhs))


def _weights(n_points: int, h: float, breaks: tuple[int, ...]) -> np.ndarray:
    cuts = sorted({0, n_points - 1, *breaks})
    w = np.zeros(n_points)
    corr = np.array(kink_corrections())
    q = len(corr)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        panel = np.ones(hi - lo + 1)
        panel[0] = panel[-1] = 0.5
        if hi - lo + 1 >= 2 * q:
            panel[:q] += corr
            panel[-q:] += corr[::-1]
        w[lo : hi + 1] += panel
    return w * h


@dataclass(frozen=True)
class SpatialGrid:
    """Symmetric uniform grid on [-L, L] with an odd number of points.

    The weights are composite trapezoid weights with Gregory end
    corrections on the panels [-L, 0] and [0, L], so that integrands with a
    derivative jump at x = 0 (any product involving the bound state) keep
    roughly 1e-8 relative accuracy at eight points per decay length.
    ``trapezoid`` holds the plain trapezoid weights.
    """

    half_width: float
    n_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.n_points < 17 or self.n_points % 2 == 0:
            raise ValueError("n_points must be odd and at least 17")
        pts = np.linspace(-self.half_width, self.half_width, self.n_points)
        pts[self.center] = 0.0
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", _weights(self.n_points, self.spacing, (self.center,)))
        pts.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def center(self) -> int:
        return self.n_points // 2

    @property
    def trapezoid(self) -> np.ndarray:
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def integrate(self, values: np.ndarray, axis: int = -1) -> np.ndarray:
        return np.tensordot(values, self.weights, axes=([axis], [0]))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Running integral from -L to every node along axis 0.

        Consistent with ``weights``: the value at the last node equals
        ``integrate`` and the value at x = 0 is the corrected integral over
        [-L, 0].  Every partial endpoint gets its own end correction from a
        stencil that stays inside the panel, so the kink at 0 is never
        differenced across.
        """
        f = np.asarray(values, dtype=float)
        m = self.n_points
        if f.shape[0] != m:
            raise ValueError("values must have the grid size along axis 0")
        h = self.spacing
        corr = np.array(kink_corrections())
        q = len(corr)
        out = np.zeros_like(f)
        carried = np.zeros_like(f[0])
        for lo, hi in ((0, self.center), (self.center, m - 1)):
            part = np.zeros_like(f[lo : hi + 1])
            np.cumsum(0.5 * h * (f[lo + 1 : hi + 1] + f[lo:hi]), axis=0, out=part[1:])
            part[1:] += h * np.tensordot(corr, f[lo : lo + q], axes=(0, 0))
            nodes = np.arange(lo + 1, hi + 1)
            starts = np.clip(nodes - q // 2, lo, hi - q + 1)
            for shift in np.unique(starts - nodes):
                sel = nodes[starts - nodes == shift]
                d = end_stencil(tuple(range(int(shift), int(shift) + q)))
                acc = sum(dk * f[sel + shift + k] for k, dk in enumerate(d))
                part[sel - lo] -= h * acc
            out[lo : hi + 1] = carried + part
            carried = out[hi].copy()
        return out

    def index_of(self, x: float) -> int:
        return int(round((x + self.half_width) / self.spacing))


def default_grid(kappa: float, top_energy: float, min_points: int = 1025) -> SpatialGrid:
    """Grid wide enough for the highest occupied level and fine enough for the bound state.

    L = max(sqrt(2 E_top) + 5, 8); M is the smallest odd count >= ``min_points``
    with spacing at most min(0.02, 0.125 / max(kappa, 1)): eight points per
    decay length of the bound state, where the kink-corrected weights
    integrate exp(-2 kappa |x|) to about 1e-8.
    """
    half = max(math.sqrt(max(2.0 * top_energy, 0.0)) + 5.0, 8.0)
    h_max = min(0.02, 0.125 / max(kappa, 1.0))
    intervals = max(math.ceil(2.0 * half / h_max), min_points - 1)
    if intervals % 2:
        intervals += 1
    return SpatialGrid(half, intervals + 1)
