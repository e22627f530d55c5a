"""NumPy implementation of the pair loop of the hard-core boson density matrix.

Used when the compiled extension is unavailable or disabled.  For every
pair a <= b it evaluates ``det(P) * psi(b) . P^{-1} psi(a)`` with
``P = I - 2 (C[b] - C[a])``, batched over b.  Pairs whose determinant is
tiny are flagged so the caller can redo them with the SVD adjugate.
"""
from __future__ import annotations

import numpy as np

NAME = "numpy"


def rspdm_upper(psi_t: np.ndarray, overlaps: np.ndarray, det_floor: float):
    """Fill the upper triangle of the density matrix.

    psi_t: (M, N) orbital samples; overlaps: (M, N, N) running overlaps.
    Returns ``(rho, flags)`` with ``rho`` symmetric and ``flags[a, b]`` set
    where the pair must be recomputed.
    """
    m, n = psi_t.shape
    rho = np.zeros((m, m))
    flags = np.zeros((m, m), dtype=np.uint8)
    eye = np.eye(n)
    for a in range(m):
        p = eye - 2.0 * (overlaps[a:] - overlaps[a])
        sign, logdet = np.linalg.slogdet(p)
        det = sign * np.exp(logdet)
        bad = np.abs(det) < det_floor
        ok = ~bad
        vals = np.zeros(m - a)
        if ok.any():
            rhs = np.broadcast_to(psi_t[a], (int(ok.sum()), n))[..., None]
            z = np.linalg.solve(p[ok], rhs)[..., 0]
            vals[ok] = det[ok] * np.einsum("bn,bn->b", psi_t[a:][ok], z)
        flags[a, a:] = bad
        rho[a, a:] = vals
        rho[a:, a] = vals
    return rho, flags
