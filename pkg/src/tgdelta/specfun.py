"""Real-argument special functions used by the delta-split oscillator.

Gamma is evaluated with a Lanczos approximation (g = 7, nine terms) and the
reflection formula below 1/2.  The Kummer function of the second kind is only
needed for b = 1/2 and is evaluated either from its integral representation
(a > 0) or from Kummer M functions / recurrences in a (a <= 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GammaPoleError",
    "ConvergenceError",
    "SignedLogValue",
    "gamma_ln_signed",
    "rgamma",
    "kummer_m",
    "kummer_u_half",
    "log_kummer_u_half",
    "hermite_poly",
]

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)


class GammaPoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


class ConvergenceError(ArithmeticError):
    """A series, quadrature or iteration failed to reach its tolerance."""


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue(-math.inf, 0)
        return SignedLogValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLogValue")
        if self.sign == 0:
            return self
        return SignedLogValue(self.log_magnitude - other.log_magnitude, self.sign * other.sign)


def _lanczos_lgamma(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def _sin_pi(x: float) -> float:
    n = round(x)
    s = math.sin(math.pi * (x - n))
    return -s if n % 2 else s


def gamma_ln_signed(x: float) -> SignedLogValue:
    """Return ``log|Gamma(x)|`` together with the sign of ``Gamma(x)``.

    Raises
    ------
    GammaPoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise GammaPoleError(f"Gamma has a pole at x={x!r}")
    if x >= 0.5:
        return SignedLogValue(_lanczos_lgamma(x), 1)
    s = _sin_pi(x)
    log_mag = math.log(math.pi) - math.log(abs(s)) - _lanczos_lgamma(1.0 - x)
    return SignedLogValue(log_mag, 1 if s > 0 else -1)


def rgamma(x: float) -> float:
    """Reciprocal Gamma, zero at the poles of Gamma."""
    try:
        g = gamma_ln_signed(x)
    except GammaPoleError:
        return 0.0
    return g.sign * math.exp(-g.log_magnitude)


def _m_series(a: float, b: float, z: np.ndarray, tol: float, max_terms: int):
    term = np.ones_like(z)
    total = np.ones_like(z)
    biggest = np.ones_like(z)
    for k in range(max_terms):
        term = term * (a + k) / (b + k) * z / (k + 1)
        total = total + term
        np.maximum(biggest, np.abs(term), out=biggest)
        if a + k == 0.0:
            return total, biggest, True
        if np.all(np.abs(term) <= tol * np.abs(total)):
            return total, biggest, True
    return total, biggest, False


def _m_asymptotic(a: float, b: float, z: float, tol: float) -> float | None:
    # Dominant term for large positive z; the recessive part is O(exp(-z)) relative.
    ra = rgamma(a)
    if ra == 0.0:
        return None
    total, term = 1.0, 1.0
    prev = math.inf
    for s in range(60):
        term *= (1.0 - a + s) * (b - a + s) / ((s + 1) * z)
        if abs(term) > prev:
            return None
        total += term
        prev = abs(term)
        if abs(term) <= tol * abs(total):
            g_b = gamma_ln_signed(b)
            logmag = g_b.log_magnitude + z + (a - b) * math.log(z)
            return g_b.sign * ra * math.exp(logmag) * total
    return None


def kummer_m(a: float, b: float, z, tol: float = 1e-15, max_terms: int = 5000):
    """Kummer's function M(a, b, z) = 1F1(a; b; z) for z >= 0.

    Uses the power series; for large z, where the series loses too many digits,
    falls back to the leading asymptotic expansion.
    """
    if b <= 0 and b == math.floor(b):
        raise GammaPoleError(f"M(a, b, z) is undefined for b={b!r}")
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz < 0):
        raise ValueError("kummer_m requires z >= 0")
    total, biggest, ok = _m_series(a, b, zz, tol, max_terms)
    # a terminating series is a polynomial: its value is exact up to rounding
    terminating = a <= 0 and a == math.floor(a)
    lost = (biggest > 1e6 * np.abs(total)) & (not terminating)
    if not ok or np.any(lost):
        redo = ~np.isfinite(total) | lost | (not ok)
        for i in np.flatnonzero(redo):
            val = _m_asymptotic(a, b, float(zz[i]), tol) if zz[i] > 20 else None
            if val is None:
                if ok and not lost[i]:
                    continue
                raise ConvergenceError(f"M({a}, {b}, {zz[i]}) did not converge")
            total[i] = val
    return total if np.ndim(z) else float(total[0])


def _u_integral_log(a: float, z: np.ndarray, rtol: float = 1e-10, max_level: int = 14) -> np.ndarray:
    """log U(a, 1/2, z) for a > 0 by trapezoid in s = log t with node doubling."""
    c = a + 0.5
    # saddle of a*s - z*e^s - c*log(1+e^s)
    tpk = np.where(
        z > 0,
        (-(z + 0.5) + np.sqrt((z + 0.5) ** 2 + 4.0 * a * z)) / (2.0 * np.where(z > 0, z, 1.0)),
        2.0 * a,
    )
    # cancellation in the quadratic root for large z
    small = z * tpk < 1e-3 * a
    tpk = np.where(small & (z > 0), a / (z + 0.5 + np.sqrt(np.maximum(z, 0.0))), tpk)
    tpk = np.maximum(tpk, 1e-300)
    spk = np.log(tpk)

    def phi(s):
        es = np.exp(np.minimum(s, 700.0))
        return a * s - z[:, None] * es - c * np.logaddexp(0.0, s)

    peak = phi(spk[:, None])[:, 0]
    curv = z * tpk + c * tpk / (1.0 + tpk) ** 2
    sigma = 1.0 / np.sqrt(np.maximum(curv, 1e-300))
    drop = 46.0
    lo = spk - np.maximum(8.0 * sigma, drop / a)
    hi = spk + np.maximum(8.0 * sigma, 2.0)
    # extend ranges until both ends are negligible
    for _ in range(60):
        bad_lo = phi(lo[:, None])[:, 0] > peak - drop
        bad_hi = phi(hi[:, None])[:, 0] > peak - drop
        if not (bad_lo.any() or bad_hi.any()):
            break
        lo = np.where(bad_lo, lo - (hi - lo), lo)
        hi = np.where(bad_hi, hi + (hi - lo), hi)
    else:
        raise ConvergenceError("could not bracket the U integrand")

    width = hi - lo
    n = 32
    u = np.linspace(0.0, 1.0, n + 1)
    vals = np.exp(phi(lo[:, None] + width[:, None] * u[None, :]) - peak[:, None])
    acc = (vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1])) / n
    for _ in range(max_level):
        mid = (np.arange(n) + 0.5) / n
        vals = np.exp(phi(lo[:, None] + width[:, None] * mid[None, :]) - peak[:, None])
        new = 0.5 * (acc + vals.mean(axis=1))
        n *= 2
        done = np.abs(new - acc) <= rtol * np.abs(new)
        acc = new
        if np.all(done):
            break
    else:
        raise ConvergenceError(f"U({a}, 1/2, z) quadrature did not converge")
    return np.log(acc * width) + peak - gamma_ln_signed(a).log_magnitude


def _u_connection(a: float, z: np.ndarray) -> np.ndarray:
    # U(a,1/2,z) = G(1/2)/G(a+1/2) M(a,1/2,z) + G(-1/2)/G(a) sqrt(z) M(a+1/2,3/2,z)
    out = np.zeros_like(z)
    c1 = _SQRT_PI * rgamma(a + 0.5)
    c2 = -2.0 * _SQRT_PI * rgamma(a)
    if c1 != 0.0:
        out += c1 * kummer_m(a, 0.5, z)
    if c2 != 0.0:
        out += c2 * np.sqrt(z) * kummer_m(a + 0.5, 1.5, z)
    return out


def _u_recurrence(a: float, z: np.ndarray) -> np.ndarray:
    # U(a-1) = (2a + z - b) U(a) - a (a - b + 1) U(a+1), run downward from a+m, a+m+1 > 0
    m = int(math.floor(1.0 - a)) + 1
    top = a + m
    log_hi = _u_integral_log(top + 1.0, z)
    log_lo = _u_integral_log(top, z)
    shift = log_lo
    u_next = np.exp(log_hi - shift)
    u_cur = np.ones_like(z)
    aa = top
    for _ in range(m):
        u_prev = (2.0 * aa + z - 0.5) * u_cur - aa * (aa + 0.5) * u_next
        u_next, u_cur = u_cur, u_prev
        aa -= 1.0
    return u_cur * np.exp(shift)


def kummer_u_half(a: float, z, method: str = "auto"):
    """Kummer's function of the second kind U(a, 1/2, z) for z >= 0.

    ``method`` selects the evaluation route: ``"integral"`` (a > 0 only),
    ``"connection"`` (two Kummer M terms), ``"recurrence"`` (downward
    recurrence in a seeded by the integral), or ``"auto"``.  ``auto`` uses the
    integral for a > 0, the connection formula for a <= 0 and z <= 1, and the
    recurrence for a <= 0 beyond that, where the two M terms cancel.
    """
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zz < 0):
        raise ValueError("kummer_u_half requires z >= 0")
    if a == 0.0:
        out = np.ones_like(zz)
    elif method == "integral" or (method == "auto" and a >= 0.1):
        if a <= 0:
            raise ValueError("integral representation needs a > 0")
        out = np.exp(_u_integral_log(a, zz))
    elif method == "connection":
        out = _u_connection(a, zz)
    elif method == "recurrence":
        out = _u_recurrence(a, zz)
    elif method == "auto":
        out = np.empty_like(zz)
        near = zz <= 1.0
        if near.any():
            out[near] = _u_connection(a, zz[near])
        if (~near).any():
            out[~near] = _u_recurrence(a, zz[~near])
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if np.ndim(z) else float(out[0])


def log_kummer_u_half(a: float, z) -> np.ndarray:
    """``log U(a, 1/2, z)`` for a > 0, where U is positive and may underflow."""
    if a <= 0:
        raise ValueError("log_kummer_u_half needs a > 0")
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    out = _u_integral_log(a, zz)
    return out if np.ndim(z) else float(out[0])


def hermite_poly(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if x.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if x.ndim else float(h)
