"""Scalar special functions: ReLU arc-cosine kernels, Gamma/Beta, Gegenbauer
polynomials and sphere constants.

Everything here is a pure function; array inputs are handled elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn

# Inputs to arccos/sqrt may drift outside [-1, 1] by rounding; values further
# out than HARD_TOL indicate a caller bug and are rejected.
HARD_TOL = 1e-6


def clamp_correlation(u):
    """Clamp a correlation to [-1, 1], rejecting values out by more than HARD_TOL.

    Accepts scalars or arrays; non-finite entries raise ValueError.
    """
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("correlation input must be finite")
    if np.any(np.abs(arr) > 1.0 + HARD_TOL):
        worst = float(np.max(np.abs(arr)))
        raise ValueError(f"correlation magnitude {worst} exceeds 1 by more than {HARD_TOL}")
    clipped = np.clip(arr, -1.0, 1.0)
    return float(clipped) if np.isscalar(u) or arr.ndim == 0 else clipped


def kappa0(u):
    """Zeroth ReLU arc-cosine kernel: (pi - arccos(u)) / pi."""
    u = clamp_correlation(u)
    return (np.pi - np.arccos(u)) / np.pi


def kappa1(u):
    """First ReLU arc-cosine kernel: (u*(pi - arccos(u)) + sqrt(1 - u^2)) / pi."""
    u = clamp_correlation(u)
    return (u * (np.pi - np.arccos(u)) + np.sqrt(1.0 - u * u)) / np.pi


@dataclass(frozen=True)
class SeriesCoeffs:
    """Maclaurin coefficients c[0..order]; coeffs[p] multiplies u**p."""

    coeffs: np.ndarray
    truncation_order: int

    def __post_init__(self):
        if len(self.coeffs) != self.truncation_order + 1:
            raise ValueError("coeffs length must be truncation_order + 1")

    def __call__(self, u):
        """Evaluate the truncated series at u (Horner)."""
        acc = np.zeros_like(np.asarray(u, dtype=float))
        for c in self.coeffs[::-1]:
            acc = acc * u + c
        return acc


def kappa0_maclaurin(order: int) -> SeriesCoeffs:
    """Series of kappa0 about 0: 1/2 + sum_n (2n)! u^(2n+1) / (pi 4^n (n!)^2 (2n+1)).

    Coefficients go through log-Gamma so large orders underflow to 0 instead
    of overflowing.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    c = np.zeros(order + 1)
    c[0] = 0.5
    for p in range(1, order + 1, 2):
        n = (p - 1) // 2
        logc = gammaln(2 * n + 1) - n * np.log(4.0) - 2 * gammaln(n + 1) - np.log(2 * n + 1.0)
        c[p] = np.exp(logc) / np.pi
    return SeriesCoeffs(c, order)


def kappa1_maclaurin(order: int) -> SeriesCoeffs:
    """Series of kappa1 about 0: 1/pi + u/2 + sum_n (2n)! u^(2n+2) / (2 pi 4^n n! (n+1)! (2n+1))."""
    if order < 0:
        raise ValueError("order must be >= 0")
    c = np.zeros(order + 1)
    c[0] = 1.0 / np.pi
    if order >= 1:
        c[1] = 0.5
    for p in range(2, order + 1, 2):
        n = (p - 2) // 2
        logc = (
            gammaln(2 * n + 1)
            - n * np.log(4.0)
            - gammaln(n + 1)
            - gammaln(n + 2)
            - np.log(2 * n + 1.0)
        )
        c[p] = np.exp(logc) / (2.0 * np.pi)
    return SeriesCoeffs(c, order)


def log_gamma(x: float) -> float:
    """log|Gamma(x)|; poles at non-positive integers raise ValueError."""
    if x <= 0 and x == np.floor(x):
        raise ValueError(f"Gamma pole at x={x}")
    return float(gammaln(x))


def beta(a: float, b: float) -> float:
    """Beta function Gamma(a)Gamma(b)/Gamma(a+b) with sign tracking.

    Valid for negative non-integer arguments (reflection handled through
    gammasgn); returns 0 when a+b hits a Gamma pole.
    """
    for name, x in (("a", a), ("b", b)):
        if x <= 0 and x == np.floor(x):
            raise ValueError(f"Gamma pole at {name}={x}")
    if a + b <= 0 and a + b == np.floor(a + b):
        # Gamma(a+b) pole in the denominator: the ratio vanishes.
        return 0.0
    sign = gammasgn(a) * gammasgn(b) * gammasgn(a + b)
    return float(sign * np.exp(gammaln(a) + gammaln(b) - gammaln(a + b)))


def gegenbauer(k: int, n: int, t):
    """Zonal Gegenbauer polynomial P_{k,n}(t) on the sphere S^n, with P_{k,n}(1) = 1.

    Three-term recurrence in k at fixed n; at n = 1 the recurrence reduces to
    Chebyshev polynomials of the first kind. Accepts scalar or array t.

    Args:
        k: polynomial degree, >= 0.
        n: sphere dimension index, >= 1.
        t: evaluation points in [-1, 1].
    """
    if k < 0:
        raise ValueError("degree k must be >= 0")
    if n < 1:
        raise ValueError("sphere dimension n must be >= 1")
    t = clamp_correlation(t)
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if k == 0:
        out = np.ones_like(t)
    elif k == 1:
        out = t.copy()
    else:
        p_prev, p = np.ones_like(t), t.copy()
        for j in range(2, k + 1):
            p_prev, p = p, ((2 * j + n - 3) * t * p - (j - 1) * p_prev) / (n + j - 2)
        out = p
    return float(out[0]) if scalar else out


def sphere_volume(n: int) -> float:
    """Surface measure of S^n: 2 pi^((n+1)/2) / Gamma((n+1)/2)."""
    if n < 1:
        raise ValueError("sphere dimension n must be >= 1")
    return float(2.0 * np.pi ** ((n + 1) / 2.0) / np.exp(gammaln((n + 1) / 2.0)))


def a_coeff(k: int, n: int) -> float:
    """Dimension of degree-k spherical harmonics on S^n: (2k+n-1) Gamma(k+n-1) / (k! Gamma(n))."""
    if k < 0:
        raise ValueError("degree k must be >= 0")
    if n < 1:
        raise ValueError("sphere dimension n must be >= 1")
    if k == 0:
        return 1.0
    if n == 1:
        # Limit of the formula as the Gamma(n-1)/Gamma(n) ratio degenerates.
        return 2.0
    return float((2 * k + n - 1) * np.exp(gammaln(k + n - 1) - gammaln(k + 1) - gammaln(n)))
