"""Mercer analysis of dot-product kernels on spheres.

A zonal kernel g(x.x') on S^n diagonalizes in the Gegenbauer basis; its
operator eigenvalue at degree k is the basis coefficient rescaled by
sphere_volume(n) / a_coeff(k, n), with multiplicity a_coeff(k, n).
Coefficients come either from quadrature projection or from the closed
forms for the arc-cosine kernels and the depth-1 kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .rntk import KernelConfig, kernel_matrix
from .special import a_coeff, beta, gegenbauer, kappa0, kappa1, sphere_volume


class QuadratureError(RuntimeError):
    """Projection integrals failed to stabilize under order doubling."""


@dataclass(frozen=True)
class GegenbauerExpansion:
    """Coefficients c_0..c_K of g(u) = sum_k c_k P_{k,n}(u) on S^n."""

    n: int
    coeffs: np.ndarray

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def reconstruct(self, u) -> np.ndarray:
        """Evaluate the truncated expansion at correlations u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        total = np.zeros_like(u)
        for k, c in enumerate(self.coeffs):
            if c != 0.0:
                total += c * gegenbauer(k, self.n, u)
        return total


@dataclass(frozen=True)
class EigenSpectrum:
    """Operator eigenvalues lambda_0..lambda_K with multiplicities a_coeff(k, n)."""

    n: int
    eigenvalues: np.ndarray

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([a_coeff(k, self.n) for k in range(len(self.eigenvalues))])


def _project(g: Callable, n: int, K: int, order: int) -> np.ndarray:
    """Gauss-Legendre projection in the polar angle.

    Substituting t = cos(theta) turns the weight (1-t^2)^((n-2)/2) dt into
    sin(theta)^(n-1) d(theta) and removes the endpoint derivative
    singularities of the arc-cosine kernels, so the rule converges
    spectrally.
    """
    nodes, weights = leggauss(order)
    theta = (nodes + 1.0) * (np.pi / 2.0)
    w = weights * (np.pi / 2.0) * np.sin(theta) ** (n - 1)
    t = np.cos(theta)
    gv = np.asarray(g(t), dtype=float)
    coeffs = np.empty(K + 1)
    p_prev = np.ones_like(t)
    p = t.copy()
    for k in range(K + 1):
        if k == 0:
            pk = p_prev
        elif k == 1:
            pk = p
        else:
            p_prev, p = p, ((2 * k + n - 3) * t * p - (k - 1) * p_prev) / (n + k - 2)
            pk = p
        coeffs[k] = np.sum(w * gv * pk) / np.sum(w * pk * pk)
    return coeffs


def expand_kernel(g: Callable, n: int, K: int, rel_tol: float = 1e-8) -> GegenbauerExpansion:
    """Project a bounded zonal kernel onto P_{0..K,n} by quadrature.

    The rule order starts at 4K + 40 and doubles until the coefficient
    vector moves by less than rel_tol; five doublings without stabilizing
    raises QuadratureError.
    """
    if n < 2:
        raise ValueError("quadrature projection requires n >= 2")
    if K < 0:
        raise ValueError("truncation K must be >= 0")
    order = 4 * K + 40
    prev = _project(g, n, K, order)
    for _ in range(5):
        order *= 2
        cur = _project(g, n, K, order)
        scale = max(float(np.max(np.abs(cur))), 1e-30)
        if float(np.max(np.abs(cur - prev))) / scale <= rel_tol:
            return GegenbauerExpansion(n, cur)
        prev = cur
    raise QuadratureError(f"projection did not stabilize by order {order}")


def kappa0_coeffs_closed(n: int, K: int) -> GegenbauerExpansion:
    """Closed-form expansion of kappa0: 1/2 at k=0, odd-k terms only above."""
    c = np.zeros(K + 1)
    c[0] = 0.5
    for k in range(1, K + 1, 2):
        c[k] = a_coeff(k, n) * beta(k / 2.0, (n + 1) / 2.0) ** 2 / (2.0 * np.pi**2)
    return GegenbauerExpansion(n, c)


def kappa1_coeffs_closed(n: int, K: int) -> GegenbauerExpansion:
    """Closed-form expansion of kappa1: u/2 at k=1, even-k terms elsewhere.

    The k = 0 coefficient runs through beta(-1/2, (n+3)/2), which is finite
    for negative non-integer arguments.
    """
    c = np.zeros(K + 1)
    for k in range(0, K + 1, 2):
        c[k] = (
            (a_coeff(k, n) / (n + 1.0))
            * beta((k - 1) / 2.0, (n + 3) / 2.0) ** 2
            / (2.0 * np.pi**2)
        )
    if K >= 1:
        c[1] = 0.5
    return GegenbauerExpansion(n, c)


def coeffs_to_eigenvalues(e: GegenbauerExpansion) -> EigenSpectrum:
    """Map basis coefficients to operator eigenvalues: lambda_k = c_k vol(S^n) / a_coeff(k, n)."""
    vol = sphere_volume(e.n)
    lam = np.array([c * vol / a_coeff(k, e.n) for k, c in enumerate(e.coeffs)])
    return EigenSpectrum(e.n, lam)


def depth1_kernel(u):
    """The depth-1 kernel (kappa1(u) + u kappa0(u)) / 2 as a plain callable."""
    u = np.asarray(u, dtype=float)
    return 0.5 * (kappa1(u) + u * kappa0(u))


def rntk1_eigenvalues(n: int, K: int) -> EigenSpectrum:
    """Closed-form spectrum of the depth-1 kernel on S^n.

    lambda_1 = vol / (2(n+1)); even k carry the three-beta-term combination;
    odd k >= 3 vanish; lambda_0 comes from the k = 0 expansion coefficient.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    vol = sphere_volume(n)
    lam = np.zeros(K + 1)
    c0 = (
        beta(0.5, (n + 1) / 2.0) ** 2 + beta(-0.5, (n + 3) / 2.0) ** 2 / (n + 1.0)
    ) / (4.0 * np.pi**2)
    lam[0] = c0 * vol
    lam[1] = vol / (2.0 * (n + 1.0))
    for k in range(2, K + 1, 2):
        lam[k] = (
            vol
            / (4.0 * np.pi**2)
            * (
                beta((k + 1) / 2.0, (n + 1) / 2.0) ** 2 * (k + n - 1.0) / (2 * k + n - 1.0)
                + beta((k - 1) / 2.0, (n + 1) / 2.0) ** 2 * k / (2 * k + n - 1.0)
                + beta((k - 1) / 2.0, (n + 3) / 2.0) ** 2 / (n + 1.0)
            )
        )
    return EigenSpectrum(n, lam)


@dataclass(frozen=True)
class PositiveDefinitenessReport:
    min_eigenvalue: float
    is_pd: bool


def positive_definiteness_report(points, cfg: KernelConfig) -> PositiveDefinitenessReport:
    """Smallest Gram eigenvalue over a distinct point set, with a PD verdict.

    The verdict threshold is 1e-10 * n. Coincident points are rejected:
    they make the matrix singular by construction, not by kernel failure.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if m > 1:
        inner = points @ points.T
        iu = np.triu_indices(m, k=1)
        if np.any(inner[iu] >= 1.0 - 1e-12):
            raise ValueError("points must be pairwise distinct")
    km = kernel_matrix(points, cfg)
    lam0 = km.min_eigenvalue
    return PositiveDefinitenessReport(lam0, lam0 > 1e-10 * m)
