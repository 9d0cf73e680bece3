"""Exact depth-L residual tangent kernel on the unit sphere.

Two interchangeable evaluations are provided: the normalized correlation
recursion (production path, stable at any depth) and the raw unnormalized
recursion (cross-validation path, overflows for constant branch scale at
large depth). Depth-limit diagnostics and Gram-matrix assembly live here
too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .special import clamp_correlation, kappa0, kappa1


def _k0s(u: float) -> float:
    """Scalar kappa0 on pre-clamped input (fast path for the raw recursion)."""
    u = min(1.0, max(-1.0, u))
    return (math.pi - math.acos(u)) / math.pi


def _k1s(u: float) -> float:
    """Scalar kappa1 on pre-clamped input (fast path for the raw recursion)."""
    u = min(1.0, max(-1.0, u))
    return (u * (math.pi - math.acos(u)) + math.sqrt(1.0 - u * u)) / math.pi

# Residual-branch scale alpha = C * L**-gamma; gamma in [0, 1].


@dataclass(frozen=True)
class KernelConfig:
    """Depth and residual-branch scaling of the kernel.

    alpha and beta are derived: alpha = C * L**-gamma,
    beta = (1 + alpha^2) / (2 alpha^2).
    """

    L: int
    gamma: float = 0.0
    C: float = 1.0
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("depth L must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.C <= 0.0:
            raise ValueError("scale C must be positive")
        alpha = self.C * float(self.L) ** (-self.gamma)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", (1.0 + alpha * alpha) / (2.0 * alpha * alpha))

    @classmethod
    def from_alpha(cls, L: int, alpha: float) -> "KernelConfig":
        """Fixed branch scale independent of depth (gamma = 0, C = alpha)."""
        return cls(L=L, gamma=0.0, C=alpha)


@dataclass(frozen=True)
class RntkTrace:
    """Full state of one normalized-recursion evaluation.

    u_seq[l] is the layer-l correlation (l = 0..L); p_factors[l-1] is the
    backward product multiplying layer l's summand; value is the kernel.
    """

    u_seq: np.ndarray
    p_factors: np.ndarray
    value: float


def _u_sequence(u0: np.ndarray, cfg: KernelConfig, steps: int) -> np.ndarray:
    """Iterate u <- (u + a^2 kappa1(u)) / (1 + a^2); returns (steps+1, ...) array."""
    a2 = cfg.alpha * cfg.alpha
    us = np.empty((steps + 1,) + u0.shape)
    us[0] = u0
    u = u0
    for l in range(1, steps + 1):
        # kappa1 can overshoot 1 by rounding; keep iterates inside [-1, 1].
        u = np.clip((u + a2 * kappa1(u)) / (1.0 + a2), -1.0, 1.0)
        us[l] = u
    return us


def rntk_values(u0, cfg: KernelConfig) -> np.ndarray:
    """Kernel values for an array of input correlations (normalized recursion).

    Entries exactly equal to 1 short-circuit to 1; see rntk_value for the
    scalar variant with the full trace.
    """
    u0 = np.atleast_1d(np.asarray(clamp_correlation(u0), dtype=float))
    a2 = cfg.alpha * cfg.alpha
    L = cfg.L
    us = _u_sequence(u0, cfg, L - 1)  # u_0 .. u_{L-1} feed the sum
    g = (1.0 + a2 * kappa0(us)) / (1.0 + a2)
    summands = kappa1(us) + us * kappa0(us)
    acc = np.ones_like(u0)  # P_{L+1} = 1
    total = np.zeros_like(u0)
    for l in range(L, 0, -1):
        total += acc * summands[l - 1]
        acc = acc * g[l - 1]
    values = total / (2.0 * L)
    values[u0 == 1.0] = 1.0
    return values


def rntk_value(u0: float, cfg: KernelConfig) -> RntkTrace:
    """Evaluate the depth-L kernel at one input correlation, keeping the trace.

    The diagonal u0 = 1 short-circuits: the correlation sequence is constant
    and the value is exactly 1.
    """
    u0 = clamp_correlation(float(u0))
    L = cfg.L
    if u0 == 1.0:
        return RntkTrace(np.ones(L + 1), np.ones(L), 1.0)
    a2 = cfg.alpha * cfg.alpha
    us = _u_sequence(np.array([u0]), cfg, L)[:, 0]
    g = (1.0 + a2 * kappa0(us[:L])) / (1.0 + a2)
    p = np.empty(L)
    acc = 1.0
    for l in range(L, 0, -1):  # p[l-1] = prod_{i=l}^{L-1} g[i]
        p[l - 1] = acc
        acc *= g[l - 1]
    value = float(np.sum(p * (kappa1(us[:L]) + us[:L] * kappa0(us[:L]))) / (2.0 * L))
    return RntkTrace(us, p, value)


def rntk_value_raw(u0: float, cfg: KernelConfig) -> float:
    """Kernel via the literal unnormalized recursion (cross-validation path).

    Tracks the layerwise covariance K_l and backward factor B_l directly;
    the (1+alpha^2)**(L-1) normalizer limits usable depth, guarded by
    L * log1p(alpha^2) < 700.
    """
    u0 = clamp_correlation(float(u0))
    L, a2 = cfg.L, cfg.alpha * cfg.alpha
    if L * np.log1p(a2) >= 700.0:
        raise OverflowError(
            f"(1+alpha^2)**L overflows at L={L}, alpha={cfg.alpha}; use rntk_value"
        )
    if u0 == 1.0:
        return 1.0
    K = [0.0] * L  # K[l] = K_l for l = 0..L-1
    K[0] = u0
    for l in range(1, L):
        scale = (1.0 + a2) ** (l - 1)
        K[l] = K[l - 1] + a2 * scale * _k1s(K[l - 1] / scale)
    B = [0.0] * (L + 2)  # B[l] = B_l, B[L+1] = 1
    B[L + 1] = 1.0
    for l in range(L, 0, -1):
        scale = (1.0 + a2) ** (l - 1)
        B[l] = B[l + 1] * (1.0 + a2 * _k0s(K[l - 1] / scale))
    c_L = 1.0 / (2.0 * L * (1.0 + a2) ** (L - 1))
    total = 0.0
    for l in range(1, L + 1):
        scale = (1.0 + a2) ** (l - 1)
        u = K[l - 1] / scale
        total += B[l + 1] * (scale * _k1s(u) + K[l - 1] * _k0s(u))
    return float(c_L * total)


def limit_kernel_constant(u0: float) -> float:
    """Infinite-depth limit for a depth-independent branch scale: 1 on the diagonal, 1/4 off."""
    u0 = clamp_correlation(float(u0))
    return 1.0 if u0 == 1.0 else 0.25


def limit_kernel_fast_decay(u0) -> float:
    """Infinite-depth limit under fast branch decay (gamma > 1/2): the one-hidden-layer kernel.

    Equals (kappa1(u) + u * kappa0(u)) / 2, i.e. the depth-1 kernel.
    """
    u0 = clamp_correlation(u0)
    return 0.5 * (kappa1(u0) + u0 * kappa0(u0))


def phi1(rho, cfg: KernelConfig):
    """One step of the correlation map: (rho + alpha^2 kappa1(rho)) / (1 + alpha^2)."""
    rho = clamp_correlation(rho)
    a2 = cfg.alpha * cfg.alpha
    return (rho + a2 * kappa1(rho)) / (1.0 + a2)


@dataclass(frozen=True)
class DegenerationReport:
    """Sandwich-bound diagnostics for the correlation sequence at fixed depth."""

    beta: float
    n_alpha: int
    lower_bounds: np.ndarray  # cosine lower bound for u_n, n = 1..L
    lower_holds: bool  # u_n >= lower bound at every n
    upper_holds: bool  # one-step gain within the (1-rho)^(3/2) sandwich at every visited point


def degeneration_diagnostics(cfg: KernelConfig, u0: float) -> DegenerationReport:
    """Check the cosine lower bound and the one-step-gain sandwich along the u-sequence.

    The integer n_alpha is the unique integer in
    [1/(1-((2b-1)/2b)^(1/3)) - 2, 1/(1-((2b-1)/2b)^(1/3)) - 1], b = beta,
    resolved by rounding the lower endpoint up. The lower bound is checked for
    n = 1..L (it provably fails at n = 0 for u0 near -1).
    """
    u0 = clamp_correlation(float(u0))
    if u0 >= 1.0:
        raise ValueError("diagnostics require an off-diagonal input, u0 < 1")
    b = cfg.beta
    lower_expr = 1.0 / (1.0 - ((2.0 * b - 1.0) / (2.0 * b)) ** (1.0 / 3.0)) - 2.0
    n_alpha = int(np.ceil(lower_expr))
    us = _u_sequence(np.array([u0]), cfg, cfg.L)[:, 0]
    n = np.arange(1, cfg.L + 1)
    lower = np.cos(2.0 * np.pi * b * (1.0 - ((n + n_alpha) / (n + n_alpha + 1.0)) ** 3))
    lower_holds = bool(np.all(us[1:] >= lower))
    gaps = np.diff(us)
    rems = (1.0 - us[:-1]) ** 1.5
    lo = np.sqrt(2.0) / (3.0 * np.pi * b) * rems
    hi = np.sqrt(2.0) / (8.0 * b) * rems
    # Allow rounding slack: the bounds are tight only at u = 1.
    upper_holds = bool(np.all(gaps <= hi + 1e-12) and np.all(gaps >= lo - 1e-12))
    return DegenerationReport(b, n_alpha, lower, lower_holds, upper_holds)


def _validate_unit(points: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array of row vectors")
    norms = np.linalg.norm(points, axis=1)
    bad = np.nonzero(np.abs(norms - 1.0) > tol)[0]
    if bad.size:
        raise ValueError(f"point {bad[0]} is not unit-norm (|x| = {norms[bad[0]]:.12g})")
    return points


@dataclass
class KernelMatrix:
    """Symmetric Gram matrix of the kernel over a point set; unit diagonal."""

    n: int
    entries: np.ndarray

    @cached_property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def kernel_matrix(points, cfg: KernelConfig) -> KernelMatrix:
    """Assemble the Gram matrix over unit vectors, one evaluation per unordered pair."""
    points = _validate_unit(points)
    m = points.shape[0]
    entries = np.eye(m)
    iu = np.triu_indices(m, k=1)
    if iu[0].size:
        u = np.clip(points @ points.T, -1.0, 1.0)[iu]
        vals = rntk_values(u, cfg)
        entries[iu] = vals
        entries[(iu[1], iu[0])] = vals
    return KernelMatrix(n=m, entries=entries)


def cross_kernel(points_a, points_b, cfg: KernelConfig) -> np.ndarray:
    """Kernel values between two point sets, shape (len(a), len(b))."""
    a = _validate_unit(points_a)
    b = _validate_unit(points_b)
    u = np.clip(a @ b.T, -1.0, 1.0)
    return rntk_values(u.ravel(), cfg).reshape(u.shape)
