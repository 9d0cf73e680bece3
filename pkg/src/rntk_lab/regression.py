"""Kernel regression under gradient flow / gradient descent with early stopping.

The flow solution is closed-form through the eigendecomposition of the
training Gram matrix; discrete gradient descent is its Euler discretization
on the coefficient vector. Predictors are linear combinations of kernel
sections at the training points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rntk import KernelConfig, _validate_unit, cross_kernel, kernel_matrix


class IllConditionedKernelError(ValueError):
    """Training Gram matrix is numerically singular."""


class DivergenceError(RuntimeError):
    """Gradient descent blew up; lower the learning rate."""


@dataclass(frozen=True)
class RegressionProblem:
    """Unit-sphere inputs with noisy train targets and clean test targets."""

    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y_clean: np.ndarray
    noise_sigma: float = 0.0

    def __post_init__(self):
        train_x = _validate_unit(self.train_x)
        test_x = _validate_unit(self.test_x)
        object.__setattr__(self, "train_x", train_x)
        object.__setattr__(self, "test_x", test_x)
        object.__setattr__(self, "train_y", np.asarray(self.train_y, dtype=float))
        object.__setattr__(self, "test_y_clean", np.asarray(self.test_y_clean, dtype=float))
        if len(self.train_x) < 1 or len(self.test_x) < 1:
            raise ValueError("need at least one train and one test point")
        if len(self.train_y) != len(self.train_x) or len(self.test_y_clean) != len(self.test_x):
            raise ValueError("target lengths must match input counts")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    @property
    def n_train(self) -> int:
        return len(self.train_x)


@dataclass(frozen=True)
class FlowState:
    """Predictor snapshot: f(x) = sum_i coefficients[i] * r(x, train_x[i]).

    time is the continuous flow time; for discrete descent it is lr * epoch
    and epoch records the step index.
    """

    time: float
    train_predictions: np.ndarray
    coefficients: np.ndarray
    epoch: int | None = None


def _check_conditioning(eigvals: np.ndarray, n: int) -> None:
    lam0 = float(eigvals[0])
    if lam0 < 1e-10 * n:
        raise IllConditionedKernelError(
            f"kernel matrix is ill-conditioned: min eigenvalue {lam0:.3e} < {1e-10 * n:.1e}"
        )


def _phi(t: float, lam: np.ndarray) -> np.ndarray:
    """(1 - exp(-t*lam)) / lam, with a series branch for small t*lam."""
    tl = t * lam
    out = np.empty_like(lam)
    small = tl < 1e-4
    out[small] = t * (1.0 - tl[small] / 2.0 + tl[small] ** 2 / 6.0)
    out[~small] = -np.expm1(-tl[~small]) / lam[~small]
    return out


def fit_gradient_flow(
    problem: RegressionProblem, cfg: KernelConfig, times
) -> list[FlowState]:
    """Closed-form kernel gradient flow evaluated at the given ascending times.

    f_t(X) = (I - exp(-tK)) y through the eigendecomposition of K; the
    coefficient vector is K^+ (I - exp(-tK)) y without ever forming K^-1.
    """
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    if sorted(times) != times:
        raise ValueError("times must be sorted ascending")
    km = kernel_matrix(problem.train_x, cfg)
    lam, q = np.linalg.eigh(km.entries)
    _check_conditioning(lam, problem.n_train)
    qty = q.T @ problem.train_y
    states = []
    for t in times:
        coeff = q @ (_phi(t, lam) * qty)
        preds = q @ ((1.0 - np.exp(-t * lam)) * qty)
        states.append(FlowState(time=t, train_predictions=preds, coefficients=coeff))
    return states


def fit_gradient_descent(
    problem: RegressionProblem,
    cfg: KernelConfig,
    lr: float,
    epochs: int,
    record_stride: int = 1,
) -> list[FlowState]:
    """Euler discretization c <- c + lr (y - K c) from c = 0.

    States are recorded at epoch 0, at every record_stride-th epoch, and at
    the final epoch. Requires lr * lambda_max(K) < 2; raises DivergenceError
    if the train loss still grows 10x over a 10-epoch window.
    """
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    km = kernel_matrix(problem.train_x, cfg)
    K = km.entries
    eigvals = np.linalg.eigvalsh(K)
    _check_conditioning(eigvals, problem.n_train)
    lam_max = float(eigvals[-1])
    if lr * lam_max >= 2.0:
        raise ValueError(
            f"unstable step: lr * lambda_max = {lr * lam_max:.3g} >= 2; reduce lr"
        )
    y = problem.train_y
    n = problem.n_train
    c = np.zeros(n)
    states = []
    losses = []
    for e in range(epochs + 1):
        preds = K @ c
        loss = 0.5 * float(np.sum((preds - y) ** 2)) / n
        losses.append(loss)
        if e >= 10 and losses[e] > 10.0 * losses[e - 10] and losses[e] > 1e-12:
            raise DivergenceError(
                f"train loss grew from {losses[e - 10]:.3g} to {losses[e]:.3g}; reduce lr"
            )
        if e % record_stride == 0 or e == epochs:
            states.append(
                FlowState(time=lr * e, train_predictions=preds, coefficients=c.copy(), epoch=e)
            )
        if e < epochs:
            c = c + lr * (y - preds)
    return states


def predict(state: FlowState, problem: RegressionProblem, cfg: KernelConfig, x) -> np.ndarray:
    """Out-of-sample predictions r(x, X) @ coefficients."""
    return cross_kernel(x, problem.train_x, cfg) @ state.coefficients


def excess_risk(state: FlowState, problem: RegressionProblem, cfg: KernelConfig) -> float:
    """Mean squared error against the clean test targets."""
    preds = predict(state, problem, cfg, problem.test_x)
    return float(np.mean((preds - problem.test_y_clean) ** 2))


def excess_risk_curve(
    states: list[FlowState], problem: RegressionProblem, cfg: KernelConfig
) -> np.ndarray:
    """excess_risk for every state, computing the cross kernel once."""
    kx = cross_kernel(problem.test_x, problem.train_x, cfg)
    coeffs = np.stack([s.coefficients for s in states], axis=1)
    preds = kx @ coeffs
    return np.mean((preds - problem.test_y_clean[:, None]) ** 2, axis=0)


def early_stopping_select(
    states: list[FlowState],
    problem: RegressionProblem,
    cfg: KernelConfig,
    holdout_fraction: float,
    seed: int = 0,
) -> FlowState:
    """Pick the recorded state whose time minimizes holdout error.

    The train set is split once (seeded); the predictor is refit on the
    reduced train set at every recorded time and scored on the holdout.
    Ties go to the earliest time. The returned state is the original
    full-train state at the winning time.
    """
    if not 0.0 < holdout_fraction < 0.5:
        raise ValueError("holdout_fraction must lie in (0, 1/2)")
    if len(states) < 2:
        raise ValueError("need at least two recorded states")
    n = problem.n_train
    if n < 4:
        raise ValueError("need at least four training points to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_hold = max(1, int(np.floor(holdout_fraction * n)))
    hold, keep = perm[:n_hold], perm[n_hold:]
    reduced = RegressionProblem(
        train_x=problem.train_x[keep],
        train_y=problem.train_y[keep],
        test_x=problem.test_x,
        test_y_clean=problem.test_y_clean,
        noise_sigma=problem.noise_sigma,
    )
    times = [s.time for s in states]
    refits = fit_gradient_flow(reduced, cfg, sorted(times))
    refits = {s.time: s for s in refits}
    kx = cross_kernel(problem.train_x[hold], reduced.train_x, cfg)
    y_hold = problem.train_y[hold]
    best_idx, best_mse = 0, np.inf
    for i, s in enumerate(states):
        mse = float(np.mean((kx @ refits[s.time].coefficients - y_hold) ** 2))
        if mse < best_mse - 1e-15:
            best_idx, best_mse = i, mse
    return states[best_idx]
