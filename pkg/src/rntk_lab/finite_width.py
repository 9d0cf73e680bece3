"""Finite-width residual network: forward pass, hand-derived backprop, the
empirical tangent kernel, and full-batch training of a mirror-initialized
pair.

Layer update: x_l = x_{l-1} + (alpha/sqrt(m)) V_l relu(sqrt(2/m) W_l x_{l-1}),
x_0 = (1/sqrt(m)) A x, output v . x_L. A and v stay fixed; every W_l, V_l
trains. The raw gradient kernel <grad f(x), grad f(x')> carries the factor
2 L alpha^2 (1+alpha^2)^(L-1) relative to the normalized depth kernel;
rnk_normalizer exposes it for width-convergence comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .regression import DivergenceError, RegressionProblem
from .reports import TrajectoryRow


@dataclass
class FiniteNet:
    """Parameter container; construct through FiniteNet.init."""

    m: int
    L: int
    alpha: float
    A: np.ndarray
    W: list[np.ndarray]
    V: list[np.ndarray]
    v: np.ndarray
    seed: int

    @classmethod
    def init(cls, m: int, L: int, alpha: float, d: int, seed: int, dtype=np.float64):
        """All parameters i.i.d. standard normal; draw order A, W_1, V_1, ..., v."""
        if m < 1 or L < 1 or d < 1:
            raise ValueError("m, L and d must be positive")
        dtype = np.dtype(dtype)
        if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
            raise ValueError("dtype must be float32 or float64")
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((m, d), dtype=dtype)
        W = [rng.standard_normal((m, m), dtype=dtype) for _ in range(L)]
        V = [rng.standard_normal((m, m), dtype=dtype) for _ in range(L)]
        v = rng.standard_normal(m, dtype=dtype)
        return cls(m=m, L=L, alpha=alpha, A=A, W=W, V=V, v=v, seed=seed)

    def copy(self) -> "FiniteNet":
        return FiniteNet(
            m=self.m,
            L=self.L,
            alpha=self.alpha,
            A=self.A.copy(),
            W=[w.copy() for w in self.W],
            V=[v.copy() for v in self.V],
            v=self.v.copy(),
            seed=self.seed,
        )


@dataclass(frozen=True)
class ForwardRecord:
    """Output plus per-layer state kept for backprop.

    layer_inputs[l] is x_l for l = 0..L (columns are samples); preacts[l]
    is the pre-ReLU activation of layer l+1.
    """

    output: np.ndarray
    layer_inputs: list[np.ndarray]
    preacts: list[np.ndarray]


def _forward_batch(net: FiniteNet, X: np.ndarray) -> ForwardRecord:
    """X: (count, d) rows of unit vectors; column-major internal layout."""
    dt = net.A.dtype.type
    x = (net.A @ X.T.astype(net.A.dtype, copy=False)) * dt(1.0 / np.sqrt(net.m))
    s2m = dt(np.sqrt(2.0 / net.m))
    a_sm = dt(net.alpha / np.sqrt(net.m))
    xs, hs = [x], []
    for l in range(net.L):
        h = s2m * (net.W[l] @ x)
        x = x + a_sm * (net.V[l] @ np.maximum(h, 0))
        hs.append(h)
        xs.append(x)
    return ForwardRecord(output=net.v @ x, layer_inputs=xs, preacts=hs)


def forward(net: FiniteNet, x) -> ForwardRecord:
    """Single-input forward pass; activations retained for backprop."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-8:
        raise ValueError("input must be unit-norm")
    rec = _forward_batch(net, x[None, :])
    return ForwardRecord(
        output=float(rec.output[0]),
        layer_inputs=[c[:, 0] for c in rec.layer_inputs],
        preacts=[c[:, 0] for c in rec.preacts],
    )


def _backward_state(net: FiniteNet, rec: ForwardRecord):
    """Adjoints of the output: g[l] = df/dx_l and s[l] the post-ReLU branch adjoint.

    ReLU subgradient at exactly 0 is taken as 0.
    """
    L = net.L
    dt = net.A.dtype.type
    s2m = dt(np.sqrt(2.0 / net.m))
    a_sm = dt(net.alpha / np.sqrt(net.m))
    cols = rec.layer_inputs[0].shape[1] if rec.layer_inputs[0].ndim == 2 else None
    vcol = net.v[:, None] if cols is not None else net.v
    g = [None] * (L + 1)
    s = [None] * L
    g[L] = np.broadcast_to(vcol, rec.layer_inputs[L].shape).copy() if cols else net.v.copy()
    for l in range(L - 1, -1, -1):
        branch = a_sm * (net.V[l].T @ g[l + 1])
        branch *= rec.preacts[l] > 0
        s[l] = branch
        g[l] = g[l + 1] + s2m * (net.W[l].T @ branch)
    return g, s


@dataclass(frozen=True)
class ParamGrads:
    """Gradients of the scalar output with respect to every trainable matrix."""

    W: list[np.ndarray]
    V: list[np.ndarray]


def grad_theta(net: FiniteNet, x) -> ParamGrads:
    """Exact reverse-mode gradients of f(x) w.r.t. all W_l, V_l."""
    rec = forward(net, x)
    g, s = _backward_state(net, rec)
    dt = net.A.dtype.type
    s2m = dt(np.sqrt(2.0 / net.m))
    a_sm = dt(net.alpha / np.sqrt(net.m))
    dW, dV = [], []
    for l in range(net.L):
        act = np.maximum(rec.preacts[l], 0)
        dW.append(s2m * np.outer(s[l], rec.layer_inputs[l]))
        dV.append(a_sm * np.outer(g[l + 1], act))
    return ParamGrads(W=dW, V=dV)


def empirical_rnk(net: FiniteNet, x, x2) -> float:
    """Raw tangent kernel <grad f(x), grad f(x2)> over the trainable parameters.

    Uses the rank-one structure of the per-layer gradients, so no m-by-m
    matrix is materialized.
    """
    X = np.stack([np.asarray(x, dtype=float), np.asarray(x2, dtype=float)])
    norms = np.linalg.norm(X, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise ValueError("inputs must be unit-norm")
    rec = _forward_batch(net, X)
    g, s = _backward_state(net, rec)
    a2m = net.alpha**2 / net.m
    total = 0.0
    for l in range(net.L):
        act = np.maximum(rec.preacts[l], 0)
        xl = rec.layer_inputs[l]
        total += a2m * float(g[l + 1][:, 0] @ g[l + 1][:, 1]) * float(act[:, 0] @ act[:, 1])
        total += (2.0 / net.m) * float(s[l][:, 0] @ s[l][:, 1]) * float(xl[:, 0] @ xl[:, 1])
    return total


def rnk_normalizer(L: int, alpha: float) -> float:
    """Scale relating the raw gradient kernel to the normalized depth kernel."""
    return 2.0 * L * alpha**2 * (1.0 + alpha**2) ** (L - 1)


def empirical_rnk_gram(net: FiniteNet, X: np.ndarray) -> np.ndarray:
    """Raw tangent-kernel Gram matrix over rows of X."""
    rec = _forward_batch(net, np.asarray(X, dtype=float))
    g, s = _backward_state(net, rec)
    a2m = net.alpha**2 / net.m
    n = X.shape[0]
    gram = np.zeros((n, n))
    for l in range(net.L):
        act = np.maximum(rec.preacts[l], 0)
        xl = rec.layer_inputs[l]
        gram += a2m * (g[l + 1].T @ g[l + 1]) * (act.T @ act)
        gram += (2.0 / net.m) * (s[l].T @ s[l]) * (xl.T @ xl)
    return gram


@dataclass
class MirrorPair:
    """Two networks with identical initial parameters, combined as (f_plus - f_minus) / 2.

    The sign flip lives in the combination, so the combined output is
    identically zero at initialization while the init-time tangent kernel
    keeps the single-net shape (scaled by 1/2). Both halves train.
    """

    net_plus: FiniteNet
    net_minus: FiniteNet
    combination: str = field(default="(f_plus - f_minus) / 2", init=False)

    @classmethod
    def init(cls, m: int, L: int, alpha: float, d: int, seed: int, dtype=np.float64):
        plus = FiniteNet.init(m, L, alpha, d, seed, dtype=dtype)
        return cls(net_plus=plus, net_minus=plus.copy())

    def output(self, X: np.ndarray) -> np.ndarray:
        fp = _forward_batch(self.net_plus, np.asarray(X, dtype=float)).output
        fm = _forward_batch(self.net_minus, np.asarray(X, dtype=float)).output
        return 0.5 * (np.asarray(fp, dtype=float) - np.asarray(fm, dtype=float))


def train_network(
    pair: MirrorPair,
    problem: RegressionProblem,
    lr: float,
    epochs: int,
    record_stride: int = 1,
    experiment_id: str = "train-network",
    seed: int = 0,
    gamma: float = 0.0,
    C: float | None = None,
    prediction_sink: dict | None = None,
) -> list[TrajectoryRow]:
    """Full-batch gradient descent on 0.5 * mean squared error, W and V only.

    Records train loss and test excess risk at epoch 0, every
    record_stride-th epoch, and the final epoch. The stability pre-check
    bounds lr * lambda_max of the effective kernel (pair tangent Gram / n).
    If prediction_sink is given it receives the test predictions keyed by
    recorded epoch.
    """
    if lr <= 0 or epochs < 0 or record_stride < 1:
        raise ValueError("need lr > 0, epochs >= 0, record_stride >= 1")
    net_p, net_m = pair.net_plus, pair.net_minus
    L, m = net_p.L, net_p.m
    dt = net_p.A.dtype.type
    X, y = problem.train_x, problem.train_y
    n = problem.n_train
    k_eff = 0.5 * empirical_rnk_gram(net_p, X) / n
    lam_max = float(np.linalg.eigvalsh(k_eff)[-1])
    if lr * lam_max >= 2.0:
        raise ValueError(
            f"unstable step: lr * lambda_max = {lr * lam_max:.3g} >= 2; reduce lr"
        )
    s2m = dt(np.sqrt(2.0 / m))
    a_sm = dt(net_p.alpha / np.sqrt(m))
    lr_t = dt(lr)
    rows: list[TrajectoryRow] = []
    losses = []
    c_val = net_p.alpha if C is None else C
    for e in range(epochs + 1):
        rec_p = _forward_batch(net_p, X)
        rec_m = _forward_batch(net_m, X)
        f = 0.5 * (rec_p.output.astype(float) - rec_m.output.astype(float))
        loss = 0.5 * float(np.mean((f - y) ** 2))
        losses.append(loss)
        if e >= 10 and losses[e] > 10.0 * losses[e - 10] and losses[e] > 1e-12:
            raise DivergenceError(
                f"train loss grew from {losses[e - 10]:.3g} to {losses[e]:.3g}; reduce lr"
            )
        if e % record_stride == 0 or e == epochs:
            test_pred = pair.output(problem.test_x)
            if prediction_sink is not None:
                prediction_sink[e] = test_pred
            rows.append(
                TrajectoryRow(
                    experiment_id=experiment_id,
                    seed=seed,
                    L=L,
                    gamma=gamma,
                    C=c_val,
                    step=e,
                    train_loss=loss,
                    test_error=float(np.mean((test_pred - problem.test_y_clean) ** 2)),
                )
            )
        if e == epochs:
            break
        residual = ((f - y) / n).astype(net_p.A.dtype)
        for half_sign, net, rec in ((dt(0.5), net_p, rec_p), (dt(-0.5), net_m, rec_m)):
            g, s = _backward_state(net, rec)
            for l in range(L):
                act = np.maximum(rec.preacts[l], 0)
                gw = g[l + 1] * (half_sign * residual)
                sw = s[l] * (half_sign * residual)
                net.V[l] -= lr_t * (a_sm * (gw @ act.T))
                net.W[l] -= lr_t * (s2m * (sw @ rec.layer_inputs[l].T))
    return rows
