"""Seeded experiment drivers behind the service endpoints and the CLI.

Every driver is a pure function of its arguments: the master seed fans out
to per-cell child seeds through numpy's SeedSequence, so reruns with the
same flags reproduce identical CSV bytes regardless of execution order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import finite_width as fw
from .plots import line_chart
from .regression import (
    RegressionProblem,
    excess_risk_curve,
    fit_gradient_descent,
)
from .reports import (
    EigenRow,
    SweepRow,
    TrajectoryRow,
    WidthGapRow,
    format_value,
    render_csv,
    sort_trajectory,
)
from .rntk import KernelConfig, cross_kernel, rntk_values
from .spectral import coeffs_to_eigenvalues, depth1_kernel, expand_kernel, rntk1_eigenvalues
from .special import a_coeff


def sample_sphere(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform points on the unit sphere in R^dim (normalized Gaussians)."""
    x = rng.standard_normal((count, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass(frozen=True)
class DriverResult:
    rows: list
    csv: str
    svg: str | None = None


def kernel_sweep(
    alphas, L_grid, replications: int, dim: int = 3, seed: int = 0, plot: bool = True
) -> DriverResult:
    """Mean kernel value over random input pairs for each (alpha, depth) cell."""
    alphas = [float(a) for a in alphas]
    L_grid = [int(L) for L in L_grid]
    if replications < 2:
        raise ValueError("need at least two replications for a standard error")
    cells = [(a, L) for a in alphas for L in L_grid]
    children = np.random.SeedSequence(seed).spawn(len(cells))
    rows = []
    for (alpha, L), child in zip(cells, children):
        rng = np.random.default_rng(child)
        x = sample_sphere(rng, replications, dim)
        x2 = sample_sphere(rng, replications, dim)
        u = np.sum(x * x2, axis=1)
        vals = rntk_values(u, KernelConfig.from_alpha(L, alpha))
        rows.append(
            SweepRow(
                alpha=alpha,
                L=L,
                mean_value=float(np.mean(vals)),
                std_error=float(np.std(vals, ddof=1) / np.sqrt(replications)),
                replications=replications,
            )
        )
    config = {
        "experiment": "kernel-sweep",
        "seed": seed,
        "alphas": ",".join(format_value(a) for a in alphas),
        "L_grid": ",".join(str(L) for L in L_grid),
        "replications": replications,
        "dim": dim,
    }
    csv_text = render_csv(rows, config)
    svg = None
    if plot:
        series = []
        for alpha in alphas:
            sub = [r for r in rows if r.alpha == alpha]
            series.append(
                {
                    "label": f"alpha={alpha:g}",
                    "x": [r.L for r in sub],
                    "y": [r.mean_value for r in sub],
                    "band": (
                        [r.mean_value - r.std_error for r in sub],
                        [r.mean_value + r.std_error for r in sub],
                    ),
                }
            )
        svg = line_chart(
            series,
            title="Mean kernel value vs depth",
            xlabel="depth L",
            ylabel="mean kernel value",
        )
    return DriverResult(rows=rows, csv=csv_text, svg=svg)


def gen_data(
    n: int = 200,
    dim: int = 3,
    beta_vector=None,
    noise: float = 0.1,
    seed: int = 0,
) -> DriverResult:
    """Linear target on the sphere: y = <x, beta> + noise * eps, 80/20 split."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if n < 2:
        raise ValueError("n must be >= 2")
    beta = np.ones(dim) if beta_vector is None else np.asarray(beta_vector, dtype=float)
    if beta.shape != (dim,):
        raise ValueError("beta_vector length must equal dim")
    rng = np.random.default_rng(seed)
    x = sample_sphere(rng, n, dim)
    y_clean = x @ beta
    y_noisy = y_clean + noise * rng.standard_normal(n)
    n_train = (4 * n) // 5
    config = {
        "experiment": "gen-data",
        "seed": seed,
        "n": n,
        "dim": dim,
        "beta": ",".join(format_value(b) for b in beta),
        "noise": noise,
        "n_train": n_train,
        "n_test": n - n_train,
    }
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in config.items()) + "\n")
    cols = [f"x{i + 1}" for i in range(dim)] + ["y_clean", "y_noisy", "split"]
    buf.write(",".join(cols) + "\n")
    for i in range(n):
        split = "train" if i < n_train else "test"
        vals = [format_value(float(v)) for v in x[i]]
        vals += [format_value(float(y_clean[i])), format_value(float(y_noisy[i])), split]
        buf.write(",".join(vals) + "\n")
    return DriverResult(rows=[], csv=buf.getvalue())


def parse_data_csv(text: str) -> RegressionProblem:
    """Rebuild a regression problem from a gen-data CSV."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta: dict[str, str] = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
        lines = lines[1:]
    header = lines[0].split(",")
    if "split" not in header or "y_noisy" not in header:
        raise ValueError("not a gen-data CSV: missing split/y_noisy columns")
    dim = header.index("y_clean")
    tr_x, tr_y, te_x, te_y = [], [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        vec = [float(p) for p in parts[:dim]]
        y_clean, y_noisy, split = float(parts[dim]), float(parts[dim + 1]), parts[dim + 2]
        if split == "train":
            tr_x.append(vec)
            tr_y.append(y_noisy)
        else:
            te_x.append(vec)
            te_y.append(y_clean)
    return RegressionProblem(
        train_x=np.array(tr_x),
        train_y=np.array(tr_y),
        test_x=np.array(te_x),
        test_y_clean=np.array(te_y),
        noise_sigma=float(meta.get("noise", 0.0)),
    )


def _descent_rows(
    problem: RegressionProblem,
    cfg: KernelConfig,
    lr: float,
    epochs: int,
    record_stride: int,
    experiment_id: str,
    seed: int,
) -> list[TrajectoryRow]:
    states = fit_gradient_descent(problem, cfg, lr, epochs, record_stride)
    risks = excess_risk_curve(states, problem, cfg)
    rows = []
    for state, risk in zip(states, risks):
        loss = 0.5 * float(np.mean((state.train_predictions - problem.train_y) ** 2))
        rows.append(
            TrajectoryRow(
                experiment_id=experiment_id,
                seed=seed,
                L=cfg.L,
                gamma=cfg.gamma,
                C=cfg.C,
                step=state.epoch,
                train_loss=loss,
                test_error=float(risk),
            )
        )
    return rows


def regress(
    data_csv: str,
    L: int,
    gamma: float = 0.0,
    C: float = 1.0,
    lr: float = 1e-4,
    epochs: int = 550,
    record_stride: int = 1,
    seed: int = 0,
    compare: bool = False,
    plot: bool = True,
) -> DriverResult:
    """Kernel gradient descent on a gen-data problem.

    In compare mode the depth-decayed branch scale (gamma=1) is run against
    the constant one (gamma=0, C=1) and both curves are emitted.
    """
    problem = parse_data_csv(data_csv)
    if compare:
        configs = [
            (KernelConfig(L=L, gamma=1.0, C=1.0), "alpha=L^-1"),
            (KernelConfig(L=L, gamma=0.0, C=1.0), "alpha=1"),
        ]
    else:
        configs = [(KernelConfig(L=L, gamma=gamma, C=C), f"gamma={gamma:g}-C={C:g}")]
    rows: list[TrajectoryRow] = []
    for cfg, label in configs:
        rows.extend(
            _descent_rows(problem, cfg, lr, epochs, record_stride, f"L{L}-{label}", seed)
        )
    rows = sort_trajectory(rows)
    config = {
        "experiment": "regress",
        "seed": seed,
        "L": L,
        "gamma": gamma,
        "C": C,
        "lr": lr,
        "epochs": epochs,
        "record_stride": record_stride,
        "compare": compare,
        "n_train": problem.n_train,
        "n_test": len(problem.test_x),
    }
    csv_text = render_csv(rows, config)
    svg = None
    if plot:
        ids = sorted({r.experiment_id for r in rows})
        series = []
        for eid in ids:
            sub = [r for r in rows if r.experiment_id == eid]
            series.append(
                {"label": eid, "x": [r.step for r in sub], "y": [r.test_error for r in sub]}
            )
        svg = line_chart(
            series, title="Test error vs epoch", xlabel="epoch", ylabel="test error"
        )
    return DriverResult(rows=rows, csv=csv_text, svg=svg)


def _relative_discrepancy(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale < 1e-12 else abs(a - b) / scale


def eigen_table(
    dim: int = 3, K: int = 12, L: int = 1, gamma: float = 0.0, C: float = 1.0
) -> DriverResult:
    """Spectrum of the depth-L kernel on S^(dim-1).

    Depth 1 emits both the closed form and the quadrature pipeline with a
    relative-discrepancy column; deeper kernels only have the quadrature
    route.
    """
    if dim < 3:
        raise ValueError("dim must be >= 3 for the quadrature projection")
    if K < 1:
        raise ValueError("K must be >= 1")
    n = dim - 1
    cfg = KernelConfig(L=L, gamma=gamma, C=C)
    if L == 1:
        g = depth1_kernel
    else:
        g = lambda u: rntk_values(u, cfg)  # noqa: E731
    quad = coeffs_to_eigenvalues(expand_kernel(g, n, K))
    rows: list[EigenRow] = []
    if L == 1:
        closed = rntk1_eigenvalues(n, K)
        for k in range(K + 1):
            rows.append(
                EigenRow(
                    k=k,
                    multiplicity=a_coeff(k, n),
                    eigenvalue=float(closed.eigenvalues[k]),
                    source="closed_form",
                    rel_discrepancy=_relative_discrepancy(
                        float(closed.eigenvalues[k]), float(quad.eigenvalues[k])
                    ),
                )
            )
    for k in range(K + 1):
        rows.append(
            EigenRow(
                k=k,
                multiplicity=a_coeff(k, n),
                eigenvalue=float(quad.eigenvalues[k]),
                source="quadrature",
            )
        )
    config = {
        "experiment": "eigen",
        "dim": dim,
        "K": K,
        "L": L,
        "gamma": gamma,
        "C": C,
        "alpha": cfg.alpha,
    }
    return DriverResult(rows=rows, csv=render_csv(rows, config))


def width_gap_sweep(
    m_grid,
    L: int = 2,
    gamma: float = 0.0,
    C: float = 1.0,
    n: int = 16,
    lr: float = 0.5,
    epochs: int = 10,
    seeds: int = 10,
    seed: int = 0,
    dim: int = 3,
    record_stride: int = 2,
    n_probes: int = 8,
    n_test: int = 20,
) -> DriverResult:
    """Width-convergence gaps between the finite network and the depth kernel.

    Per (width, seed): the sup gap between the normalized init-time tangent
    kernel and the exact kernel over a fixed probe grid; the sup prediction
    gap between the trained pair and kernel gradient descent run at the
    matched step size lr * normalizer / (2 n); and the final excess-risk gap.
    Networks run in float32 (gaps of interest sit far above that noise).
    """
    m_grid = [int(m) for m in m_grid]
    if sorted(m_grid) != m_grid:
        raise ValueError("m_grid must be ascending")
    cfg = KernelConfig(L=L, gamma=gamma, C=C)
    alpha = cfg.alpha
    ss = np.random.SeedSequence(seed)
    probe_child, data_child, *cell_children = ss.spawn(2 + len(m_grid) * seeds)
    probe_rng = np.random.default_rng(probe_child)
    probes = sample_sphere(probe_rng, n_probes, dim)
    iu = np.triu_indices(n_probes, k=1)
    probe_u = np.clip(probes @ probes.T, -1.0, 1.0)[iu]
    kernel_ref = rntk_values(probe_u, cfg)
    data_rng = np.random.default_rng(data_child)
    x = sample_sphere(data_rng, n + n_test, dim)
    y_clean = x @ np.ones(dim)
    y = y_clean + 0.1 * data_rng.standard_normal(n + n_test)
    problem = RegressionProblem(
        train_x=x[:n],
        train_y=y[:n],
        test_x=x[n:],
        test_y_clean=y_clean[n:],
        noise_sigma=0.1,
    )
    norm = fw.rnk_normalizer(L, alpha)
    lr_kernel = lr * norm / (2.0 * n)
    kernel_states = fit_gradient_descent(problem, cfg, lr_kernel, epochs, record_stride)
    kernel_risks = excess_risk_curve(kernel_states, problem, cfg)
    kx = cross_kernel(problem.test_x, problem.train_x, cfg)
    kernel_preds = {s.epoch: kx @ s.coefficients for s in kernel_states}
    rows: list[WidthGapRow] = []
    cell_iter = iter(cell_children)
    for m in m_grid:
        for s_idx in range(seeds):
            child = next(cell_iter)
            net_seed = int(np.random.default_rng(child).integers(0, 2**63 - 1))
            pair = fw.MirrorPair.init(m, L, alpha, dim, seed=net_seed, dtype=np.float32)
            gaps = [
                abs(fw.empirical_rnk(pair.net_plus, probes[i], probes[j]) / norm - ref)
                for i, j, ref in zip(iu[0], iu[1], kernel_ref)
            ]
            init_gap = float(np.max(gaps))
            net_preds: dict[int, np.ndarray] = {}
            fw.train_network(
                pair,
                problem,
                lr=lr,
                epochs=epochs,
                record_stride=record_stride,
                experiment_id=f"m{m}",
                seed=s_idx,
                gamma=gamma,
                C=C,
                prediction_sink=net_preds,
            )
            pred_gap = max(
                float(np.max(np.abs(net_preds[e] - kernel_preds[e]))) for e in net_preds
            )
            final = kernel_states[-1].epoch
            risk_net = float(np.mean((net_preds[final] - problem.test_y_clean) ** 2))
            risk_gap = abs(risk_net - float(kernel_risks[-1]))
            rows.append(
                WidthGapRow(
                    m=m,
                    seed=s_idx,
                    init_kernel_gap=init_gap,
                    prediction_gap=pred_gap,
                    risk_gap=risk_gap,
                )
            )
    config = {
        "experiment": "finite-width",
        "seed": seed,
        "m_grid": ",".join(str(m) for m in m_grid),
        "L": L,
        "gamma": gamma,
        "C": C,
        "n": n,
        "lr": lr,
        "epochs": epochs,
        "seeds": seeds,
        "dim": dim,
    }
    return DriverResult(rows=rows, csv=render_csv(rows, config))
