"""FastAPI application exposing the experiment drivers.

The service is stateless: every endpoint is a pure function of the request
body, and artifacts (CSV, SVG) come back in the response for the caller to
persist.
"""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import experiments
from ..rntk import KernelConfig, rntk_value
from . import models


def create_app() -> FastAPI:
    app = FastAPI(
        title="rntk-lab",
        description="Residual tangent kernel laboratory: kernel sweeps, spectra, "
        "kernel regression and finite-width comparisons.",
    )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return models.HealthResponse(status="ok")

    @app.post("/kernel/value", response_model=models.KernelValueResponse)
    def kernel_value(req: models.KernelValueRequest):
        cfg = KernelConfig(L=req.L, gamma=req.gamma, C=req.C)
        trace = rntk_value(req.u0, cfg)
        return models.KernelValueResponse(value=trace.value, alpha=cfg.alpha, beta=cfg.beta)

    @app.post("/kernel/sweep", response_model=models.SweepResponse)
    def kernel_sweep(req: models.SweepRequest):
        res = experiments.kernel_sweep(
            req.alphas, req.L_grid, req.replications, req.dim, req.seed, plot=req.plot
        )
        return models.SweepResponse(
            csv=res.csv, svg=res.svg, rows=[models.SweepCell(**asdict(r)) for r in res.rows]
        )

    @app.post("/data/generate", response_model=models.GenDataResponse)
    def generate_data(req: models.GenDataRequest):
        res = experiments.gen_data(req.n, req.dim, req.beta, req.noise, req.seed)
        n_train = (4 * req.n) // 5
        return models.GenDataResponse(csv=res.csv, n_train=n_train, n_test=req.n - n_train)

    @app.post("/regression/run", response_model=models.RegressResponse)
    def run_regression(req: models.RegressRequest):
        res = experiments.regress(
            req.data_csv,
            req.L,
            req.gamma,
            req.C,
            req.lr,
            req.epochs,
            req.record_stride,
            req.seed,
            req.compare,
            plot=req.plot,
        )
        return models.RegressResponse(csv=res.csv, svg=res.svg)

    @app.post("/eigen", response_model=models.EigenResponse)
    def eigen(req: models.EigenRequest):
        res = experiments.eigen_table(req.dim, req.K, req.L, req.gamma, req.C)
        return models.EigenResponse(
            csv=res.csv, rows=[models.EigenEntry(**asdict(r)) for r in res.rows]
        )

    @app.post("/finite-width", response_model=models.FiniteWidthResponse)
    def finite_width(req: models.FiniteWidthRequest):
        res = experiments.width_gap_sweep(
            req.m_grid,
            req.L,
            req.gamma,
            req.C,
            req.n,
            req.lr,
            req.epochs,
            req.seeds,
            req.seed,
        )
        return models.FiniteWidthResponse(csv=res.csv)

    return app


app = create_app()
