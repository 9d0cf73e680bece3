"""Command-line client for the experiment service.

Every subcommand builds a request model, sends it through the HTTP layer,
and writes the returned artifacts under --out. Without --server the request
goes to an in-process instance of the service; with --server it goes to a
running deployment (see the serve subcommand).
"""

from __future__ import annotations

import asyncio
import sys
from pathlib import Path

import click
import httpx


class ServiceClient:
    """Thin JSON-over-HTTP client; in-process ASGI transport by default."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                resp = client.post(path, json=payload)
        else:
            from .service.app import app

            async def _go():
                transport = httpx.ASGITransport(app=app)
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://rntk-lab", timeout=None
                ) as client:
                    return await client.post(path, json=payload)

            resp = asyncio.run(_go())
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
        return resp.json()


def _write(out_dir: str, name: str, content: str) -> Path:
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content)
    click.echo(f"wrote {path}")
    return path


def _parse_list(text: str, cast):
    return [cast(tok) for tok in text.split(",") if tok.strip()]


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; in-process if omitted.")
@click.pass_context
def main(ctx, server):
    """Residual tangent kernel laboratory."""
    ctx.obj = ServiceClient(server)


@main.command("kernel-sweep")
@click.option("--alphas", default="1,2,4,8", show_default=True, help="Comma-separated branch scales.")
@click.option("--L-grid", "l_grid", default="", help="Comma-separated depths; default 100..3000 step 100.")
@click.option("--reps", default=100, show_default=True, help="Replications per (alpha, L) cell.")
@click.option("--dim", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--no-plot", is_flag=True, default=False)
@click.pass_obj
def kernel_sweep(client: ServiceClient, alphas, l_grid, reps, dim, seed, out, no_plot):
    """Mean kernel value over random sphere pairs across an (alpha, depth) grid."""
    payload = {
        "alphas": _parse_list(alphas, float),
        "replications": reps,
        "dim": dim,
        "seed": seed,
        "plot": not no_plot,
    }
    if l_grid:
        payload["L_grid"] = _parse_list(l_grid, int)
    data = client.post("/kernel/sweep", payload)
    _write(out, "sweep.csv", data["csv"])
    if data.get("svg"):
        _write(out, "sweep.svg", data["svg"])


@main.command("gen-data")
@click.option("--n", default=200, show_default=True)
@click.option("--dim", default=3, show_default=True)
@click.option("--beta", default="", help="Comma-separated target vector; default all ones.")
@click.option("--noise", default=0.1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@click.pass_obj
def gen_data(client: ServiceClient, n, dim, beta, noise, seed, out):
    """Sample a linear-target regression dataset on the unit sphere."""
    payload = {"n": n, "dim": dim, "noise": noise, "seed": seed}
    if beta:
        payload["beta"] = _parse_list(beta, float)
    data = client.post("/data/generate", payload)
    _write(out, "data.csv", data["csv"])
    click.echo(f"train rows: {data['n_train']}, test rows: {data['n_test']}")


@main.command("regress")
@click.argument("data_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--L", "depth", required=True, type=int, help="Kernel depth.")
@click.option("--gamma", default=0.0, show_default=True)
@click.option("--scale-C", "scale_c", default=1.0, show_default=True)
@click.option("--lr", default=1e-4, show_default=True)
@click.option("--epochs", default=550, show_default=True)
@click.option("--record-stride", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--compare", is_flag=True, default=False, help="Run alpha=L^-1 against alpha=1.")
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--no-plot", is_flag=True, default=False)
@click.pass_obj
def regress(client, data_file, depth, gamma, scale_c, lr, epochs, record_stride, seed, compare, out, no_plot):
    """Kernel gradient descent on a gen-data file, tracking test error."""
    payload = {
        "data_csv": Path(data_file).read_text(),
        "L": depth,
        "gamma": gamma,
        "C": scale_c,
        "lr": lr,
        "epochs": epochs,
        "record_stride": record_stride,
        "seed": seed,
        "compare": compare,
        "plot": not no_plot,
    }
    data = client.post("/regression/run", payload)
    _write(out, "regress.csv", data["csv"])
    if data.get("svg"):
        _write(out, "regress.svg", data["svg"])


@main.command("eigen")
@click.option("--dim", default=3, show_default=True)
@click.option("--K", "order", default=12, show_default=True, help="Largest harmonic degree.")
@click.option("--L", "depth", default=1, show_default=True, type=int)
@click.option("--gamma", default=0.0, show_default=True)
@click.option("--scale-C", "scale_c", default=1.0, show_default=True)
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@click.pass_obj
def eigen(client, dim, order, depth, gamma, scale_c, out):
    """Spectrum of the depth-L kernel (closed form and quadrature at L=1)."""
    data = client.post(
        "/eigen", {"dim": dim, "K": order, "L": depth, "gamma": gamma, "C": scale_c}
    )
    _write(out, "eigen.csv", data["csv"])


@main.command("finite-width")
@click.option("--m-grid", default="256,1024,4096", show_default=True)
@click.option("--L", "depth", default=2, show_default=True, type=int)
@click.option("--gamma", default=0.0, show_default=True)
@click.option("--scale-C", "scale_c", default=1.0, show_default=True)
@click.option("--n", default=16, show_default=True, help="Training points.")
@click.option("--lr", default=0.5, show_default=True)
@click.option("--epochs", default=10, show_default=True)
@click.option("--seeds", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@click.pass_obj
def finite_width(client, m_grid, depth, gamma, scale_c, n, lr, epochs, seeds, seed, out):
    """Width-convergence gaps between finite networks and the exact kernel."""
    data = client.post(
        "/finite-width",
        {
            "m_grid": _parse_list(m_grid, int),
            "L": depth,
            "gamma": gamma,
            "C": scale_c,
            "n": n,
            "lr": lr,
            "epochs": epochs,
            "seeds": seeds,
            "seed": seed,
        },
    )
    _write(out, "finite_width.csv", data["csv"])


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the experiment service with uvicorn."""
    import uvicorn

    uvicorn.run("rntk_lab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
