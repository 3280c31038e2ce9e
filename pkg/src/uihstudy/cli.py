"""Thin command-line client for the study service.

By default each verb talks to an in-process instance of the FastAPI app;
``--server URL`` targets a running instance instead. All files are written
inside the configured output directory only.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .reporting import VERSION


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        click.echo(json.dumps({"error": detail}), err=True)
        sys.exit(1)
    return resp.json()


@click.group()
@click.version_option(VERSION)
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Event-study pipeline: run studies, simulate markets, Monte Carlo checks."""
    ctx.obj = {"server": server}


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Study config JSON.")
@click.option("--event-date", default=None, help="Override event date (YYYY-MM-DD).")
@click.option("--estimation-end", type=int, default=None)
@click.option("--estimation-length", type=int, default=None)
@click.option("--windows", default=None, help="Regression windows, e.g. '0:1,1:10'.")
@click.option("--robust", type=click.Choice(["hc0", "hc1"]), default=None)
@click.option("--mode", type=click.Choice(["panel", "cross-section"]), default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "markdown"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--strict/--lenient", "strict", default=None)
@click.option("--no-timestamp", is_flag=True, help="Suppress the report timestamp.")
@click.option("--output-dir", type=click.Path(), default=".", show_default=True)
@click.pass_context
def run(ctx, config_path, event_date, estimation_end, estimation_length, windows,
        robust, mode, fmt, seed, strict, no_timestamp, output_dir) -> None:
    """Run a full study from a config file and write the report artifacts."""
    overrides: dict = {
        "event_date": event_date,
        "estimation_end": estimation_end,
        "estimation_length": estimation_length,
        "robust": robust,
        "mode": mode,
        "output_format": fmt,
        "seed": seed,
        "strict": strict,
    }
    if windows is not None:
        overrides["regression_windows"] = windows.split(",")
    if no_timestamp:
        overrides["include_timestamp"] = False
    payload = {
        "config_path": str(Path(config_path).resolve()),
        "overrides": {k: v for k, v in overrides.items() if v is not None},
    }
    data = _post(ctx.obj["server"], "/study/run", payload)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt_used = data["report"]["metadata"]["config"].get("output_format") or (fmt or "json")
    report_path = out / "report.json"
    report_path.write_text(json.dumps(data["report"], sort_keys=True, indent=2) + "\n")
    ext = {"markdown": "md", "csv": "csv", "json": "json"}[fmt or "json"]
    (out / f"tables.{ext}").write_text(data["tables"])
    (out / "car_paths.csv").write_text(data["car_paths"])
    click.echo(f"report written to {report_path}")


@main.command()
@click.option("--config", "scenario_path", required=True, type=click.Path(exists=True),
              help="Scenario spec JSON.")
@click.option("--trial", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default="prices.csv", show_default=True,
              help="Output price file (date,ticker,close).")
@click.pass_context
def simulate(ctx, scenario_path, trial, out) -> None:
    """Generate a synthetic price panel from a scenario spec."""
    scenario = json.loads(Path(scenario_path).read_text())
    data = _post(ctx.obj["server"], "/simulate", {"scenario": scenario, "trial": trial})
    Path(out).write_text(data["prices_csv"])
    click.echo(
        f"wrote {out}: benchmark {data['benchmark']}, "
        f"{len(data['tickers'])} firm(s), event {data['event_date']}"
    )


@main.command()
@click.option("--config", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--statistic", required=True,
              help="Named statistic, e.g. car_pvalue, beta_hat, mean_car.")
@click.option("--params", default="{}", help="Statistic parameters as JSON.")
@click.option("--reject-below", type=float, default=None,
              help="Count trials with statistic < this as rejections.")
@click.pass_context
def mc(ctx, scenario_path, trials, statistic, params, reject_below) -> None:
    """Monte Carlo summary of a statistic over seeded scenario trials."""
    scenario = json.loads(Path(scenario_path).read_text())
    payload = {
        "scenario": scenario,
        "n_trials": trials,
        "statistic": statistic,
        "params": json.loads(params),
        "reject_below": reject_below,
    }
    click.echo(json.dumps(_post(ctx.obj["server"], "/mc", payload), indent=2))


@main.command()
@click.option("--report", "report_path", required=True, type=click.Path(exists=True),
              help="Saved report JSON.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "markdown"]),
              default="markdown", show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Write here instead of stdout.")
@click.pass_context
def render(ctx, report_path, fmt, out) -> None:
    """Re-render the coefficient tables of a saved report."""
    report = json.loads(Path(report_path).read_text())
    data = _post(ctx.obj["server"], "/render", {"report": report, "format": fmt})
    if out:
        Path(out).write_text(data["rendered"])
        click.echo(f"wrote {out}")
    else:
        click.echo(data["rendered"], nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Serve the API over HTTP."""
    import uvicorn

    uvicorn.run("uihstudy.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
