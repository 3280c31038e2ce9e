"""FastAPI service exposing the study pipeline.

Endpoints mirror the CLI verbs: /study/run, /simulate, /mc and /render.
File paths in requests are resolved on the host running the service.
"""

from __future__ import annotations

from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .errors import UihStudyError
from .reporting import (
    VERSION,
    StudyConfig,
    StudyReport,
    car_paths_csv,
    render_report_tables,
    run_study,
)
from .simulation import ScenarioSpec, generate_scenario, monte_carlo
from .studies import build_statistic

app = FastAPI(title="uihstudy", version=VERSION)


class ScenarioModel(BaseModel):
    n_firms: int = 1
    n_days: int = 127
    event_position: int = 116
    benchmark_vol: float = 0.01
    alpha: float | list[float] = 0.0
    beta: float | list[float] = 1.0
    sigma: float | list[float] = 0.01
    shocks: list[tuple[int, float]] = Field(default_factory=list)
    seed: int = 0

    def to_spec(self) -> ScenarioSpec:
        return ScenarioSpec(
            n_firms=self.n_firms,
            n_days=self.n_days,
            event_position=self.event_position,
            benchmark_vol=self.benchmark_vol,
            alpha=self.alpha,
            beta=self.beta,
            sigma=self.sigma,
            shocks=tuple(self.shocks),
            seed=self.seed,
        )


class RunRequest(BaseModel):
    config_path: str | None = None
    config: dict[str, Any] | None = None
    overrides: dict[str, Any] = Field(default_factory=dict)


class RunResponse(BaseModel):
    report: dict[str, Any]
    tables: str
    car_paths: str


class SimulateRequest(BaseModel):
    scenario: ScenarioModel
    trial: int = 0


class SimulateResponse(BaseModel):
    prices_csv: str
    event_date: str
    benchmark: str
    tickers: list[str]


class McRequest(BaseModel):
    scenario: ScenarioModel
    n_trials: int = Field(gt=0)
    statistic: str
    params: dict[str, Any] = Field(default_factory=dict)
    reject_below: float | None = None


class McResponse(BaseModel):
    n_trials: int
    mean: float
    sd: float
    rejection_rate: float | None


class RenderRequest(BaseModel):
    report: dict[str, Any]
    format: Literal["csv", "json", "markdown"] = "markdown"


class RenderResponse(BaseModel):
    rendered: str


def _fail(exc: UihStudyError) -> HTTPException:
    return HTTPException(
        status_code=422,
        detail={"error": type(exc).__name__, "message": str(exc)},
    )


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": VERSION}


@app.post("/study/run", response_model=RunResponse)
def study_run(req: RunRequest) -> RunResponse:
    try:
        if req.config_path is not None:
            config = StudyConfig.read(req.config_path, overrides=req.overrides)
        elif req.config is not None:
            data = dict(req.config)
            data.update({k: v for k, v in req.overrides.items() if v is not None})
            config = StudyConfig.from_mapping(data)
        else:
            raise HTTPException(status_code=422, detail="config_path or config required")
        report = run_study(config)
        tables = render_report_tables(report, config.output_format)
        return RunResponse(
            report=report.data, tables=tables, car_paths=car_paths_csv(report)
        )
    except UihStudyError as exc:
        raise _fail(exc) from exc


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    try:
        panel, _, truth = generate_scenario(req.scenario.to_spec(), trial=req.trial)
    except UihStudyError as exc:
        raise _fail(exc) from exc
    return SimulateResponse(
        prices_csv=panel.to_csv(),
        event_date=truth.event_date.isoformat(),
        benchmark=truth.benchmark,
        tickers=list(truth.tickers),
    )


@app.post("/mc", response_model=McResponse)
def mc(req: McRequest) -> McResponse:
    try:
        statistic = build_statistic(req.statistic, req.params)
        summary = monte_carlo(
            req.scenario.to_spec(), req.n_trials, statistic, reject_below=req.reject_below
        )
    except UihStudyError as exc:
        raise _fail(exc) from exc
    return McResponse(
        n_trials=summary.n_trials,
        mean=summary.mean,
        sd=summary.sd,
        rejection_rate=summary.rejection_rate,
    )


@app.post("/render", response_model=RenderResponse)
def render(req: RenderRequest) -> RenderResponse:
    try:
        rendered = render_report_tables(StudyReport(data=req.report), req.format)
    except UihStudyError as exc:
        raise _fail(exc) from exc
    return RenderResponse(rendered=rendered)
