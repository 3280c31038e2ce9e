"""Study orchestration and report rendering.

One config drives the full pipeline: price ingestion, market-model fits,
CARs and hypothesis verdicts per sector, cross-sectional regressions, and
coefficient tables in markdown/CSV/JSON with identical numeric content.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from .cross_section import (
    RegressionResult,
    build_design,
    design_rows,
    load_controls,
    load_firm_attributes,
)
from .cross_section import CoefficientRow
from .errors import ConfigError
from .event_study import (
    DEFAULT_HYPOTHESIS_WINDOWS,
    WindowSpec,
    abnormal_returns,
    car_path,
    car_result,
    evaluate_uih,
    fit_market_model,
)
from .market_data import (
    TradingCalendar,
    build_event_frame,
    compute_log_returns,
    load_price_panel,
    read_price_records,
)

__all__ = [
    "SectorConfig",
    "StudyConfig",
    "StudyReport",
    "render_coefficient_cell",
    "render_table",
    "render_report_tables",
    "car_paths_csv",
    "run_study",
]

VERSION = "0.1.0"
FORMATS = ("csv", "json", "markdown")


@dataclass(frozen=True)
class SectorConfig:
    tickers: tuple[str, ...]
    benchmark: str


@dataclass(frozen=True)
class StudyConfig:
    """Everything a study run needs; loadable from a JSON file with CLI
    overrides layered on top."""

    prices: str
    event_date: date
    sectors: Mapping[str, SectorConfig]
    attributes: str | None = None
    controls: str | None = None
    calendar: str | None = None
    estimation_end: int = -11
    estimation_length: int = 105
    event_period: WindowSpec = WindowSpec(-10, 10)
    hypothesis_windows: Mapping[str, WindowSpec] = field(
        default_factory=lambda: dict(DEFAULT_HYPOTHESIS_WINDOWS)
    )
    regression_windows: tuple[WindowSpec, ...] = (WindowSpec(0, 1), WindowSpec(1, 10))
    regression_spec: str = "eq5"
    robust: str = "hc1"
    mode: str = "panel"
    control_transform: str = "log-return"
    significance_level: float = 0.05
    shift: str = "forward"
    strict: bool = True
    output_format: str = "json"
    include_timestamp: bool = True
    dummy_label: str = "Trump"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.output_format not in FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.robust not in ("hc0", "hc1"):
            raise ConfigError(f"unknown robust variant {self.robust!r}")
        if self.mode not in ("panel", "cross-section"):
            raise ConfigError(f"unknown regression mode {self.mode!r}")
        if self.regression_spec not in ("eq5", "eq6"):
            raise ConfigError(f"unknown regression spec {self.regression_spec!r}")
        if not self.sectors:
            raise ConfigError("no sectors configured")
        if self.estimation_length < 2:
            raise ConfigError("estimation length must be at least 2")

    @property
    def estimation_window(self) -> WindowSpec:
        return WindowSpec(self.estimation_end - self.estimation_length + 1, self.estimation_end)

    @property
    def frame_span(self) -> tuple[int, int]:
        lows = [self.estimation_window.tau1, self.event_period.tau1]
        highs = [self.estimation_window.tau2, self.event_period.tau2]
        for w in list(self.hypothesis_windows.values()) + list(self.regression_windows):
            lows.append(w.tau1)
            highs.append(w.tau2)
        return min(lows), max(highs)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], base_dir: Path | None = None) -> "StudyConfig":
        data = dict(data)

        def _path(key: str) -> str | None:
            value = data.pop(key, None)
            if value is None:
                return None
            p = Path(value)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            return str(p)

        try:
            prices = _path("prices")
            if prices is None:
                raise ConfigError("config key 'prices' is required")
            attributes = _path("attributes")
            controls = _path("controls")
            calendar = _path("calendar")
            event_date = date.fromisoformat(str(data.pop("event_date")))
            raw_sectors = data.pop("sectors")
            sectors = {
                name: SectorConfig(
                    tickers=tuple(s["tickers"]), benchmark=str(s["benchmark"])
                )
                for name, s in raw_sectors.items()
            }
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from exc
        for key in ("event_period",):
            if key in data:
                data[key] = WindowSpec.parse(str(data[key]))
        if "hypothesis_windows" in data:
            data["hypothesis_windows"] = {
                k: WindowSpec.parse(str(v)) for k, v in data["hypothesis_windows"].items()
            }
        if "regression_windows" in data:
            data["regression_windows"] = tuple(
                WindowSpec.parse(str(v)) for v in data["regression_windows"]
            )
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        return cls(
            prices=prices,
            event_date=event_date,
            sectors=sectors,
            attributes=attributes,
            controls=controls,
            calendar=calendar,
            **data,
        )

    @classmethod
    def read(cls, path: str | Path, overrides: Mapping[str, Any] | None = None) -> "StudyConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if overrides:
            data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(data, base_dir=path.parent)

    def echo(self) -> dict[str, Any]:
        """JSON-safe view of the configuration for the report metadata."""
        return {
            "prices": self.prices,
            "attributes": self.attributes,
            "controls": self.controls,
            "calendar": self.calendar,
            "event_date": self.event_date.isoformat(),
            "estimation_window": self.estimation_window.label(),
            "event_period": self.event_period.label(),
            "hypothesis_windows": {k: w.label() for k, w in self.hypothesis_windows.items()},
            "regression_windows": [w.label() for w in self.regression_windows],
            "regression_spec": self.regression_spec,
            "robust": self.robust,
            "mode": self.mode,
            "control_transform": self.control_transform,
            "significance_level": self.significance_level,
            "shift": self.shift,
            "strict": self.strict,
            "sectors": {
                name: {"tickers": list(s.tickers), "benchmark": s.benchmark}
                for name, s in self.sectors.items()
            },
            "seed": self.seed,
        }


@dataclass(frozen=True)
class StudyReport:
    """Serializable study output; ``data`` is plain JSON-safe structure."""

    data: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "StudyReport":
        return cls(data=json.loads(text))

    @property
    def sectors(self) -> dict[str, Any]:
        return self.data["sectors"]


def _fmt_estimate(estimate: float) -> str:
    return f"{estimate:.6g}"


def _fmt_p(p: float) -> str:
    return f"{p:.4f}"


def render_coefficient_cell(estimate: float, p: float, unicode_minus: bool = False) -> str:
    """Table cell: estimate (6 significant digits), stars, p to 4 decimals.

    Machine formats keep the ASCII hyphen-minus; markdown swaps in the
    typographic minus.
    """
    from .cross_section import significance_stars

    text = f"{_fmt_estimate(estimate)}{significance_stars(p)} ({_fmt_p(p)})"
    if unicode_minus:
        text = text.replace("-", "−")
    return text


ADJ_R2_LABEL = "Adjusted R2"


def _grid_rows(results: Mapping[str, RegressionResult]) -> tuple[list[str], list[str]]:
    columns = list(results)
    if not columns:
        raise ConfigError("empty regression grid")
    first = results[columns[0]]
    regressors = [r.name for r in first.rows]
    for col in columns[1:]:
        if [r.name for r in results[col].rows] != regressors:
            raise ConfigError(
                f"ragged regression grid: column {col!r} has different regressor rows"
            )
    return columns, regressors


def render_table(results: Mapping[str, RegressionResult], fmt: str, title: str = "") -> str:
    """Render one coefficient grid (columns = sectors, rows = regressors
    plus adjusted R^2) as markdown, CSV or JSON with identical numbers."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown table format {fmt!r}")
    columns, regressors = _grid_rows(results)
    if fmt == "json":
        payload: dict[str, Any] = {"title": title, "columns": columns, "rows": []}
        for i, name in enumerate(regressors):
            cells = {
                col: {
                    "estimate": results[col].rows[i].coefficient,
                    "p_value": results[col].rows[i].p_value,
                    "stars": results[col].rows[i].stars,
                }
                for col in columns
            }
            payload["rows"].append({"regressor": name, "cells": cells})
        payload["adjusted_r2"] = {col: results[col].adjusted_r2 for col in columns}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    unicode_minus = fmt == "markdown"
    body: list[list[str]] = []
    for i, name in enumerate(regressors):
        row = [name]
        for col in columns:
            r = results[col].rows[i]
            row.append(render_coefficient_cell(r.coefficient, r.p_value, unicode_minus))
        body.append(row)
    r2_row = [ADJ_R2_LABEL] + [
        _fmt_estimate(results[col].adjusted_r2) for col in columns
    ]
    if unicode_minus:
        r2_row = [c.replace("-", "−") for c in r2_row]
    body.append(r2_row)
    header = [""] + columns

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if title:
            writer.writerow([f"# {title}"])
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()

    lines = []
    if title:
        lines.append(f"### {title}")
        lines.append("")
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] * len(header)) + "|")
    for row in body:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _regression_from_dict(d: dict[str, Any]) -> RegressionResult:
    rows = tuple(
        CoefficientRow(
            name=r["name"],
            coefficient=r["coefficient"],
            robust_se=r["robust_se"],
            p_value=r["p_value"],
            stars=r["stars"],
        )
        for r in d["rows"]
    )
    window = WindowSpec.parse(d["window"].strip("[]").replace(";", ":")) if d.get("window") else None
    return RegressionResult(
        window=window,
        rows=rows,
        adjusted_r2=d["adjusted_r2"],
        n_obs=d["n_obs"],
        robust_variant=d["robust_variant"],
    )


def render_report_tables(report: StudyReport, fmt: str) -> str:
    """Re-render the coefficient tables of a saved report, one grid per
    regression window, sectors as columns."""
    grids: dict[str, dict[str, RegressionResult]] = {}
    for sector in sorted(report.sectors):
        for reg in report.sectors[sector].get("regressions", []):
            label = reg.get("window") or "pooled"
            grids.setdefault(label, {})[sector] = _regression_from_dict(reg)
    parts = [
        render_table(results, fmt, title=f"Window {label}")
        for label, results in sorted(grids.items())
    ]
    sep = "\n" if fmt != "markdown" else "\n"
    return sep.join(parts)


def car_paths_csv(report: StudyReport) -> str:
    """``ticker,day,car`` export of every CAR path in the report."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["ticker", "day", "car"])
    for sector in sorted(report.sectors):
        paths = report.sectors[sector].get("car_paths", {})
        for ticker in sorted(paths):
            for day, value in paths[ticker]:
                writer.writerow([ticker, day, repr(float(value))])
    return buf.getvalue()


def _car_to_dict(c) -> dict[str, Any]:
    return {
        "window": c.window.label(),
        "car": c.car,
        "t_stat": c.t_stat if abs(c.t_stat) != float("inf") else repr(c.t_stat),
        "p_value": c.p_value,
    }


def _regression_to_dict(r: RegressionResult) -> dict[str, Any]:
    return {
        "window": r.window.label() if r.window is not None else None,
        "rows": [
            {
                "name": row.name,
                "coefficient": row.coefficient,
                "robust_se": row.robust_se,
                "p_value": row.p_value,
                "stars": row.stars,
            }
            for row in r.rows
        ],
        "adjusted_r2": r.adjusted_r2,
        "n_obs": r.n_obs,
        "robust_variant": r.robust_variant,
    }


def run_study(config: StudyConfig) -> StudyReport:
    """Execute the full pipeline for every configured sector.

    Deterministic given inputs; any module error propagates as a
    UihStudyError naming its source.
    """
    calendar = TradingCalendar.read(config.calendar) if config.calendar else None
    prices_path = Path(config.prices)
    if not prices_path.exists():
        raise ConfigError(f"prices file not found: {prices_path}")
    panel = load_price_panel(read_price_records(prices_path), calendar)
    returns = compute_log_returns(panel, strict=config.strict)
    frame = build_event_frame(
        returns, config.event_date, span=config.frame_span, shift=config.shift
    )

    attrs = None
    if config.attributes is not None:
        if not Path(config.attributes).exists():
            raise ConfigError(f"attributes file not found: {config.attributes}")
        attrs = load_firm_attributes(config.attributes, strict=config.strict)
    controls = None
    if config.regression_spec == "eq6":
        if config.controls is None:
            raise ConfigError("regression spec 'eq6' requires a controls file")
        if not Path(config.controls).exists():
            raise ConfigError(f"controls file not found: {config.controls}")
        controls = load_controls(config.controls, transform=config.control_transform)

    est_window = config.estimation_window
    sectors_out: dict[str, Any] = {}
    for sector in sorted(config.sectors):
        scfg = config.sectors[sector]
        fits = {}
        ar_by_ticker = {}
        car_paths = {}
        car_results: dict[str, dict[str, Any]] = {h: {} for h in config.hypothesis_windows}
        firm_cars: dict[str, dict[str, float]] = {}
        for ticker in sorted(scfg.tickers):
            fit = fit_market_model(frame, ticker, scfg.benchmark, est_window)
            ars = abnormal_returns(fit, frame, config.event_period)
            fits[ticker] = fit
            ar_by_ticker[ticker] = ars
            car_paths[ticker] = [[d, v] for d, v in car_path(ars, config.event_period.tau1)]
            firm_cars[ticker] = {}
            for hname, hwindow in config.hypothesis_windows.items():
                cr = car_result(ars, hwindow, fit)
                car_results[hname][ticker] = _car_to_dict(cr)
                firm_cars[ticker][hname] = cr.car

        verdict = evaluate_uih(
            firm_cars, windows=config.hypothesis_windows, level=config.significance_level
        )

        regressions = []
        if attrs is not None:
            regressions = _sector_regressions(
                config, frame, ar_by_ticker, attrs, controls
            )

        sectors_out[sector] = {
            "benchmark": scfg.benchmark,
            "market_model": {
                t: {
                    "alpha_hat": f.alpha_hat,
                    "beta_hat": f.beta_hat,
                    "resid_var": f.resid_var,
                    "n_est": f.n_est,
                }
                for t, f in fits.items()
            },
            "car_results": car_results,
            "uih": {
                "level": verdict.level,
                "hypotheses": {
                    h.name: {
                        "window": h.window.label(),
                        "mean_car": h.mean_car,
                        "p_value": h.p_value,
                        "supported": h.supported,
                        "n_firms": h.n_firms,
                        "flag": h.flag,
                    }
                    for h in verdict.hypotheses
                },
            },
            "car_paths": car_paths,
            "regressions": regressions,
        }

    metadata: dict[str, Any] = {
        "version": VERSION,
        "config": config.echo(),
        "event_trading_day": frame.event_date.isoformat(),
    }
    if config.include_timestamp:
        metadata["generated_at"] = datetime.now(timezone.utc).isoformat()
    return StudyReport(data={"metadata": metadata, "sectors": sectors_out, "errors": []})


def _sector_regressions(config, frame, ar_by_ticker, attrs, controls) -> list[dict[str, Any]]:
    from .cross_section import fit_sector_regression
    from .estimation import DesignMatrix
    import numpy as np

    out = []
    if config.mode == "panel":
        for window in config.regression_windows:
            cars = {
                t: dict(p for p in car_path(ars, window.tau1) if p[0] <= window.tau2)
                for t, ars in ar_by_ticker.items()
            }
            design, y = build_design(
                frame, cars, attrs, controls, config.regression_spec, window,
                mode="panel", dummy_label=config.dummy_label,
            )
            result = fit_sector_regression(design, y, config.robust, window=window)
            out.append(_regression_to_dict(result))
        return out

    # Cross-section mode pools the configured windows: one row per
    # (firm, window), dummy = 1 on post-event windows, so the dummy has
    # variation that a single-window cross-section cannot provide.
    rows: list[list[float]] = []
    responses: list[float] = []
    names = None
    for window in config.regression_windows:
        cars = {
            t: dict(p for p in car_path(ars, window.tau1) if p[0] <= window.tau2)
            for t, ars in ar_by_ticker.items()
        }
        names, window_rows, y = design_rows(
            frame, cars, attrs, controls, config.regression_spec, window,
            mode="cross-section", dummy_label=config.dummy_label,
        )
        rows.extend(window_rows)
        responses.extend(y)
    pooled = DesignMatrix(names=names, data=np.asarray(rows, dtype=float))
    result = fit_sector_regression(
        pooled, np.asarray(responses), config.robust, window=None
    )
    return [_regression_to_dict(result)]
