"""Cross-sectional regressions of CARs on the event dummy, firm
characteristics and market controls, with heteroskedasticity-robust errors."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DataError
from .estimation import DesignMatrix, coefficient_tests, hc_covariance, ols_fit
from .event_study import WindowSpec
from .market_data import EventFrame

__all__ = [
    "FirmAttributes",
    "ControlSeries",
    "CoefficientRow",
    "RegressionResult",
    "load_firm_attributes",
    "load_controls",
    "build_design",
    "design_rows",
    "fit_sector_regression",
    "significance_stars",
]

EQ5_CONTROLS: tuple[str, ...] = ()
EQ6_CONTROLS: tuple[str, ...] = ("VIX", "Gold", "Silver", "Bitcoin")


@dataclass(frozen=True)
class FirmAttributes:
    """Log total assets and log net income, year prior to the event."""

    ticker: str
    size: float
    income: float


@dataclass(frozen=True)
class ControlSeries:
    """Named daily market-control series with a shared transformation tag."""

    series: Mapping[str, Mapping[date, float]]
    transform: str = "log-return"  # or "level"

    def __post_init__(self) -> None:
        if self.transform not in ("log-return", "level"):
            raise DataError(f"unknown control transform {self.transform!r}")
        if self.transform == "log-return":
            for name, values in self.series.items():
                bad = [d for d, v in values.items() if v <= 0]
                if bad:
                    raise DataError(
                        f"control {name!r} has non-positive level on {min(bad)}; "
                        "log-return transform needs positive levels"
                    )

    def value(self, name: str, day: int, frame: EventFrame) -> float:
        values = self.series.get(name)
        if values is None:
            raise DataError(f"control series {name!r} not provided")
        d = frame.date_of(day)
        if d not in values:
            raise DataError(f"control {name!r} missing value on {d.isoformat()} (day {day})")
        if self.transform == "level":
            return values[d]
        prev_day = day - 1
        if prev_day not in frame.offsets:
            raise DataError(
                f"control {name!r}: no prior trading day inside the frame for day {day}"
            )
        prev = frame.offsets[prev_day]
        if prev not in values:
            raise DataError(f"control {name!r} missing value on {prev.isoformat()} (day {prev_day})")
        return math.log(values[d] / values[prev])


def load_firm_attributes(path: str | Path, strict: bool = True) -> dict[str, FirmAttributes]:
    """Read ``ticker,total_assets,net_income`` rows (raw USD; logs taken here).

    A non-positive net income has no logarithm: strict mode aborts, lenient
    mode substitutes sign(x) * log1p(|x|) with a warning.
    """
    out: dict[str, FirmAttributes] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["ticker", "total_assets", "net_income"]:
            raise DataError(f"{path}: expected header 'ticker,total_assets,net_income'")
        for rowno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise DataError(f"{path}:{rowno}: expected 3 fields, got {len(row)}")
            ticker = row[0].strip()
            try:
                assets = float(row[1])
                income = float(row[2])
            except ValueError as exc:
                raise DataError(f"{path}:{rowno}: unparseable number") from exc
            if ticker in out:
                raise DataError(f"{path}:{rowno}: duplicate ticker {ticker!r}")
            if assets <= 0:
                raise DataError(f"{path}:{rowno}: non-positive total assets for {ticker!r}")
            if income > 0:
                log_income = math.log(income)
            elif strict:
                raise DataError(f"{path}:{rowno}: non-positive net income for {ticker!r}")
            else:
                warnings.warn(
                    f"{ticker}: non-positive net income; using signed log1p", stacklevel=2
                )
                log_income = math.copysign(math.log1p(abs(income)), income) if income != 0 else 0.0
            out[ticker] = FirmAttributes(ticker=ticker, size=math.log(assets), income=log_income)
    if not out:
        raise DataError(f"{path}: no attribute rows")
    return out


def load_controls(path: str | Path, transform: str = "log-return") -> ControlSeries:
    """Read ``date,name,value`` rows into a ControlSeries."""
    series: dict[str, dict[date, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "name", "value"]:
            raise DataError(f"{path}: expected header 'date,name,value'")
        for rowno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise DataError(f"{path}:{rowno}: expected 3 fields, got {len(row)}")
            try:
                d = date.fromisoformat(row[0].strip())
                value = float(row[2])
            except ValueError as exc:
                raise DataError(f"{path}:{rowno}: unparseable field") from exc
            name = row[1].strip()
            bucket = series.setdefault(name, {})
            if d in bucket:
                raise DataError(f"{path}:{rowno}: duplicate control value ({d}, {name})")
            bucket[d] = value
    return ControlSeries(series=series, transform=transform)


def build_design(
    frame: EventFrame,
    cars: Mapping[str, Mapping[int, float]],
    attrs: Mapping[str, FirmAttributes],
    controls: ControlSeries | None,
    spec: str,
    window: WindowSpec,
    mode: str = "panel",
    dummy_label: str = "Trump",
) -> tuple[DesignMatrix, np.ndarray]:
    """Assemble the regression design and response for one window.

    ``cars`` maps ticker -> {relative day -> running CAR from the window
    start through that day}. Panel mode emits one row per (firm, day) with
    the event dummy equal to 1 exactly on the first trading day after day 0;
    cross-section mode emits one row per firm with the full-window CAR as
    response and dummy = 1 when the window lies after day 0.
    """
    names, rows, response = design_rows(
        frame, cars, attrs, controls, spec, window, mode, dummy_label
    )
    design = DesignMatrix(names=names, data=np.asarray(rows, dtype=float))
    return design, np.asarray(response, dtype=float)


def design_rows(
    frame: EventFrame,
    cars: Mapping[str, Mapping[int, float]],
    attrs: Mapping[str, FirmAttributes],
    controls: ControlSeries | None,
    spec: str,
    window: WindowSpec,
    mode: str = "panel",
    dummy_label: str = "Trump",
) -> tuple[tuple[str, ...], list[list[float]], list[float]]:
    """Raw (names, rows, response) triple behind :func:`build_design`, for
    callers that pool several windows before fitting."""
    if spec not in ("eq5", "eq6"):
        raise DataError(f"unknown regression spec {spec!r} (use 'eq5' or 'eq6')")
    if mode not in ("panel", "cross-section"):
        raise DataError(f"unknown design mode {mode!r} (use 'panel' or 'cross-section')")
    control_names = EQ6_CONTROLS if spec == "eq6" else EQ5_CONTROLS
    if spec == "eq6" and controls is None:
        raise DataError("spec 'eq6' requires control series")
    if spec == "eq6" and mode == "cross-section":
        raise DataError("daily control series have no cross-sectional variation; use panel mode for 'eq6'")

    tickers = sorted(cars)
    missing_attrs = [t for t in tickers if t not in attrs]
    if missing_attrs:
        raise DataError(f"missing firm attributes for {missing_attrs}")

    dummy_day = frame.first_post_event_day()
    rows: list[list[float]] = []
    response: list[float] = []
    for ticker in tickers:
        firm_cars = cars[ticker]
        a = attrs[ticker]
        if mode == "cross-section":
            if window.tau2 not in firm_cars:
                raise DataError(f"firm {ticker!r}: CAR missing for day {window.tau2}")
            response.append(firm_cars[window.tau2])
            rows.append([1.0, 1.0 if window.tau1 > 0 else 0.0, a.size, a.income])
            continue
        for day in window.days():
            if day not in firm_cars:
                raise DataError(f"firm {ticker!r}: CAR missing for day {day}")
            response.append(firm_cars[day])
            row = [1.0, 1.0 if day == dummy_day else 0.0, a.size, a.income]
            for name in control_names:
                row.append(controls.value(name, day, frame))  # type: ignore[union-attr]
            rows.append(row)

    names = ("const", dummy_label, "Size", "Income") + control_names
    return names, rows, response


def significance_stars(p: float) -> str:
    """Stars at the 10/5/1% levels (strict inequalities)."""
    if not 0.0 <= p <= 1.0:
        raise DataError(f"p-value {p} outside [0, 1]")
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


@dataclass(frozen=True)
class CoefficientRow:
    name: str
    coefficient: float
    robust_se: float
    p_value: float
    stars: str


@dataclass(frozen=True)
class RegressionResult:
    window: WindowSpec | None
    rows: tuple[CoefficientRow, ...]
    adjusted_r2: float
    n_obs: int
    robust_variant: str

    def row(self, name: str) -> CoefficientRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def fit_sector_regression(
    design: DesignMatrix,
    response: Sequence[float],
    robust_variant: str = "hc1",
    window: WindowSpec | None = None,
) -> RegressionResult:
    """OLS fit with White robust p-values and significance stars attached.

    An exactly-zero robust variance (all residuals zero) is reported with
    p = 1 for zero coefficients instead of erroring, so a degenerate
    zero response yields an all-blank star column.
    """
    fit = ols_fit(design, response)
    cov = hc_covariance(fit, design, robust_variant)
    diag = np.diag(cov)
    rows = []
    if np.any(diag <= 0):
        for i, name in enumerate(fit.names):
            beta = float(fit.coefficients[i])
            se = float(math.sqrt(diag[i])) if diag[i] > 0 else 0.0
            if se == 0.0:
                p = 1.0 if beta == 0.0 else 0.0
            else:
                t = beta / se
                p = 2.0 * float(stats.t.sf(abs(t), fit.df_resid))
            rows.append(CoefficientRow(name, beta, se, p, significance_stars(p)))
    else:
        for test in coefficient_tests(fit, cov):
            rows.append(
                CoefficientRow(
                    name=test.name,
                    coefficient=test.estimate,
                    robust_se=test.std_error,
                    p_value=test.p_value,
                    stars=significance_stars(test.p_value),
                )
            )
    return RegressionResult(
        window=window,
        rows=tuple(rows),
        adjusted_r2=fit.adjusted_r2,
        n_obs=design.n_obs,
        robust_variant=robust_variant,
    )
