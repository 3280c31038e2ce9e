"""Named Monte Carlo statistics over synthetic scenarios.

Each factory returns a statistic callable for :func:`simulation.monte_carlo`.
The per-trial pipeline is the real production path (price panel -> log
returns -> event frame -> market model -> CARs), so these studies exercise
the same code the batch CLI runs.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .cross_section import FirmAttributes, build_design, fit_sector_regression
from .errors import ScenarioError
from .event_study import (
    DEFAULT_HYPOTHESIS_WINDOWS,
    WindowSpec,
    abnormal_returns,
    car_path,
    car_result,
    evaluate_uih,
    fit_market_model,
)
from .market_data import EventFrame, build_event_frame, compute_log_returns
from .simulation import PricePanel, TradingCalendar, TrueParameters

__all__ = [
    "DEFAULT_ESTIMATION",
    "trial_frame",
    "car_pvalue",
    "beta_hat",
    "mean_car",
    "uih_discrimination",
    "dummy_effect_recovery",
    "STATISTICS",
    "build_statistic",
]

DEFAULT_ESTIMATION = WindowSpec(-115, -11)

Statistic = Callable[[PricePanel, TradingCalendar, TrueParameters], float]


def trial_frame(
    panel: PricePanel,
    truth: TrueParameters,
    span: tuple[int, int],
) -> EventFrame:
    returns = compute_log_returns(panel, benchmark=truth.benchmark)
    return build_event_frame(returns, truth.event_date, span=span)


def _span(estimation: WindowSpec, event_period: WindowSpec) -> tuple[int, int]:
    return (
        min(estimation.tau1, event_period.tau1),
        max(estimation.tau2, event_period.tau2),
    )


def car_pvalue(
    window: WindowSpec,
    estimation: WindowSpec = DEFAULT_ESTIMATION,
) -> Statistic:
    """p-value of the CAR t-test on ``window`` for the first firm."""

    event_period = WindowSpec(min(window.tau1, -10), max(window.tau2, 10))

    def statistic(panel, calendar, truth) -> float:
        frame = trial_frame(panel, truth, _span(estimation, event_period))
        fit = fit_market_model(frame, truth.tickers[0], truth.benchmark, estimation)
        ars = abnormal_returns(fit, frame, event_period)
        return car_result(ars, window, fit).p_value

    return statistic


def beta_hat(estimation: WindowSpec = DEFAULT_ESTIMATION) -> Statistic:
    """Market-model slope estimate for the first firm."""

    def statistic(panel, calendar, truth) -> float:
        frame = trial_frame(panel, truth, (estimation.tau1, max(estimation.tau2, 0)))
        fit = fit_market_model(frame, truth.tickers[0], truth.benchmark, estimation)
        return fit.beta_hat

    return statistic


def mean_car(
    window: WindowSpec,
    estimation: WindowSpec = DEFAULT_ESTIMATION,
) -> Statistic:
    """Cross-firm mean CAR over ``window``."""

    event_period = WindowSpec(min(window.tau1, -10), max(window.tau2, 10))

    def statistic(panel, calendar, truth) -> float:
        frame = trial_frame(panel, truth, _span(estimation, event_period))
        total = 0.0
        for ticker in truth.tickers:
            fit = fit_market_model(frame, ticker, truth.benchmark, estimation)
            ars = abnormal_returns(fit, frame, event_period)
            total += car_result(ars, window, fit).car
        return total / len(truth.tickers)

    return statistic


def uih_discrimination(
    expect_supported: tuple[str, ...] = ("H2",),
    expect_unsupported: tuple[str, ...] = ("H1a",),
    level: float = 0.05,
    estimation: WindowSpec = DEFAULT_ESTIMATION,
    windows: Mapping[str, WindowSpec] | None = None,
) -> Statistic:
    """1.0 when the verdict supports exactly the expected hypotheses sets."""

    windows = dict(DEFAULT_HYPOTHESIS_WINDOWS if windows is None else windows)
    event_period = WindowSpec(
        min(w.tau1 for w in windows.values()), max(w.tau2 for w in windows.values())
    )

    def statistic(panel, calendar, truth) -> float:
        frame = trial_frame(panel, truth, _span(estimation, event_period))
        firm_cars: dict[str, dict[str, float]] = {}
        for ticker in truth.tickers:
            fit = fit_market_model(frame, ticker, truth.benchmark, estimation)
            ars = abnormal_returns(fit, frame, event_period)
            firm_cars[ticker] = {
                name: car_result(ars, w, fit).car for name, w in windows.items()
            }
        verdict = evaluate_uih(firm_cars, windows=windows, level=level)
        ok = all(verdict.result(h).supported for h in expect_supported) and not any(
            verdict.result(h).supported for h in expect_unsupported
        )
        return 1.0 if ok else 0.0

    return statistic


def dummy_effect_recovery(
    true_effect: float,
    tolerance: float = 0.01,
    window: WindowSpec = WindowSpec(0, 1),
    estimation: WindowSpec = DEFAULT_ESTIMATION,
    require_stars: str = "***",
    dummy_label: str = "Trump",
) -> Statistic:
    """1.0 when the panel regression recovers the event-dummy effect within
    ``tolerance`` and earns at least ``require_stars``."""

    event_period = WindowSpec(min(window.tau1, -10), max(window.tau2, 10))

    def statistic(panel, calendar, truth) -> float:
        frame = trial_frame(panel, truth, _span(estimation, event_period))
        cars = {}
        attrs = {}
        for i, ticker in enumerate(truth.tickers):
            fit = fit_market_model(frame, ticker, truth.benchmark, estimation)
            ars = abnormal_returns(fit, frame, event_period)
            cars[ticker] = dict(p for p in car_path(ars, window.tau1) if p[0] <= window.tau2)
            # Deterministic, non-affine spread so size/income are not collinear.
            attrs[ticker] = FirmAttributes(
                ticker=ticker, size=10.0 + 0.01 * i, income=5.0 + 0.002 * (i % 5) * i
            )
        design, y = build_design(
            frame, cars, attrs, None, "eq5", window, mode="panel", dummy_label=dummy_label
        )
        result = fit_sector_regression(design, y, "hc1", window=window)
        row = result.row(dummy_label)
        ok = abs(row.coefficient - true_effect) <= tolerance and row.stars.startswith(require_stars)
        return 1.0 if ok else 0.0

    return statistic


STATISTICS = {
    "car_pvalue": car_pvalue,
    "beta_hat": beta_hat,
    "mean_car": mean_car,
    "uih_discrimination": uih_discrimination,
    "dummy_effect_recovery": dummy_effect_recovery,
}


def build_statistic(name: str, params: Mapping[str, object] | None = None) -> Statistic:
    """Instantiate a named statistic; window-like params are 'a:b' strings."""
    if name not in STATISTICS:
        raise ScenarioError(f"unknown statistic {name!r}; available: {sorted(STATISTICS)}")
    params = dict(params or {})
    for key in ("window", "estimation"):
        if key in params:
            params[key] = WindowSpec.parse(str(params[key]))
    if "windows" in params:
        params["windows"] = {
            k: WindowSpec.parse(str(v)) for k, v in params["windows"].items()  # type: ignore[union-attr]
        }
    for key in ("expect_supported", "expect_unsupported"):
        if key in params:
            params[key] = tuple(params[key])  # type: ignore[arg-type]
    return STATISTICS[name](**params)  # type: ignore[arg-type]
