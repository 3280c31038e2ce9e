"""Market-model fits, abnormal returns, CAR algebra and UIH hypothesis verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import EstimationError, WindowError
from .estimation import DesignMatrix, ols_fit
from .market_data import EventFrame

__all__ = [
    "WindowSpec",
    "MarketModelFit",
    "ARSeries",
    "CarResult",
    "HypothesisResult",
    "UihVerdict",
    "DEFAULT_HYPOTHESIS_WINDOWS",
    "kahan_sum",
    "fit_market_model",
    "abnormal_returns",
    "cumulative_abnormal_return",
    "car_path",
    "car_t_test",
    "car_result",
    "evaluate_uih",
]

MIN_ESTIMATION_OBS = 30


@dataclass(frozen=True, order=True)
class WindowSpec:
    """Inclusive relative-day window [tau1, tau2]."""

    tau1: int
    tau2: int

    def __post_init__(self) -> None:
        if self.tau1 > self.tau2:
            raise WindowError(f"window [{self.tau1}; {self.tau2}] is reversed")

    @property
    def length(self) -> int:
        return self.tau2 - self.tau1 + 1

    def days(self) -> range:
        return range(self.tau1, self.tau2 + 1)

    def label(self) -> str:
        return f"[{self.tau1:+d};{self.tau2:+d}]"

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        """Parse 'a:b' into a window."""
        try:
            a, b = text.split(":")
            return cls(int(a), int(b))
        except ValueError as exc:
            raise WindowError(f"cannot parse window {text!r}; expected 'a:b'") from exc


DEFAULT_HYPOTHESIS_WINDOWS: dict[str, WindowSpec] = {
    "H1a": WindowSpec(-10, 0),
    "H1b": WindowSpec(0, 1),
    "H2": WindowSpec(1, 10),
}


@dataclass(frozen=True)
class MarketModelFit:
    ticker: str
    alpha_hat: float
    beta_hat: float
    resid_var: float  # SSR / (n_est - 2)
    n_est: int
    benchmark: str


@dataclass(frozen=True)
class ARSeries:
    """Per-relative-day abnormal returns R_it - alpha_hat - beta_hat * R_Mt."""

    ticker: str
    values: Mapping[int, float]

    @property
    def span(self) -> tuple[int, int]:
        return min(self.values), max(self.values)

    def window_values(self, window: WindowSpec) -> list[float]:
        lo, hi = self.span
        if window.tau1 < lo or window.tau2 > hi:
            raise WindowError(f"window {window.label()} outside AR span [{lo}; {hi}]")
        return [self.values[d] for d in window.days()]


@dataclass(frozen=True)
class CarResult:
    ticker: str
    window: WindowSpec
    car: float
    t_stat: float
    p_value: float


@dataclass(frozen=True)
class HypothesisResult:
    name: str
    window: WindowSpec
    mean_car: float
    p_value: float | None
    supported: bool
    n_firms: int
    flag: str | None = None


@dataclass(frozen=True)
class UihVerdict:
    level: float
    hypotheses: tuple[HypothesisResult, ...]

    def result(self, name: str) -> HypothesisResult:
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)


def kahan_sum(values: Iterable[float]) -> float:
    """Compensated summation; keeps CAR window additivity exact to 1e-12."""
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _window_returns(frame: EventFrame, ticker: str, window: WindowSpec) -> list[float]:
    series = frame.returns.get(ticker)
    if series is None:
        raise EstimationError(f"ticker {ticker!r} not present in the event frame")
    missing = [d for d in window.days() if d not in series]
    if missing:
        raise EstimationError(
            f"ticker {ticker!r} missing returns on relative day(s) {missing} in {window.label()}"
        )
    return [series[d] for d in window.days()]


def fit_market_model(
    frame: EventFrame,
    ticker: str,
    benchmark: str,
    estimation: WindowSpec,
    min_obs: int = MIN_ESTIMATION_OBS,
) -> MarketModelFit:
    """Two-variable OLS of firm returns on benchmark returns over the
    estimation window; residual variance uses SSR/(n-2)."""
    y = _window_returns(frame, ticker, estimation)
    x = _window_returns(frame, benchmark, estimation)
    n = len(y)
    if n < min_obs:
        raise EstimationError(
            f"estimation window {estimation.label()} has {n} observations; need >= {min_obs}"
        )
    x_arr = np.asarray(x)
    if np.ptp(x_arr) == 0.0:
        raise EstimationError(f"zero benchmark variance for {benchmark!r} over {estimation.label()}")
    X = DesignMatrix.from_columns([("market", x)], intercept=True)
    fit = ols_fit(X, y)
    return MarketModelFit(
        ticker=ticker,
        alpha_hat=float(fit.coefficients[0]),
        beta_hat=float(fit.coefficients[1]),
        resid_var=fit.sigma2,
        n_est=n,
        benchmark=benchmark,
    )


def abnormal_returns(fit: MarketModelFit, frame: EventFrame, event_period: WindowSpec) -> ARSeries:
    """AR_t = R_t - alpha_hat - beta_hat * R_Mt over the event period."""
    if frame.benchmark is not None and frame.benchmark != fit.benchmark:
        raise EstimationError(
            f"frame benchmark {frame.benchmark!r} differs from fit benchmark {fit.benchmark!r}"
        )
    r = _window_returns(frame, fit.ticker, event_period)
    rm = _window_returns(frame, fit.benchmark, event_period)
    values = {
        d: ri - fit.alpha_hat - fit.beta_hat * rmi
        for d, ri, rmi in zip(event_period.days(), r, rm)
    }
    return ARSeries(ticker=fit.ticker, values=values)


def cumulative_abnormal_return(ars: ARSeries, window: WindowSpec) -> float:
    """Compensated sum of abnormal returns over the inclusive window."""
    return kahan_sum(ars.window_values(window))


def car_path(ars: ARSeries, anchor: int) -> list[tuple[int, float]]:
    """Running CAR[anchor; day] for every day from the anchor to the span end."""
    lo, hi = ars.span
    if anchor < lo or anchor > hi:
        raise WindowError(f"anchor {anchor} outside AR span [{lo}; {hi}]")
    path = []
    total = 0.0
    comp = 0.0
    for d in range(anchor, hi + 1):
        y = ars.values[d] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        path.append((d, total))
    return path


def car_t_test(car: float, window: WindowSpec, fit: MarketModelFit) -> tuple[float, float]:
    """t = CAR / sqrt(L * resid_var); two-sided Student-t with n_est - 2 df.

    A zero residual variance is degenerate: infinite t with p = 0 unless the
    CAR itself is zero.
    """
    if fit.resid_var < 0:
        raise EstimationError(f"negative residual variance {fit.resid_var}")
    if fit.resid_var == 0.0:
        if car == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, car), 0.0
    t = car / math.sqrt(window.length * fit.resid_var)
    p = 2.0 * float(stats.t.sf(abs(t), fit.n_est - 2))
    return t, p


def car_result(ars: ARSeries, window: WindowSpec, fit: MarketModelFit) -> CarResult:
    car = cumulative_abnormal_return(ars, window)
    t, p = car_t_test(car, window, fit)
    return CarResult(ticker=ars.ticker, window=window, car=car, t_stat=t, p_value=p)


def _one_sided_mean_test(values: Sequence[float]) -> tuple[float, float | None]:
    """Cross-sectional t-test of mean > 0; returns (mean, one-sided p)."""
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    n = len(arr)
    if n < 2:
        return mean, None
    sd = float(arr.std(ddof=1))
    if sd == 0.0:
        return mean, 0.0 if mean > 0 else 1.0
    t = mean / (sd / math.sqrt(n))
    return mean, float(stats.t.sf(t, n - 1))


def evaluate_uih(
    firm_cars: Mapping[str, Mapping[str, float]],
    windows: Mapping[str, WindowSpec] | None = None,
    level: float = 0.05,
) -> UihVerdict:
    """Cross-firm verdicts for the three directional hypotheses.

    ``firm_cars`` maps ticker -> {hypothesis name -> CAR}. Each hypothesis is
    supported when the one-sided mean test rejects at ``level`` and the mean
    CAR is positive. Fewer than two firms yields a flagged verdict without a
    p-value.
    """
    windows = dict(DEFAULT_HYPOTHESIS_WINDOWS if windows is None else windows)
    tickers = sorted(firm_cars)
    results = []
    for name, window in windows.items():
        missing = [t for t in tickers if name not in firm_cars[t]]
        if missing:
            raise WindowError(f"hypothesis {name}: CAR missing for firm(s) {missing}")
        values = [firm_cars[t][name] for t in tickers]
        mean, p = _one_sided_mean_test(values)
        if p is None:
            results.append(
                HypothesisResult(
                    name=name, window=window, mean_car=mean, p_value=None,
                    supported=False, n_firms=len(values),
                    flag="fewer than 2 firms; no test performed",
                )
            )
        else:
            results.append(
                HypothesisResult(
                    name=name, window=window, mean_car=mean, p_value=p,
                    supported=bool(p < level and mean > 0), n_firms=len(values),
                )
            )
    return UihVerdict(level=level, hypotheses=tuple(results))
