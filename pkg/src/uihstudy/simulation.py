"""Deterministic synthetic-market generator and Monte Carlo harness.

The generator is the independent oracle for the statistical machinery: firm
returns follow a single-factor model with known parameters plus optional
additive shocks on chosen relative days.

Reproducibility contract: the bit generator is PCG64. The stream for Monte
Carlo trial ``i`` of master seed ``s`` is ``PCG64(SeedSequence(s, spawn_key=(i,)))``;
a standalone scenario uses trial index 0. Gaussians are produced by the
Box-Muller transform of consecutive uniform draws, so identical seeds give
bitwise-identical panels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ScenarioError
from .market_data import PricePanel, TradingCalendar

__all__ = [
    "ScenarioSpec",
    "TrueParameters",
    "McSummary",
    "generate_scenario",
    "monte_carlo",
]

BENCHMARK_TICKER = "MKT"
BASE_PRICE = 100.0
_START_DATE = date(2016, 1, 4)


def _broadcast(value: float | Sequence[float], n: int, label: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * n
    vals = tuple(float(v) for v in value)
    if len(vals) != n:
        raise ScenarioError(f"{label}: expected {n} values, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class ScenarioSpec:
    """Synthetic single-factor market.

    ``n_days`` counts calendar entries; the first date carries only the base
    price, so returns exist on days 1..n_days-1. ``event_position`` is the
    calendar index of relative day 0 (default leaves room for a [-115, +10]
    frame). Shocks are (relative day, additive abnormal return) pairs.
    """

    n_firms: int = 1
    n_days: int = 127
    event_position: int = 116
    benchmark_vol: float = 0.01
    alpha: float | Sequence[float] = 0.0
    beta: float | Sequence[float] = 1.0
    sigma: float | Sequence[float] = 0.01
    shocks: tuple[tuple[int, float], ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _broadcast(self.alpha, self.n_firms, "alpha"))
        object.__setattr__(self, "beta", _broadcast(self.beta, self.n_firms, "beta"))
        object.__setattr__(self, "sigma", _broadcast(self.sigma, self.n_firms, "sigma"))
        object.__setattr__(
            self, "shocks", tuple((int(d), float(v)) for d, v in self.shocks)
        )
        if self.n_firms < 1:
            raise ScenarioError("need at least one firm")
        if self.benchmark_vol < 0 or any(s < 0 for s in self.sigma):
            raise ScenarioError("volatilities must be non-negative")
        if not 1 <= self.event_position <= self.n_days - 1:
            raise ScenarioError(
                f"event position {self.event_position} outside return days [1, {self.n_days - 1}]"
            )

    @property
    def min_offset(self) -> int:
        return 1 - self.event_position

    @property
    def max_offset(self) -> int:
        return self.n_days - 1 - self.event_position

    @property
    def event_date(self) -> date:
        return _START_DATE + timedelta(days=self.event_position)

    def require_span(self, lo: int, hi: int) -> None:
        if lo < self.min_offset or hi > self.max_offset:
            raise ScenarioError(
                f"scenario span [{self.min_offset}, {self.max_offset}] too short for [{lo}, {hi}]"
            )

    @classmethod
    def from_mapping(cls, data: dict) -> "ScenarioSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ScenarioError(f"unknown scenario key(s): {sorted(unknown)}")
        if "shocks" in data:
            data = dict(data)
            data["shocks"] = tuple((int(d), float(v)) for d, v in data["shocks"])
        return cls(**data)

    @classmethod
    def read(cls, path: str | Path) -> "ScenarioSpec":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid scenario JSON: {exc}") from exc
        return cls.from_mapping(data)


@dataclass(frozen=True)
class TrueParameters:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    sigma: tuple[float, ...]
    benchmark: str
    event_date: date
    tickers: tuple[str, ...]
    shocks: tuple[tuple[int, float], ...]


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller on consecutive uniforms; log1p(-u) keeps the log finite."""
    u1 = rng.random(size)
    u2 = rng.random(size)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def generate_scenario(
    spec: ScenarioSpec, trial: int = 0
) -> tuple[PricePanel, TradingCalendar, TrueParameters]:
    """Materialize one synthetic market.

    Benchmark returns are i.i.d. normal(0, vol^2); firm returns are
    alpha + beta * R_M + sigma * z plus any scheduled shock. Prices start at
    100 and exponentiate cumulative returns, so downstream log returns
    reproduce the simulated returns exactly.
    """
    for day, _ in spec.shocks:
        spec.require_span(day, day)
    rng = _trial_rng(spec.seed, trial)
    n_ret = spec.n_days - 1
    r_m = spec.benchmark_vol * _normals(rng, n_ret)
    shock_by_day = {}
    for day, value in spec.shocks:
        shock_by_day[day] = shock_by_day.get(day, 0.0) + value

    dates = tuple(_START_DATE + timedelta(days=i) for i in range(spec.n_days))
    calendar = TradingCalendar(dates)
    width = len(str(spec.n_firms))
    tickers = tuple(f"F{i:0{width}d}" for i in range(1, spec.n_firms + 1))

    prices: dict[str, dict[date, float]] = {}
    prices[BENCHMARK_TICKER] = _to_prices(dates, r_m)
    for fi, ticker in enumerate(tickers):
        noise = spec.sigma[fi] * _normals(rng, n_ret)
        r = spec.alpha[fi] + spec.beta[fi] * r_m + noise
        for day, value in shock_by_day.items():
            r[spec.event_position + day - 1] += value
        prices[ticker] = _to_prices(dates, r)

    truth = TrueParameters(
        alpha=spec.alpha,  # type: ignore[arg-type]
        beta=spec.beta,  # type: ignore[arg-type]
        sigma=spec.sigma,  # type: ignore[arg-type]
        benchmark=BENCHMARK_TICKER,
        event_date=spec.event_date,
        tickers=tickers,
        shocks=spec.shocks,
    )
    return PricePanel(calendar=calendar, prices=prices), calendar, truth


def _to_prices(dates: tuple[date, ...], returns: np.ndarray) -> dict[date, float]:
    levels = BASE_PRICE * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    return {d: float(p) for d, p in zip(dates, levels)}


@dataclass(frozen=True)
class McSummary:
    n_trials: int
    mean: float
    sd: float
    rejection_rate: float | None = None


def monte_carlo(
    template: ScenarioSpec,
    n_trials: int,
    statistic: Callable[[PricePanel, TradingCalendar, TrueParameters], float],
    reject_below: float | None = None,
) -> McSummary:
    """Run ``statistic`` over independently seeded trials of one scenario.

    Trial ``i`` draws from the stream split documented in the module
    docstring, so the summary is reproducible and independent of execution
    order. With ``reject_below`` set, the rejection rate is the fraction of
    statistics strictly below it (e.g. p-values against a level).
    """
    if n_trials < 1:
        raise ScenarioError("need at least one trial")
    values = np.empty(n_trials)
    for i in range(n_trials):
        panel, calendar, truth = generate_scenario(template, trial=i)
        values[i] = statistic(panel, calendar, truth)
    rate = float(np.mean(values < reject_below)) if reject_below is not None else None
    return McSummary(
        n_trials=n_trials,
        mean=float(values.mean()),
        sd=float(values.std(ddof=1)) if n_trials > 1 else 0.0,
        rejection_rate=rate,
    )
