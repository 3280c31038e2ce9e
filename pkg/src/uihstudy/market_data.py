"""Price ingestion, trading-calendar alignment, log returns and event re-indexing.

Price files are delimiter-separated text with header ``date,ticker,close``.
Calendar files hold one ISO-8601 date per line. All parsing is
locale-independent with ``.`` as the decimal separator.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CalendarError, DataError, WindowError

__all__ = [
    "TradingCalendar",
    "PricePanel",
    "ReturnPanel",
    "EventFrame",
    "read_price_records",
    "load_price_panel",
    "compute_log_returns",
    "build_event_frame",
]


@dataclass(frozen=True)
class TradingCalendar:
    """Ordered, duplicate-free list of trading dates."""

    dates: tuple[date, ...]
    _index: dict[date, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise CalendarError(f"calendar dates not strictly increasing at {cur}")
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(self.dates)})

    def __len__(self) -> int:
        return len(self.dates)

    def __contains__(self, d: date) -> bool:
        return d in self._index

    def index_of(self, d: date) -> int:
        try:
            return self._index[d]
        except KeyError:
            raise CalendarError(f"{d.isoformat()} is not a trading day") from None

    def previous(self, d: date) -> date | None:
        """Trading day immediately before ``d``, or None at the start."""
        i = self.index_of(d)
        return self.dates[i - 1] if i > 0 else None

    @classmethod
    def from_dates(cls, dates: Iterable[date]) -> "TradingCalendar":
        return cls(tuple(sorted(set(dates))))

    @classmethod
    def read(cls, path: str | Path) -> "TradingCalendar":
        dates = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                dates.append(date.fromisoformat(line))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: unparseable date {line!r}") from exc
        return cls(tuple(dates))


@dataclass(frozen=True)
class PricePanel:
    """Per-ticker daily close prices on a shared trading calendar."""

    calendar: TradingCalendar
    prices: Mapping[str, Mapping[date, float]]

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(sorted(self.prices))

    def to_csv(self) -> str:
        """Serialize in the ``date,ticker,close`` input format."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["date", "ticker", "close"])
        for ticker in self.tickers:
            series = self.prices[ticker]
            for d in sorted(series):
                w.writerow([d.isoformat(), ticker, repr(series[d])])
        return buf.getvalue()


@dataclass(frozen=True)
class ReturnPanel:
    """Per-ticker daily log returns; ``benchmark`` names the market series."""

    calendar: TradingCalendar
    returns: Mapping[str, Mapping[date, float]]
    benchmark: str | None = None

    @property
    def tickers(self) -> tuple[str, ...]:
        return tuple(sorted(self.returns))


@dataclass(frozen=True)
class EventFrame:
    """Returns re-keyed by relative day around the event (day 0 = event)."""

    event_date: date
    offsets: Mapping[int, date]
    returns: Mapping[str, Mapping[int, float]]
    benchmark: str | None = None
    missing: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    @property
    def span(self) -> tuple[int, int]:
        return min(self.offsets), max(self.offsets)

    def date_of(self, offset: int) -> date:
        try:
            return self.offsets[offset]
        except KeyError:
            raise WindowError(f"relative day {offset} outside frame span {self.span}") from None

    def offset_of(self, d: date) -> int:
        for k, v in self.offsets.items():
            if v == d:
                return k
        raise WindowError(f"{d.isoformat()} not inside the event frame")

    def first_post_event_day(self) -> int:
        """Smallest positive offset, i.e. the first trading day after day 0."""
        post = [k for k in self.offsets if k > 0]
        if not post:
            raise WindowError("frame span ends at or before the event day")
        return min(post)


def _parse_record(row: Sequence[str], rowno: int) -> tuple[date, str, float]:
    if len(row) != 3:
        raise DataError(f"row {rowno}: expected 3 fields (date,ticker,close), got {len(row)}")
    raw_date, ticker, raw_close = (f.strip() for f in row)
    try:
        d = date.fromisoformat(raw_date)
    except ValueError as exc:
        raise DataError(f"row {rowno}: unparseable date {raw_date!r}") from exc
    if not ticker:
        raise DataError(f"row {rowno}: empty ticker")
    try:
        close = float(raw_close)
    except ValueError as exc:
        raise DataError(f"row {rowno}: unparseable close {raw_close!r}") from exc
    return d, ticker, close


def read_price_records(path: str | Path) -> list[tuple[date, str, float]]:
    """Read ``date,ticker,close`` rows from a CSV file (header required)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty price file") from None
        if [h.strip().lower() for h in header] != ["date", "ticker", "close"]:
            raise DataError(f"{path}: expected header 'date,ticker,close', got {header!r}")
        return [_parse_record(row, rowno) for rowno, row in enumerate(reader, start=2)]


def load_price_panel(
    records: Iterable[tuple[date | str, str, float]],
    calendar: TradingCalendar | None = None,
) -> PricePanel:
    """Build a PricePanel from (date, ticker, close) records.

    With ``calendar=None`` the calendar is inferred as the union of dates
    present in the records; otherwise every date must be a calendar member.
    Rejects non-positive prices and duplicate (date, ticker) rows, reporting
    the offending row number.
    """
    prices: dict[str, dict[date, float]] = {}
    for rowno, rec in enumerate(records, start=1):
        raw_date, ticker, close = rec
        d = raw_date if isinstance(raw_date, date) else date.fromisoformat(str(raw_date))
        if not math.isfinite(close) or close <= 0.0:
            raise DataError(f"row {rowno}: non-positive price {close} for {ticker} on {d}")
        if calendar is not None and d not in calendar:
            raise DataError(f"row {rowno}: date {d.isoformat()} outside the trading calendar")
        series = prices.setdefault(str(ticker), {})
        if d in series:
            raise DataError(f"row {rowno}: duplicate observation for ({d.isoformat()}, {ticker})")
        series[d] = float(close)
    if not prices:
        raise DataError("no price records")
    if calendar is None:
        calendar = TradingCalendar.from_dates(d for s in prices.values() for d in s)
    return PricePanel(calendar=calendar, prices=prices)


def compute_log_returns(
    panel: PricePanel,
    benchmark: str | None = None,
    strict: bool = True,
) -> ReturnPanel:
    """Daily log returns ln(P_t / P_{t-1}) over consecutive trading days.

    The first priced date of each ticker carries no return. Tickers with
    fewer than two priced dates abort the run in strict mode and are dropped
    with a warning otherwise.
    """
    cal = panel.calendar
    if benchmark is not None and benchmark not in panel.prices:
        raise DataError(f"benchmark ticker {benchmark!r} not present in the price panel")
    returns: dict[str, dict[date, float]] = {}
    for ticker, series in panel.prices.items():
        if len(series) < 2:
            msg = f"ticker {ticker!r} has {len(series)} priced date(s); need at least 2"
            if strict:
                raise DataError(msg)
            warnings.warn(msg + "; ticker dropped", stacklevel=2)
            continue
        out: dict[date, float] = {}
        for d in sorted(series):
            prev = cal.previous(d)
            if prev is not None and prev in series:
                out[d] = math.log(series[d] / series[prev])
        returns[ticker] = out
    return ReturnPanel(calendar=cal, returns=returns, benchmark=benchmark)


def _resolve_event_date(cal: TradingCalendar, event_date: date, shift: str) -> date:
    if event_date in cal:
        return event_date
    if shift == "forward":
        for d in cal.dates:
            if d > event_date:
                return d
        raise CalendarError(f"no trading day on or after {event_date.isoformat()}")
    if shift == "backward":
        for d in reversed(cal.dates):
            if d < event_date:
                return d
        raise CalendarError(f"no trading day on or before {event_date.isoformat()}")
    raise CalendarError(f"unknown shift policy {shift!r} (use 'forward' or 'backward')")


def build_event_frame(
    returns: ReturnPanel,
    event_date: date,
    span: tuple[int, int] = (-115, 10),
    shift: str = "forward",
) -> EventFrame:
    """Re-key returns by relative day around the event date.

    ``span`` is inclusive; offset 0 is the resolved event trading day (a
    non-trading event date shifts forward by default, backward on request).
    Missing returns inside the span are recorded per ticker in
    ``EventFrame.missing`` for the strict-mode checks downstream.
    """
    lo, hi = span
    if lo > hi:
        raise WindowError(f"span ({lo}, {hi}) is reversed")
    cal = returns.calendar
    resolved = _resolve_event_date(cal, event_date, shift)
    pos = cal.index_of(resolved)
    if pos + lo < 0:
        raise WindowError(
            f"span start {lo} reaches before the first trading day {cal.dates[0].isoformat()}"
        )
    if pos + hi >= len(cal):
        raise WindowError(
            f"span end {hi} reaches after the last trading day {cal.dates[-1].isoformat()}"
        )
    offsets = {k: cal.dates[pos + k] for k in range(lo, hi + 1)}
    rekeyed: dict[str, dict[int, float]] = {}
    missing: dict[str, tuple[int, ...]] = {}
    for ticker, series in returns.returns.items():
        out = {k: series[d] for k, d in offsets.items() if d in series}
        gaps = tuple(k for k in offsets if k not in out)
        rekeyed[ticker] = out
        if gaps:
            missing[ticker] = gaps
    return EventFrame(
        event_date=resolved,
        offsets=offsets,
        returns=rekeyed,
        benchmark=returns.benchmark,
        missing=missing,
    )
