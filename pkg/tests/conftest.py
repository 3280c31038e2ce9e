from datetime import date, timedelta

import pytest

from uihstudy.event_study import WindowSpec
from uihstudy.market_data import EventFrame


def make_frame(returns_by_ticker, benchmark=None, span=None, start=date(2016, 1, 1)):
    """EventFrame straight from offset-keyed return dicts."""
    if span is None:
        lo = min(min(v) for v in returns_by_ticker.values())
        hi = max(max(v) for v in returns_by_ticker.values())
    else:
        lo, hi = span
    offsets = {k: start + timedelta(days=k - lo) for k in range(lo, hi + 1)}
    return EventFrame(
        event_date=offsets[0],
        offsets=offsets,
        returns=returns_by_ticker,
        benchmark=benchmark,
    )


@pytest.fixture
def estimation_window():
    return WindowSpec(-115, -11)
