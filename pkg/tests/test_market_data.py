import math
from datetime import date, timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uihstudy.errors import CalendarError, DataError, WindowError
from uihstudy.market_data import (
    TradingCalendar,
    build_event_frame,
    compute_log_returns,
    load_price_panel,
    read_price_records,
)

D = date.fromisoformat


def calendar_of(n, start=date(2016, 1, 1)):
    return TradingCalendar(tuple(start + timedelta(days=i) for i in range(n)))


def panel_of(prices, start=date(2016, 1, 1)):
    records = [
        (start + timedelta(days=i), "AAA", p) for i, p in enumerate(prices)
    ]
    return load_price_panel(records)


class TestCalendar:
    def test_strictly_increasing_enforced(self):
        with pytest.raises(CalendarError):
            TradingCalendar((D("2016-11-08"), D("2016-11-08")))
        with pytest.raises(CalendarError):
            TradingCalendar((D("2016-11-09"), D("2016-11-08")))

    def test_membership_and_lookup(self):
        cal = calendar_of(3)
        assert D("2016-01-02") in cal
        assert cal.index_of(D("2016-01-03")) == 2
        with pytest.raises(CalendarError):
            cal.index_of(D("2016-02-01"))

    def test_read_file(self, tmp_path):
        p = tmp_path / "cal.txt"
        p.write_text("2016-11-07\n2016-11-08\n\n2016-11-09\n")
        assert len(TradingCalendar.read(p)) == 3
        p.write_text("08/11/2016\n")
        with pytest.raises(DataError, match="unparseable date"):
            TradingCalendar.read(p)


class TestLoadPricePanel:
    def test_minimal_well_formed(self):
        panel = load_price_panel([(D("2016-11-07"), "AAA", 100.0), (D("2016-11-08"), "AAA", 101.0)])
        assert panel.tickers == ("AAA",)
        assert len(panel.prices["AAA"]) == 2

    def test_non_positive_price_rejected(self):
        with pytest.raises(DataError, match="non-positive price"):
            load_price_panel([(D("2016-11-08"), "AAA", 0.0)])

    def test_duplicate_row_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            load_price_panel(
                [(D("2016-11-08"), "AAA", 101.0), (D("2016-11-08"), "AAA", 102.0)]
            )

    def test_date_outside_calendar(self):
        cal = TradingCalendar((D("2016-11-08"),))
        with pytest.raises(DataError, match="outside the trading calendar"):
            load_price_panel([(D("2016-11-09"), "AAA", 100.0)], cal)

    def test_csv_errors_carry_row_numbers(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("date,ticker,close\n2016-11-08,AAA,abc\n")
        with pytest.raises(DataError, match="row 2"):
            read_price_records(f)
        f.write_text("when,name,px\n")
        with pytest.raises(DataError, match="header"):
            read_price_records(f)

    def test_csv_round_trip(self, tmp_path):
        panel = panel_of([100.0, 101.5, 99.25])
        f = tmp_path / "p.csv"
        f.write_text(panel.to_csv())
        again = load_price_panel(read_price_records(f))
        assert again.prices == panel.prices


class TestLogReturns:
    def test_constant_prices_zero_returns(self):
        rp = compute_log_returns(panel_of([100.0, 100.0, 100.0]))
        assert list(rp.returns["AAA"].values()) == [0.0, 0.0]

    def test_hand_value(self):
        rp = compute_log_returns(panel_of([100.0, 110.0]))
        (r,) = rp.returns["AAA"].values()
        assert r == pytest.approx(0.09531017980432486, abs=1e-15)

    def test_scale_invariance_times_three(self):
        base = compute_log_returns(panel_of([100.0, 101.0, 103.0]))
        scaled = compute_log_returns(panel_of([300.0, 303.0, 309.0]))
        assert list(base.returns["AAA"].values()) == list(scaled.returns["AAA"].values())

    @given(
        prices=st.lists(st.floats(min_value=0.5, max_value=5000.0), min_size=2, max_size=30),
        exponent=st.integers(min_value=-20, max_value=20),
    )
    def test_scale_invariance_power_of_two_is_bitwise(self, prices, exponent):
        c = 2.0**exponent
        base = compute_log_returns(panel_of(prices))
        scaled = compute_log_returns(panel_of([c * p for p in prices]))
        assert list(base.returns["AAA"].values()) == list(scaled.returns["AAA"].values())

    def test_single_observation_strict_vs_lenient(self):
        panel = load_price_panel([(D("2016-11-08"), "AAA", 100.0), (D("2016-11-08"), "BBB", 50.0), (D("2016-11-09"), "BBB", 51.0)])
        with pytest.raises(DataError, match="AAA"):
            compute_log_returns(panel, strict=True)
        with pytest.warns(UserWarning, match="dropped"):
            rp = compute_log_returns(panel, strict=False)
        assert rp.tickers == ("BBB",)

    def test_unknown_benchmark_rejected(self):
        with pytest.raises(DataError, match="benchmark"):
            compute_log_returns(panel_of([100.0, 101.0]), benchmark="MKT")

    @given(st.lists(st.floats(min_value=1.0, max_value=1000.0), min_size=3, max_size=40))
    @settings(max_examples=50)
    def test_cumulative_returns_reconstruct_price_ratio(self, prices):
        rp = compute_log_returns(panel_of(prices))
        total = sum(rp.returns["AAA"].values())
        assert math.exp(total) == pytest.approx(prices[-1] / prices[0], rel=1e-12)


class TestEventFrame:
    def test_direct_indexing(self):
        rp = compute_log_returns(panel_of([100.0] * 5))
        frame = build_event_frame(rp, date(2016, 1, 3), span=(-1, 1))
        assert sorted(frame.offsets) == [-1, 0, 1]
        assert frame.offsets[0] == date(2016, 1, 3)
        assert frame.offsets[-1] == date(2016, 1, 2)
        assert frame.offsets[1] == date(2016, 1, 4)

    def test_non_trading_event_day_shifts(self):
        records = [
            (D("2016-11-07"), "AAA", 100.0),
            (D("2016-11-08"), "AAA", 100.0),
            (D("2016-11-10"), "AAA", 100.0),
        ]
        rp = compute_log_returns(load_price_panel(records))
        fwd = build_event_frame(rp, D("2016-11-09"), span=(-1, 0))
        assert fwd.event_date == D("2016-11-10")
        back = build_event_frame(rp, D("2016-11-09"), span=(-1, 0), shift="backward")
        assert back.event_date == D("2016-11-08")

    def test_full_span_offset_count(self):
        # 200-day calendar, event at position 150, span (-115, +10) -> 126 offsets.
        rp = compute_log_returns(panel_of([100.0] * 200))
        event = date(2016, 1, 1) + timedelta(days=150)
        frame = build_event_frame(rp, event, span=(-115, 10))
        assert len(frame.offsets) == 126
        assert frame.offsets[0] == event

    def test_span_beyond_calendar_names_boundary(self):
        rp = compute_log_returns(panel_of([100.0] * 10))
        with pytest.raises(WindowError, match="first trading day 2016-01-01"):
            build_event_frame(rp, date(2016, 1, 5), span=(-5, 1))
        with pytest.raises(WindowError, match="last trading day 2016-01-10"):
            build_event_frame(rp, date(2016, 1, 5), span=(-1, 50))

    def test_offset_date_bijection(self):
        rp = compute_log_returns(panel_of([100.0] * 30))
        frame = build_event_frame(rp, date(2016, 1, 15), span=(-5, 5))
        for k, d in frame.offsets.items():
            assert frame.offset_of(d) == k
            assert frame.date_of(k) == d

    def test_missing_returns_surfaced(self):
        # BBB lacks a price on one interior date -> two missing returns.
        records = [(date(2016, 1, 1) + timedelta(days=i), "AAA", 100.0) for i in range(5)]
        records += [
            (date(2016, 1, 1) + timedelta(days=i), "BBB", 100.0) for i in (0, 1, 3, 4)
        ]
        rp = compute_log_returns(load_price_panel(records))
        frame = build_event_frame(rp, date(2016, 1, 3), span=(-1, 1))
        assert "AAA" not in frame.missing
        assert frame.missing["BBB"] == (0, 1)

    def test_first_post_event_day(self):
        rp = compute_log_returns(panel_of([100.0] * 5))
        frame = build_event_frame(rp, date(2016, 1, 3), span=(-1, 1))
        assert frame.first_post_event_day() == 1
