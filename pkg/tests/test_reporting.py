import csv
import io
import json

import pytest

from uihstudy.cross_section import CoefficientRow, RegressionResult
from uihstudy.errors import ConfigError
from uihstudy.event_study import WindowSpec
from uihstudy.reporting import (
    StudyConfig,
    StudyReport,
    car_paths_csv,
    render_coefficient_cell,
    render_report_tables,
    render_table,
    run_study,
)
from uihstudy.simulation import ScenarioSpec, generate_scenario


@pytest.fixture(scope="module")
def study_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("study")
    spec = ScenarioSpec(n_firms=4, seed=9, shocks=((1, 0.02), (2, 0.015)))
    panel, _, truth = generate_scenario(spec)
    (root / "prices.csv").write_text(panel.to_csv())
    with open(root / "attributes.csv", "w") as fh:
        fh.write("ticker,total_assets,net_income\n")
        incomes = [3e6, 1e6, 7e6, 2e6]
        for i, t in enumerate(truth.tickers):
            fh.write(f"{t},{1e9 * (i + 1)},{incomes[i]}\n")
    config = {
        "prices": "prices.csv",
        "attributes": "attributes.csv",
        "event_date": truth.event_date.isoformat(),
        "sectors": {"tech": {"tickers": list(truth.tickers), "benchmark": truth.benchmark}},
    }
    (root / "config.json").write_text(json.dumps(config))
    return root


def toy_result(window=WindowSpec(0, 1), names=("const", "Trump"), coefs=(-0.18336, 0.347377), ps=(0.0008, 0.0472)):
    rows = tuple(
        CoefficientRow(n, c, 0.01, p, "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else "")
        for n, c, p in zip(names, coefs, ps)
    )
    return RegressionResult(window=window, rows=rows, adjusted_r2=-0.196, n_obs=8, robust_variant="hc1")


class TestCoefficientCell:
    def test_ascii_fixture(self):
        assert render_coefficient_cell(-0.18336, 0.0008) == "-0.18336*** (0.0008)"

    def test_unicode_minus_fixture(self):
        assert render_coefficient_cell(-0.18336, 0.0008, unicode_minus=True) == "−0.18336*** (0.0008)"

    def test_six_significant_digits(self):
        assert render_coefficient_cell(0.34737654, 0.0472) == "0.347377** (0.0472)"

    def test_zero_estimate_unit_p(self):
        assert render_coefficient_cell(0.0, 1.0) == "0 (1.0000)"

    def test_tiny_p_rounds_to_zero_string(self):
        assert render_coefficient_cell(1.0, 0.00004) == "1*** (0.0000)"


class TestRenderTable:
    def test_markdown_single_cell(self):
        text = render_table({"tech": toy_result()}, "markdown")
        assert "| const | −0.18336*** (0.0008) |" in text
        assert "Adjusted R2" in text
        assert "−0.196" in text
        assert "-0.196" not in text  # hyphen-minus replaced throughout

    def test_csv_keeps_ascii_minus(self):
        text = render_table({"tech": toy_result()}, "csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["", "tech"]
        assert rows[1] == ["const", "-0.18336*** (0.0008)"]
        assert rows[-1] == ["Adjusted R2", "-0.196"]

    def test_json_carries_raw_numbers(self):
        payload = json.loads(render_table({"tech": toy_result()}, "json"))
        cell = payload["rows"][0]["cells"]["tech"]
        assert cell["estimate"] == -0.18336
        assert cell["p_value"] == 0.0008
        assert cell["stars"] == "***"
        assert payload["adjusted_r2"]["tech"] == -0.196

    def test_eight_column_grid_shape(self):
        results = {f"s{i}": toy_result() for i in range(8)}
        text = render_table(results, "markdown")
        header = text.splitlines()[0]
        assert header.count("|") == 10  # edge pipes + blank corner + 8 sectors

    def test_ragged_grid_rejected(self):
        results = {"a": toy_result(), "b": toy_result(names=("const", "Other"))}
        with pytest.raises(ConfigError, match="ragged"):
            render_table(results, "markdown")

    def test_unknown_format_rejected(self):
        with pytest.raises(ConfigError, match="format"):
            render_table({"a": toy_result()}, "xlsx")


class TestStudyConfig:
    def test_read_with_overrides(self, study_dir):
        config = StudyConfig.read(study_dir / "config.json", {"estimation_end": -10})
        assert config.estimation_end == -10
        assert config.estimation_window == WindowSpec(-114, -10)
        assert config.prices.endswith("prices.csv")

    def test_unknown_key_rejected(self, study_dir):
        with pytest.raises(ConfigError, match="unknown config key"):
            StudyConfig.read(study_dir / "config.json", {"estimaton_end": -10})

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(ConfigError, match="nope.json"):
            StudyConfig.read(tmp_path / "nope.json")

    def test_bad_values_rejected(self, study_dir):
        for overrides in ({"robust": "hc9"}, {"mode": "mixed"}, {"output_format": "pdf"}):
            with pytest.raises(ConfigError):
                StudyConfig.read(study_dir / "config.json", overrides)

    def test_window_strings_parsed(self, study_dir):
        config = StudyConfig.read(
            study_dir / "config.json",
            {"event_period": "-5:5", "regression_windows": ["0:1"]},
        )
        assert config.event_period == WindowSpec(-5, 5)
        assert config.regression_windows == (WindowSpec(0, 1),)


class TestRunStudy:
    def test_report_structure(self, study_dir):
        report = run_study(StudyConfig.read(study_dir / "config.json"))
        sector = report.sectors["tech"]
        assert set(sector["market_model"]) == {"F1", "F2", "F3", "F4"}
        assert set(sector["uih"]["hypotheses"]) == {"H1a", "H1b", "H2"}
        assert len(sector["regressions"]) == 2
        assert sector["car_paths"]["F1"][0][0] == -10
        assert sector["car_paths"]["F1"][-1][0] == 10

    def test_deterministic_without_timestamp(self, study_dir):
        config = StudyConfig.read(study_dir / "config.json", {"include_timestamp": False})
        a = run_study(config).to_json()
        b = run_study(config).to_json()
        assert a == b

    def test_json_round_trip(self, study_dir):
        config = StudyConfig.read(study_dir / "config.json", {"include_timestamp": False})
        report = run_study(config)
        again = StudyReport.from_json(report.to_json())
        assert again.data == report.data

    def test_missing_prices_named(self, study_dir, tmp_path):
        cfg = json.loads((study_dir / "config.json").read_text())
        cfg["prices"] = "gone.csv"
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        with pytest.raises(ConfigError, match="gone.csv"):
            run_study(StudyConfig.read(p))

    def test_cross_section_mode_pools_windows(self, study_dir):
        config = StudyConfig.read(study_dir / "config.json", {"mode": "cross-section"})
        report = run_study(config)
        regs = report.sectors["tech"]["regressions"]
        assert len(regs) == 1
        assert regs[0]["window"] is None
        assert regs[0]["n_obs"] == 8  # 4 firms x 2 windows

    def test_shock_shows_up_in_hypotheses(self, study_dir):
        report = run_study(StudyConfig.read(study_dir / "config.json"))
        h2 = report.sectors["tech"]["uih"]["hypotheses"]["H2"]
        assert h2["mean_car"] > 0.02  # 0.02 + 0.015 injected on days +1, +2


class TestReportRendering:
    def test_tables_round_trip_numbers(self, study_dir):
        config = StudyConfig.read(study_dir / "config.json", {"include_timestamp": False})
        report = run_study(config)
        md = render_report_tables(report, "markdown")
        as_json = render_report_tables(report, "json")
        assert "Window [+0;+1]" in md
        first = json.loads(as_json.split("\n}\n")[0] + "\n}")
        reg = report.sectors["tech"]["regressions"][0]
        cell = first["rows"][0]["cells"]["tech"]
        assert cell["estimate"] == reg["rows"][0]["coefficient"]

    def test_car_paths_csv_layout(self, study_dir):
        report = run_study(StudyConfig.read(study_dir / "config.json"))
        text = car_paths_csv(report)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["ticker", "day", "car"]
        assert rows[1][0] == "F1"
        assert rows[1][1] == "-10"
        # repr round-trip: values survive float() exactly
        stored = float(rows[1][2])
        assert stored == report.sectors["tech"]["car_paths"]["F1"][0][1]
