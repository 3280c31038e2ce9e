import json

import pytest
from click.testing import CliRunner

from uihstudy.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, runner):
    root = tmp_path_factory.mktemp("cli")
    scenario = {"n_firms": 3, "seed": 4, "shocks": [[1, 0.02]]}
    (root / "scenario.json").write_text(json.dumps(scenario))
    result = runner.invoke(
        main,
        ["simulate", "--config", str(root / "scenario.json"), "--out", str(root / "prices.csv")],
    )
    assert result.exit_code == 0, result.output
    # The simulate summary names the benchmark and event date.
    assert "benchmark MKT" in result.output
    event_date = result.output.split("event ")[-1].strip()
    with open(root / "attributes.csv", "w") as fh:
        fh.write("ticker,total_assets,net_income\n")
        for t, a, income in zip(("F1", "F2", "F3"), (2e9, 5e8, 9e9), (3e6, 1e6, 7e6)):
            fh.write(f"{t},{a},{income}\n")
    config = {
        "prices": "prices.csv",
        "attributes": "attributes.csv",
        "event_date": event_date,
        "sectors": {"all": {"tickers": ["F1", "F2", "F3"], "benchmark": "MKT"}},
    }
    (root / "config.json").write_text(json.dumps(config))
    return root


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.output


def test_simulate_is_deterministic(runner, workdir, tmp_path):
    out = tmp_path / "again.csv"
    result = runner.invoke(
        main, ["simulate", "--config", str(workdir / "scenario.json"), "--out", str(out)]
    )
    assert result.exit_code == 0
    assert out.read_text() == (workdir / "prices.csv").read_text()


def test_run_writes_artifacts_inside_output_dir(runner, workdir, tmp_path):
    out = tmp_path / "artifacts"
    result = runner.invoke(
        main,
        [
            "run",
            "--config", str(workdir / "config.json"),
            "--format", "markdown",
            "--no-timestamp",
            "--output-dir", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    names = sorted(p.name for p in out.iterdir())
    assert names == ["car_paths.csv", "report.json", "tables.md"]
    report = json.loads((out / "report.json").read_text())
    assert "generated_at" not in report["metadata"]
    assert "all" in report["sectors"]
    assert (out / "tables.md").read_text().startswith("### Window")


def test_run_override_changes_estimation_window(runner, workdir, tmp_path):
    out = tmp_path / "o"
    result = runner.invoke(
        main,
        [
            "run",
            "--config", str(workdir / "config.json"),
            "--estimation-end", "-10",
            "--no-timestamp",
            "--output-dir", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert report["metadata"]["config"]["estimation_window"] == "[-114;-10]"


def test_run_bad_config_exits_nonzero_with_path(runner, tmp_path):
    result = runner.invoke(main, ["run", "--config", str(tmp_path / "missing.json")])
    assert result.exit_code == 1
    assert "missing.json" in result.output + (result.stderr or "")


def test_mc_outputs_summary_json(runner, workdir):
    result = runner.invoke(
        main,
        [
            "mc",
            "--config", str(workdir / "scenario.json"),
            "--trials", "5",
            "--statistic", "beta_hat",
        ],
    )
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["n_trials"] == 5
    assert abs(summary["mean"] - 1.0) < 0.2


def test_mc_unknown_statistic_fails(runner, workdir):
    result = runner.invoke(
        main,
        ["mc", "--config", str(workdir / "scenario.json"), "--trials", "2", "--statistic", "bogus"],
    )
    assert result.exit_code == 1


def test_render_round_trip(runner, workdir, tmp_path):
    out = tmp_path / "r"
    assert runner.invoke(
        main,
        ["run", "--config", str(workdir / "config.json"), "--no-timestamp", "--output-dir", str(out)],
    ).exit_code == 0
    result = runner.invoke(
        main, ["render", "--report", str(out / "report.json"), "--format", "csv"]
    )
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == "# Window [+0;+1]"
    md = tmp_path / "tables.md"
    result = runner.invoke(
        main,
        ["render", "--report", str(out / "report.json"), "--format", "markdown", "--out", str(md)],
    )
    assert result.exit_code == 0
    assert md.read_text().startswith("### Window")
