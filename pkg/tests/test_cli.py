import csv
import json

import pytest

from targetzone.cli import main
from targetzone.fixtures import target_zone_fixture
from targetzone.timeseries import write_series_csv


@pytest.fixture
def series_csv(tmp_path):
    return write_series_csv(target_zone_fixture(n_steps=50_000), tmp_path / "fixture.csv")


def test_simulate_estimate_fit_pipeline(tmp_path):
    assert main(["simulate", "--out", str(tmp_path / "sim"), "--steps", "20000", "--seed", "1"]) == 0
    series = tmp_path / "sim" / "series_000.csv"
    assert main(["estimate", "--in", str(series), "--out", str(tmp_path / "est")]) == 0
    assert main(["fit", "--in", str(tmp_path / "est" / "estimate.csv"), "--out", str(tmp_path / "fit")]) == 0
    report = json.loads((tmp_path / "fit" / "fit.json").read_text())
    assert "ratio" in report and report["beta_hat"] > 0
    manifest = json.loads((tmp_path / "fit" / "manifest.json").read_text())
    assert manifest["subcommand"] == "fit" and manifest["outputs"] == ["fit.json"]


def test_estimate_bins_and_counts(series_csv, tmp_path):
    assert main(["estimate", "--in", str(series_csv), "--out", str(tmp_path), "--bins", "100",
                 "--min-count", "2"]) == 0
    with (tmp_path / "estimate.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) <= 100
    assert sum(int(r["count"]) for r in rows) <= 50_000


def test_inputs_untouched_and_rerun_identical(series_csv, tmp_path):
    before = series_csv.read_bytes()
    for d in ("a", "b"):
        assert main(["lrtest", "--in", str(series_csv), "--out", str(tmp_path / d)]) == 0
    assert series_csv.read_bytes() == before
    assert (tmp_path / "a" / "lrtest.json").read_bytes() == (tmp_path / "b" / "lrtest.json").read_bytes()


def test_config_file_and_flag_precedence(series_csv, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bins": 7, "min-count": 2}))
    assert main(["estimate", "--in", str(series_csv), "--out", str(tmp_path / "c"), "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "c" / "manifest.json").read_text())["params"]["bins"] == 7
    assert main(["estimate", "--in", str(series_csv), "--out", str(tmp_path / "d"), "--config", str(cfg),
                 "--bins", "9"]) == 0
    assert json.loads((tmp_path / "d" / "manifest.json").read_text())["params"]["bins"] == 9


def test_other_subcommands(series_csv, tmp_path):
    assert main(["krugman-curve", "--gamma", "1e5", "--sigma", "1e-3", "--out", str(tmp_path / "k")]) == 0
    header = (tmp_path / "k" / "krugman_curve.csv").read_text().splitlines()[0]
    assert header == "v,s,free_float"
    assert main(["diffusion-profile", "--out", str(tmp_path / "d")]) == 0
    assert len((tmp_path / "d" / "diffusion_profile.csv").read_text().splitlines()) == 122
    assert main(["backtest", "--in", str(series_csv), "--s-eq", "0.19", "--out", str(tmp_path / "b"),
                 "--trade-log"]) == 0
    assert json.loads((tmp_path / "b" / "backtest.json").read_text())["n_steps"] == 50_000
    assert main(["simulate", "--model", "physical", "--C", "1e-6", "--F", "1e-3", "--vol", "1e-4",
                 "--steps", "100", "--out", str(tmp_path / "p")]) == 0


@pytest.mark.parametrize("argv,code", [
    (["fit"], 1),
    (["nonsense"], 1),
    (["simulate", "--model", "gbm"], 1),
    (["krugman-curve", "--gamma", "-1", "--sigma", "1"], 1),
    (["estimate", "--in", "does-not-exist.csv"], 2),
    (["simulate", "--model", "power", "--beta", "1e3", "--mu", "3", "--initial-s", "10",
      "--tau", "1", "--steps", "10000"], 3),
])
def test_exit_codes(tmp_path, capsys, argv, code):
    if argv[0] != "nonsense" and argv != ["fit"]:
        argv = argv + ["--out", str(tmp_path)]
    assert main(argv) == code
    err = capsys.readouterr().err.strip()
    assert err


def test_bad_config_is_usage_error(tmp_path, series_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"no_such_option": 1}))
    assert main(["estimate", "--in", str(series_csv), "--out", str(tmp_path), "--config", str(cfg)]) == 1
