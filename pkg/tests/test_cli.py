"""Command-line interface: config resolution, validation, outputs, exit codes."""

import json
import math
import os

import pytest

from roughvix import UsageError
from roughvix.cli import RunConfig, main, parse_config, run, validate

X0 = math.log(0.235**2)

BASE_MODEL = [
    "--H", "0.3", "--eta", "0.5", "--T", "0.25", "--Delta", "0.08333333333333333",
    "--x0", str(X0),
]


# --- config resolution ------------------------------------------------------


def test_flags_resolve_to_a_complete_config():
    config = parse_config(
        ["price", *BASE_MODEL, "--payoff", "call", "--strike", "0.1",
         "--n", "50", "--M", "1000", "--cv", "--seed", "11"]
    )
    assert config.command == "price"
    assert config.H == 0.3
    assert config.cv is True
    assert config.seed == 11
    validate(config)


def test_strike_accepts_the_kappa_alias():
    config = parse_config(
        ["price", *BASE_MODEL, "--payoff", "call", "--kappa", "0.1",
         "--n", "10", "--M", "100"]
    )
    assert config.strike == 0.1


def test_config_file_keyvalue_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# price run\n"
        "H = 0.3\neta = 0.5\nT = 0.25\nDelta = 0.08333333333333333\n"
        f"x0 = {X0}\npayoff = call\nstrike = 0.1\nn = 10\nM = 500\ncv = true\n"
    )
    config = parse_config(["price", "--config", str(cfg), "--M", "2000"])
    assert config.M == 2000  # flag wins
    assert config.n == 10  # file fills the rest
    assert config.cv is True
    validate(config)


def test_config_file_json(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps({"H": 0.3, "eta": 0.5, "T": 0.25, "Delta": 1 / 12, "x0": X0,
                    "payoff": "put", "strike": 0.1, "n": 10, "M": 500})
    )
    config = parse_config(["price", "--config", str(cfg)])
    assert config.payoff == "put"
    validate(config)


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("frobnicate = 1\n")
    with pytest.raises(UsageError, match="frobnicate"):
        parse_config(["price", "--config", str(cfg)])


def test_preset_fills_every_required_field():
    for args in (
        ["strong-error", "--preset", "fig1"],
        ["strong-error", "--preset", "fig1-h03"],
        ["weak-error", "--preset", "fig2"],
        ["mse-cost", "--preset", "fig3"],
        ["price", "--preset", "ref-a"],
        ["price", "--preset", "ref-b"],
    ):
        config = parse_config(args)
        validate(config)  # fully populated


def test_preset_command_mismatch_is_rejected():
    with pytest.raises(UsageError, match="belongs to"):
        parse_config(["price", "--preset", "fig1"])


def test_preset_respects_flag_overrides():
    config = parse_config(["strong-error", "--preset", "fig1", "--M", "5000"])
    assert config.M == 5000
    assert config.n_ref == 512


def test_paper_scale_switches_protocol():
    desk = parse_config(["strong-error", "--preset", "fig1"])
    full = parse_config(["strong-error", "--preset", "fig1", "--paper-scale"])
    assert desk.n_ref == 512 and desk.M == 20_000
    assert full.n_ref == 2000 and full.M == 100_000


# --- validation -------------------------------------------------------------


def test_validation_reports_all_errors_at_once():
    config = RunConfig(command="price", estimator="mc")
    with pytest.raises(UsageError) as err:
        validate(config)
    message = str(err.value)
    for field in ("H", "eta", "T", "Delta", "x0", "strike", "n", "M"):
        assert field in message


def test_validation_rejects_smooth_hurst_with_closed_form_plan():
    config = parse_config(
        ["price", "--H", "0.6", "--eta", "0.5", "--T", "0.5", "--Delta",
         "0.08333333333333333", "--x0", str(X0), "--payoff", "call",
         "--strike", "0.1", "--estimator", "mlmc", "--epsilon", "0.01",
         "--plan-constants", "closed-form"]
    )
    with pytest.raises(UsageError, match="H < 1/2"):
        validate(config)
    # The message must point at the working alternative.
    with pytest.raises(UsageError, match="pilot"):
        validate(config)


def test_validation_rejects_cv_on_multilevel():
    config = parse_config(
        ["price", *BASE_MODEL, "--payoff", "call", "--strike", "0.1",
         "--estimator", "mlmc", "--epsilon", "0.01", "--cv"]
    )
    with pytest.raises(UsageError, match="control variate"):
        validate(config)


def test_validation_rejects_bad_divisor_grid():
    config = parse_config(
        ["strong-error", *BASE_MODEL, "--scheme", "rect", "--n-ref", "64",
         "--n-values", "8,12", "--M", "2000"]
    )
    with pytest.raises(UsageError, match="divisor"):
        validate(config)


def test_validation_requires_strike_for_calls():
    config = parse_config(
        ["price", *BASE_MODEL, "--payoff", "call", "--n", "10", "--M", "100"]
    )
    with pytest.raises(UsageError, match="strike"):
        validate(config)


# --- x0 curve loading -------------------------------------------------------


def test_x0_csv_step_curve(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text("date,x0\n0.5,-2.9\n0.54,-2.7\n")
    config = parse_config(
        ["price", "--H", "0.1", "--eta", "0.5", "--T", "0.5", "--Delta",
         "0.08333333333333333", "--x0-csv", str(path), "--x0-interp", "step",
         "--payoff", "call", "--strike", "0.1", "--n", "8", "--M", "100",
         "--output", str(tmp_path / "out.csv")]
    )
    validate(config)
    assert run(config) == 0
    assert (tmp_path / "out.csv").exists()


def test_x0_csv_malformed_rows_are_usage_errors(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text("date,x0\n0.5,notanumber\n")
    code = main(
        ["price", "--H", "0.1", "--eta", "0.5", "--T", "0.5", "--Delta",
         "0.08333333333333333", "--x0-csv", str(path), "--payoff", "call",
         "--strike", "0.1", "--n", "8", "--M", "100",
         "--output", str(tmp_path / "out.csv")]
    )
    assert code == 2


def test_x0_csv_missing_file_is_io_error(tmp_path):
    code = main(
        ["price", "--H", "0.1", "--eta", "0.5", "--T", "0.5", "--Delta",
         "0.08333333333333333", "--x0-csv", str(tmp_path / "absent.csv"),
         "--payoff", "call", "--strike", "0.1", "--n", "8", "--M", "100",
         "--output", str(tmp_path / "out.csv")]
    )
    assert code == 4


# --- outputs ----------------------------------------------------------------


def test_price_flat_model_writes_exact_value(tmp_path, capsys):
    out = tmp_path / "flat.csv"
    code = main(
        ["price", "--H", "0.3", "--eta", "0", "--T", "0.25", "--Delta",
         "0.08333333333333333", "--x0", str(X0), "--payoff", "call",
         "--strike", "0.1", "--n", "4", "--M", "10", "--output", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    value = float(row[header.index("value")])
    assert value == math.exp(X0 / 2) - 0.1
    assert float(row[header.index("std_error")]) == 0.0
    assert "value=" in capsys.readouterr().out


def test_same_config_and_seed_is_byte_identical(tmp_path):
    args = ["strong-error", "--H", "0.1", "--eta", "0.5", "--T", "0.5",
            "--Delta", "0.08333333333333333", "--x0", str(X0),
            "--scheme", "rect", "--n-ref", "64", "--n-values", "8,16,32",
            "--M", "2000", "--seed", "7"]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main([*args, "--output", str(out1)]) == 0
    assert main([*args, "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_manifest_round_trips_the_exact_config(tmp_path):
    out = tmp_path / "curve.csv"
    args = ["strong-error", "--preset", "fig1", "--M", "2000",
            "--n-values", "8,16,32", "--seed", "5", "--output", str(out)]
    config = parse_config(args)
    assert main(args) == 0
    manifest = json.loads((tmp_path / "curve.csv.manifest.json").read_text())
    assert manifest["schema_version"] == 1
    assert RunConfig.from_dict(manifest["config"]) == config
    assert manifest["outputs"] == ["curve.csv"]
    assert "fitted_slope" in manifest["summary"]


def test_json_results_format(tmp_path):
    out = tmp_path / "res.json"
    code = main(
        ["price", *BASE_MODEL, "--payoff", "call", "--strike", "0.1",
         "--n", "8", "--M", "200", "--format", "json", "--output", str(out)]
    )
    assert code == 0
    rows = json.loads(out.read_text())
    assert isinstance(rows, list) and rows[0]["estimator"] == "mc"


def test_default_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ROUGHVIX_OUTPUT_DIR", str(tmp_path))
    code = main(
        ["price", *BASE_MODEL, "--payoff", "call", "--strike", "0.1",
         "--n", "4", "--M", "50"]
    )
    assert code == 0
    names = os.listdir(tmp_path)
    results = [n for n in names if n.startswith("price_rect_") and n.endswith(".csv")]
    assert len(results) == 1
    assert f"{results[0]}.manifest.json" in names


def test_missing_parent_directory_is_io_error(tmp_path):
    out = tmp_path / "no" / "such" / "dir" / "x.csv"
    code = main(
        ["price", *BASE_MODEL, "--payoff", "call", "--strike", "0.1",
         "--n", "4", "--M", "50", "--output", str(out)]
    )
    assert code == 4


# --- exit codes -------------------------------------------------------------


def test_usage_error_exit_code(tmp_path):
    code = main(
        ["price", "--payoff", "call", "--n", "4", "--M", "50",
         "--output", str(tmp_path / "x.csv")]
    )
    assert code == 2


def test_covariance_check_passes_at_documented_tolerance(tmp_path):
    out = tmp_path / "cov.csv"
    code = main(
        ["covariance-check", "--pairs", "25", "--seed", "7", "--output", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    devs = [float(r.split(",")[header.index("rel_deviation")]) for r in lines[1:]]
    assert max(devs) <= 1e-9


def test_covariance_check_failure_exits_numeric(tmp_path):
    out = tmp_path / "cov.csv"
    code = main(
        ["covariance-check", "--pairs", "5", "--seed", "7",
         "--tolerance", "1e-30", "--output", str(out)]
    )
    assert code == 3
    assert out.exists()  # results still written for inspection
