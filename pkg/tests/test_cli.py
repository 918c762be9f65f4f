"""Command-line behaviour: exit codes, artifacts, config merging, determinism."""

from __future__ import annotations

import json

import pytest

from finvert.cli import main


def run(argv):
    return main(list(argv))


def read_bytes(path):
    return path.read_bytes()


# --- exit codes ---


def test_certify_ok_exit_zero(tmp_path, capsys):
    code = run([
        "certify", "--map", "sin-perturbed-identity", "--seed", "0",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "certified" in out.lower()
    data = json.loads((tmp_path / "certificate.json").read_text())
    assert data["verdict"] == "certified"
    assert (tmp_path / "profile.csv").exists()
    assert (tmp_path / "profile.png").exists()


def test_certify_refuted_exit_two(tmp_path):
    code = run([
        "certify", "--map", "abs-kink", "--seed", "0",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 2
    data = json.loads((tmp_path / "certificate.json").read_text())
    assert data["verdict"] == "refuted"


def test_missing_seed_is_usage_error(tmp_path, capsys):
    code = run(["certify", "--map", "cube", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "seed" in err


def test_unknown_map_is_usage_error(tmp_path, capsys):
    code = run([
        "certify", "--map", "definitely-not-here", "--seed", "0",
        "--out", str(tmp_path),
    ])
    assert code == 1
    err = capsys.readouterr().err
    assert "definitely-not-here" in err


def test_unknown_flag_is_usage_error(tmp_path, capsys):
    code = run(["certify", "--bogus-flag", "1"])
    assert code == 1


def test_missing_subcommand_is_usage_error(capsys):
    assert run([]) == 1


def test_invert_success_exit_zero(tmp_path, capsys):
    code = run([
        "invert", "--map", "sin-perturbed-identity", "--target", "10",
        "--seed", "0", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["status"] == "ok"
    assert result["residual"] <= 1e-8
    assert (tmp_path / "trace.csv").exists()
    assert (tmp_path / "trace.png").exists()
    out = capsys.readouterr().out
    assert "residual" in out


def test_invert_lift_failure_exit_three(tmp_path, capsys):
    code = run([
        "invert", "--map", "abs-kink", "--x0", "1", "--target", "-1",
        "--seed", "0", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 3
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["status"] == "lift-failure"
    assert (tmp_path / "trace.csv").exists()
    err = capsys.readouterr().err
    assert "trace.csv" in err


def test_radius_writes_table_and_certificate(tmp_path):
    code = run([
        "radius", "--map", "sin-perturbed-identity", "--r", "1,2",
        "--seed", "0", "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    table = (tmp_path / "radius.csv").read_text().strip().splitlines()
    assert table[0] == "r,rho,verdict"
    assert len(table) == 3
    assert (tmp_path / "radius.png").exists()
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["verdict"] == "certified"


def test_profile_writes_csv_and_figure(tmp_path):
    code = run([
        "profile", "--map", "kink-23", "--seed", "0",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    lines = (tmp_path / "profile.csv").read_text().strip().splitlines()
    assert lines[0] == "rho,inf_index"
    assert len(lines) > 1
    assert (tmp_path / "profile.png").exists()


# --- config file handling ---


def test_config_supplies_options(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "# comment line\n"
        "map = sin-perturbed-identity\n"
        "seed = 0\n"
        f"out = {tmp_path / 'a'}\n"
        "no_timestamp = true\n"
    )
    assert run(["certify", "--config", str(cfgfile)]) == 0
    assert (tmp_path / "a" / "certificate.json").exists()


def test_cli_flags_override_config(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(
        "map = abs-kink\nseed = 0\n"
        f"out = {tmp_path / 'a'}\nno_timestamp = true\n"
    )
    # command line switches the map, so the verdict flips to certified
    code = run([
        "certify", "--config", str(cfgfile),
        "--map", "sin-perturbed-identity", "--out", str(tmp_path / "b"),
    ])
    assert code == 0
    data = json.loads((tmp_path / "b" / "certificate.json").read_text())
    assert data["verdict"] == "certified"


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("map = cube\nseed = 0\nbanana = 3\n")
    assert run(["certify", "--config", str(cfgfile)]) == 1
    assert "banana" in capsys.readouterr().err


def test_config_rejects_bad_syntax(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("map cube\n")
    assert run(["certify", "--config", str(cfgfile)]) == 1


def test_missing_config_file(tmp_path, capsys):
    assert run(["certify", "--config", str(tmp_path / "none.cfg")]) == 1


# --- determinism ---


def test_runs_are_byte_identical(tmp_path):
    args = [
        "certify", "--map", "sin-perturbed-identity", "--seed", "7",
        "--no-timestamp",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    for name in ("certificate.json", "profile.csv", "profile.png"):
        assert read_bytes(a / name) == read_bytes(b / name), name


def test_invert_runs_are_byte_identical(tmp_path):
    args = [
        "invert", "--map", "sin-perturbed-identity", "--target", "3",
        "--seed", "5", "--no-timestamp",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    for name in ("result.json", "trace.csv", "trace.png"):
        assert read_bytes(a / name) == read_bytes(b / name), name


def test_seed_changes_certificate_numbers(tmp_path):
    args = [
        "certify", "--map", "sin-perturbed-identity", "--no-timestamp",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    run(args + ["--seed", "1", "--out", str(a)])
    run(args + ["--seed", "2", "--out", str(b)])
    da = json.loads((a / "certificate.json").read_text())
    db = json.loads((b / "certificate.json").read_text())
    assert da["provenance"]["seed"] != db["provenance"]["seed"]


def test_timestamp_toggle(tmp_path):
    base = [
        "certify", "--map", "cube", "--x0", "1", "--seed", "0",
    ]
    run(base + ["--out", str(tmp_path / "a"), "--no-timestamp"])
    run(base + ["--out", str(tmp_path / "b")])
    da = json.loads((tmp_path / "a" / "certificate.json").read_text())
    db = json.loads((tmp_path / "b" / "certificate.json").read_text())
    assert "timestamp" not in da
    assert "timestamp" in db


# --- non-square maps go through the chart view ---


def test_certify_non_square_uses_local_model(tmp_path):
    code = run([
        "certify", "--map", "circle-cover", "--seed", "0",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    data = json.loads((tmp_path / "certificate.json").read_text())
    assert data["verdict"] == "certified"
    assert data["provenance"]["chart_view"] is True


def test_invert_circle_cover_angle_target(tmp_path):
    code = run([
        "invert", "--map", "circle-cover", "--x0", "0.3",
        "--target", "2.0", "--seed", "0",
        "--out", str(tmp_path), "--no-timestamp",
    ])
    assert code == 0
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["status"] == "ok"
    assert abs(result["inverse"][0] - 2.0) < 1e-6
