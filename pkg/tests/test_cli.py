import csv
import json

import pytest

from qvalve.cli import main
from qvalve.config import ConfigError, build_config, load_config_file, resolve_preset


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_config(tmp_path, name, data):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(data))
    return path


CW_POINT = {"experiment": "cw_point", "u": 1.0, "j": 0.1, "f": 0.5, "delta_RL": 20.0,
            "omega_g": -10.0, "n_max_left": 6, "n_max_right": 6, "truncation_check": False}


def test_custom_cw_point_reproduces_left_rectification(tmp_path):
    cfg = write_config(tmp_path, "point", CW_POINT)
    assert main(["run", "custom", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "point.csv")
    assert len(rows) == 1
    assert float(rows[0]["R"]) == pytest.approx(-0.30239, abs=1e-4)
    assert float(rows[0]["g2_L"]) < 1
    meta = json.loads((tmp_path / "point.meta.json").read_text())
    assert meta["config"]["omega_g"] == -10.0
    assert "gamma" in meta["notes"]["units"]
    assert meta["code_version"]


def test_truncation_below_one_quantum_is_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad", {**CW_POINT, "n_max_left": 0})
    assert main(["run", "custom", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "n_max_left" in err and "truncation" in err
    assert not (tmp_path / "bad.csv").exists()


@pytest.mark.parametrize("argv, needle", [
    (["run", "fig7"], "unknown target"),
    (["run", "custom"], "--config"),
    (["run", "fig2", "--u", "-1"], "u:"),
    (["run", "fig2", "--format", "xml"], "format"),
    (["run", "fig2", "--grid-step", "0.3"], "grid_step"),
    (["run", "fig2", "--n-max-left", "two"], "n_max_left"),
])
def test_usage_errors_exit_2(argv, needle, capsys):
    assert main(argv) == 2
    assert needle in capsys.readouterr().err


def test_unknown_flag_and_key(tmp_path, capsys):
    assert main(["run", "fig2", "--bogus", "1"]) == 2
    cfg = write_config(tmp_path, "extra", {**CW_POINT, "colour": "red"})
    assert main(["run", "custom", "--config", str(cfg)]) == 2
    assert "colour" in capsys.readouterr().err


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config_file(bad)
    nested = write_config(tmp_path, "nested", {"u": {"value": 1}})
    with pytest.raises(ConfigError, match="nested"):
        load_config_file(nested)


def test_identical_config_gives_byte_identical_csv(tmp_path):
    cfg = write_config(tmp_path, "scan", {
        "experiment": "frequency_scan", "u": 1.0, "j": 0.1, "delta_RL": 20.0,
        "grid_start": -10.2, "grid_stop": -9.8, "grid_step": 0.1,
        "n_max_left": 4, "n_max_right": 4, "truncation_check": False,
    })
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "custom", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["run", "custom", "--config", str(cfg), "--out", str(b), "--workers", "2"]) == 0
    assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()


def test_json_output(tmp_path):
    cfg = write_config(tmp_path, "p", CW_POINT)
    assert main(["run", "custom", "--config", str(cfg), "--out", str(tmp_path), "--format", "json"]) == 0
    data = json.loads((tmp_path / "p.json").read_text())
    assert data["columns"][0] == "omega_g"
    assert data["rows"][0]["status"] == "ok"


def test_preset_overrides_and_schema():
    cfg = resolve_preset("fig2")
    assert len(cfg.scan_grid()) == 201
    assert cfg.scan_grid()[0] == -15.0 and cfg.scan_grid()[-1] == 5.0
    assert resolve_preset("fig4", {"j": 100}).j_values is None
    fig3 = resolve_preset("fig3", {"u": 10})
    assert fig3.u_values == [10]
    assert len(fig3.j_grid()) == 30
    assert fig3.parsed_panels() == [(20.0, "left"), (0.0, "right")]


def test_fig4_strong_coupling_splits_evenly(tmp_path):
    argv = ["run", "fig4", "--j", "100", "--grid-start", "-5", "--grid-stop", "20", "--grid-step", "12.5",
            "--truncation-check", "false", "--out", str(tmp_path)]
    assert main(argv) == 0
    rows = read_csv(tmp_path / "fig4.csv")
    assert list(rows[0]) == ["delta_RL", "j", "R", "T_R", "T_L", "status"]
    assert len(rows) == 3
    for r in rows:
        assert abs(float(r["T_R"]) - 0.5) < 0.05 and abs(float(r["T_L"]) - 0.5) < 0.05


def test_flagged_rows_exit_1_and_still_write(tmp_path):
    argv = ["run", "fig4", "--j", "1", "--grid-start", "0", "--grid-stop", "1", "--grid-step", "1",
            "--t-cap", "2", "--truncation-check", "false", "--out", str(tmp_path)]
    assert main(argv) == 1
    rows = read_csv(tmp_path / "fig4.csv")
    assert [r["status"] for r in rows] == ["error:IncompleteRelaxationError"] * 2
    assert rows[0]["R"] == "nan"


def test_build_config_coercion():
    cfg = build_config({"experiment": "cw_point", "u": "1", "j": 0, "delta_RL": 3,
                        "u_values": "1, 2.5", "truncation_check": "no"})
    assert cfg.u == 1.0 and cfg.u_values == [1.0, 2.5] and cfg.truncation_check is False
    with pytest.raises(ConfigError):
        build_config({"experiment": "cw_point", "u": 1, "j": 0, "delta_RL": 0, "n_init": 1.5})
