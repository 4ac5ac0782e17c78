import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from dualconn import config as cfg
from dualconn.cli import fmt_number, main, to_json
from dualconn.errors import ConfigError
from dualconn.relmodel import evaluate

from conftest import reference_scenario


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fmt_number_round_trips():
    for v in (0.1, 2.0364646e-8, 1 / 3, 1e-300):
        assert float(fmt_number(v)) == v
    assert fmt_number(3) == "3"
    assert fmt_number(float("nan")) == ""
    assert fmt_number(True) == "true"


def test_to_json_keeps_floats():
    doc = json.loads(to_json({"a": 1.0, "b": [0.1, 2], "c": None, "d": float("inf")}))
    assert doc == {"a": 1.0, "b": [0.1, 2], "c": None, "d": None}
    assert isinstance(doc["a"], float)


def test_map_correlation_table(capsys):
    code, out, _ = run(capsys, "map-correlation", "--eps-ran", "1e-4", "--rho-h", "0.05,0.1,0.3,0.7,1")
    assert code == 0
    assert out.splitlines()[0] == "rho_h,rho"
    values = [float(r["rho"]) for r in rows(out)]
    for v, printed, unit in zip(values, [1e-4, 3e-4, 4e-3, 0.1, 1.0], [1e-4, 1e-4, 1e-3, 0.1, 1]):
        assert abs(v - printed) <= unit


def test_map_correlation_zero_and_json(capsys):
    code, out, _ = run(capsys, "map-correlation", "--eps-ran", "1e-3", "--rho-h", "0", "--format", "json")
    assert code == 0
    assert json.loads(out) == [{"rho_h": 0.0, "rho": 0.0}]


def test_map_correlation_degenerate_exit_2(capsys):
    code, _, err = run(capsys, "map-correlation", "--eps-ran", "0", "--rho-h", "0.3")
    assert code == 2
    assert "eps" in err and "constant failure indicator" in err


def test_eval_reference_defaults(capsys):
    code, out, _ = run(capsys, "eval", "--rho", "0")
    assert code == 0
    report = json.loads(out)
    assert report["architecture"] == "ran_split"
    assert report["error_rate"] == pytest.approx(2.03e-8, rel=5e-3)
    assert report["error_rate"] == evaluate(reference_scenario()).error_rate
    c = report["components"]
    assert {"rho", "joint_outcomes", "eps_cn", "eps_sx", "eps_m"} <= set(c)


def test_eval_cn_split_csv(capsys):
    code, out, _ = run(capsys, "eval", "--arch", "cn_split", "--format", "csv")
    assert code == 0
    (row,) = rows(out)
    assert float(row["error_rate"]) == evaluate(reference_scenario("cn_split")).error_rate


def test_eval_zeros(capsys):
    code, out, _ = run(capsys, "eval", "--preset", "zeros")
    assert code == 0
    assert json.loads(out)["reliability"] == 1.0


def test_eval_infeasible_exit_3(capsys):
    code, _, err = run(capsys, "eval", "--set", "ran.eps_ran_2=1e-2", "--rho", "0.5")
    assert code == 3
    assert "Fréchet" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--eps-ran", "2"],
    ["eval", "--preset", "nope"],
    ["eval", "--set", "points.eps_ue=oops"],
    ["eval", "--set", "noequals"],
    ["eval", "--rho", "0.1", "--rho-h", "0.1"],
    ["sweep", "--axis", "rho=bad"],
    ["sweep", "--axis", "latency=1,2"],
    ["max-nodes", "--requirement", "3e-8", "--axis", "n=1,2"],
    ["max-nodes", "--requirement", "0"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_eval_config_file_and_field_path_errors(tmp_path, capsys):
    doc = cfg.preset("paper-defaults")
    doc["points"]["eps_xn"] = "high"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "eval", "--config", str(path))
    assert code == 2
    assert "points.eps_xn" in err
    code, _, err = run(capsys, "eval", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_config_field_paths():
    doc = cfg.preset("paper-defaults")
    del doc["ran"]["eps_ran_1"]
    with pytest.raises(ConfigError, match=r"ran\.eps_ran_1: missing"):
        cfg.parse_scenario(doc)
    doc = cfg.preset("paper-defaults")
    doc["cn_paths"] = [{"node_errors": [1e-7], "link_errors": [1e-6]}]
    del doc["homogeneous"]
    with pytest.raises(ConfigError, match=r"cn_paths\[0\]"):
        cfg.parse_scenario(doc)


def test_link_budget_config(tmp_path, capsys):
    doc = cfg.preset("paper-defaults")
    budget = {"transmit_power_dbm": 30.0, "path_loss_db": 100.0, "threshold_dbm": -99.752,
              "shadowing_stddev_db": 8.0}
    doc["ran"] = {"link_budget_1": budget, "link_budget_2": budget, "shadowing": {"rho_h": 0.3}}
    jsonschema.validate(doc, cfg.schema())
    path = tmp_path / "budget.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "eval", "--config", str(path))
    assert code == 0
    rho = json.loads(out)["components"]["rho"]
    assert rho == pytest.approx(0.004, abs=1e-3)


def test_presets_match_schema():
    for name in cfg.PRESETS:
        jsonschema.validate(cfg.preset(name), cfg.schema())


def test_dump_config_round_trip(tmp_path, capsys):
    target = tmp_path / "scenario.json"
    code, _, _ = run(capsys, "dump-config", "--arch", "cn_split", "--rho", "0.004", "--n-nodes", "7",
                     "--output", str(target))
    assert code == 0
    jsonschema.validate(json.loads(target.read_text()), cfg.schema())
    _, direct, _ = run(capsys, "eval", "--arch", "cn_split", "--rho", "0.004", "--n-nodes", "7")
    _, replay, _ = run(capsys, "eval", "--config", str(target))
    assert direct == replay


def test_sweep_csv_contract(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "rho=log:1e-5:1:25", "--axis", "eps-ran=1e-3,1e-4,1e-5")
    assert code == 0
    assert out.splitlines()[0] == "rho,eps_ran,arch,error_rate,reliability,status"
    table = rows(out)
    assert len(table) == 25 * 3 * 2
    # equal legs admit every rho in [0, 1]
    assert {r["status"] for r in table} == {"ok"}
    assert "\r" not in out


def test_sweep_infeasible_cells_exit_0(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "rho=-0.5,0", "--archs", "ran_split")
    assert code == 0
    first, second = rows(out)
    assert first["status"] == "infeasible" and first["error_rate"] == ""
    assert second["status"] == "ok"


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "n=0,1", "--archs", "cn_split", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert [d["n_intermediate_nodes"] for d in data] == [0.0, 1.0]
    assert data[1]["error_rate"] == evaluate(reference_scenario("cn_split")).error_rate


def test_region(capsys):
    code, out, _ = run(capsys, "region", "--axis", "eps_sx=1e-2,1e-5", "--axis", "n=0,200")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["eps_sx", "n_intermediate_nodes", "winner",
                              "error_rate_ran_split", "error_rate_cn_split"]
    assert table[0]["winner"] == "cn_split"
    assert table[-1]["winner"] == "ran_split"


def test_region_needs_two_axes(capsys):
    with pytest.raises(SystemExit) as info:
        main(["region", "--axis", "rho=0"])
    assert info.value.code == 2


def test_max_nodes_endpoints(capsys):
    code, out, _ = run(capsys, "max-nodes", "--requirement", "3e-8", "--rho", "1e-4",
                       "--eps-link", "1e-6", "--eps-node", "1e-7")
    assert code == 0
    table = {r["arch"]: r for r in rows(out)}
    assert 32 <= int(table["cn_split"]["max_nodes"]) <= 44
    assert table["ran_split"]["status"] == "infeasible" and table["ran_split"]["max_nodes"] == ""


def test_max_nodes_axis_and_infeasible_correlation(capsys):
    code, out, _ = run(capsys, "max-nodes", "--requirement", "3e-8", "--axis", "rho=-0.5,0")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["rho", "arch", "max_nodes", "status"]
    assert table[0]["status"] == "infeasible_correlation"
    assert table[-1]["status"] == "ok"


def test_simulate_is_byte_identical(tmp_path, capsys):
    argv = ["simulate", "--seed", "7", "--samples", "1e7", "--set", "ran.eps_ran_1=1e-2",
            "--set", "ran.eps_ran_2=1e-2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--output", str(a)]) == 0
    assert main(argv + ["--output", str(b), "--workers", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    (row,) = rows(a.read_text())
    assert row["n_samples"] == "10000000" and row["seed"] == "7"
    assert abs(float(row["z_score"])) < 5
    assert row["low_confidence"] == "false"


def test_simulate_low_confidence_json(capsys):
    code, out, _ = run(capsys, "simulate", "--seed", "1", "--samples", "1000", "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert record["low_confidence"] is True and record["n_failures"] == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dualconn", "eval", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("architecture,reliability,error_rate\n")
