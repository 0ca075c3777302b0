"""Command-line argument handling and end-to-end artifact production."""

import json

import pytest

from tanglesim.cli import RunRequest, execute, main, parse_args


def tiny_battery_file(tmp_path, name="cli"):
    doc = {
        "name": name,
        "rows": [
            {"set": 1, "row": 1, "total_nodes": 10, "ratio_f": 0.2,
             "strategy": "ade", "ratio_b": "4:3:3"},
            {"set": 2, "row": 1, "total_nodes": 10, "ratio_f": 0.1,
             "strategy": "ac", "ratio_b": "8:2"},
            {"set": 3, "row": 1, "total_nodes": 10, "ratio_f": 0.0,
             "strategy": "ade", "ratio_b": "4:3:3"},
        ],
    }
    path = tmp_path / "battery.json"
    path.write_text(json.dumps(doc))
    return str(path)


# -- parsing ----------------------------------------------------------


def test_parse_requires_exactly_one_source(tmp_path):
    with pytest.raises(SystemExit):
        parse_args(["run", "--out", str(tmp_path)])
    with pytest.raises(SystemExit):
        parse_args(["run", "--goal", "I", "--config", "x.json", "--out", str(tmp_path)])


def test_parse_rejects_unknown_goal(tmp_path):
    with pytest.raises(SystemExit):
        parse_args(["run", "--goal", "V", "--out", str(tmp_path)])


def test_parse_requires_out(tmp_path):
    with pytest.raises(SystemExit):
        parse_args(["run", "--goal", "I"])


def test_parse_seed_list(tmp_path):
    req = parse_args(["run", "--goal", "I", "--out", str(tmp_path),
                      "--seeds", "3,1,4"])
    assert req.seeds == (3, 1, 4)
    with pytest.raises(SystemExit):
        parse_args(["run", "--goal", "I", "--out", str(tmp_path), "--seeds", "a,b"])


def test_parse_full_request(tmp_path):
    req = parse_args(["run", "--goal", "II", "--out", str(tmp_path),
                      "--operating-time", "500", "--interval-d", "5",
                      "--pow-i", "1", "--intake-n", "10", "--workers", "2"])
    assert req == RunRequest(goal="II", config_path=None, output_dir=str(tmp_path),
                             seeds=None, operating_time=500.0, interval_d=5.0,
                             pow_i=1.0, intake_n=10, workers=2)


# -- execution --------------------------------------------------------


def test_execute_missing_battery_file(tmp_path, capsys):
    req = parse_args(["run", "--config", str(tmp_path / "absent.json"),
                      "--out", str(tmp_path / "out")])
    assert execute(req) == 2
    assert "tanglesim:" in capsys.readouterr().err


def test_execute_malformed_battery_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rows": [{"total_nodes": 10, "ratio_f": 0.2,
                                          "strategy": "ab", "ratio_b": "5:5"}]}))
    req = parse_args(["run", "--config", str(path), "--out", str(tmp_path / "out")])
    assert execute(req) == 2
    assert "row 1" in capsys.readouterr().err


def test_execute_invalid_override(tmp_path, capsys):
    req = parse_args(["run", "--config", tiny_battery_file(tmp_path),
                      "--out", str(tmp_path / "out"), "--interval-d", "-1"])
    assert execute(req) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_main_end_to_end_and_rerun_identical(tmp_path, capsys):
    battery = tiny_battery_file(tmp_path)
    out = tmp_path / "out"
    argv = ["run", "--config", battery, "--out", str(out),
            "--seeds", "1", "--operating-time", "120"]
    assert main(argv) == 0
    err = capsys.readouterr().err
    assert "3 runs" in err and "wrote 4 files" in err

    names = sorted(p.name for p in out.iterdir())
    assert names == ["goal_cli_set01.csv", "goal_cli_set02.csv",
                     "goal_cli_set03.csv", "goal_cli_summary.json"]
    before = {n: (out / n).read_bytes() for n in names}
    assert main(argv) == 0
    after = {n: (out / n).read_bytes() for n in names}
    assert before == after
