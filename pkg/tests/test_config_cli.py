import json
import os

import pytest

from rigidlab import ConfigError
from rigidlab.cli import main
from rigidlab.config import parse_config

ROOF = "[roof]\ncos 0 0 1.0\ncos 1 0 0.1\n"


def write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_dir(path):
    return {name: open(os.path.join(path, name), "rb").read() for name in sorted(os.listdir(path))}


def test_defaults_are_echoed():
    cfg = parse_config("command = homoclinic\n")
    echo = cfg.echo()
    assert echo["matrix"] == [2, 1, 1, 1]
    assert echo["n_min"] == 10 and echo["n_max"] == 26
    assert echo["tol"] == pytest.approx(4e-9)
    assert echo["fields"]["roof"] == ["cos 0 0 1.0"]


def test_field_sections_and_fallbacks():
    cfg = parse_config("command = match\n" + ROOF + "[weight]\ncos 0 0 2\n")
    assert cfg.weight("roof2") == cfg.weight("roof")
    assert cfg.weight("weight2").base.constant_term == 2.0


@pytest.mark.parametrize("text, line", [
    ("command = bowen\ndelta = -1\n", 2),
    ("command = bowen\n\nfoo = 1\n", 3),
    ("command = nope\n", 1),
    ("command = homoclinic\nk_max = x\n", 2),
    ("command = homoclinic\nmatrix = 2 1 1\n", 2),
    ("command = homoclinic\n[roof]\ncos 0 0 1\ncos 1 zero 0.1\n", 4),
    ("command = homoclinic\n[bogus]\n", 2),
    ("command = homoclinic\nk_max = 3\nk_max = 4\n", 3),
    ("command = bowen\npotential = weight\n", 2),
])
def test_config_errors_report_lines(text, line):
    with pytest.raises(ConfigError) as ei:
        parse_config(text)
    assert ei.value.line == line
    assert str(ei.value).startswith(f"line {line}:")


def test_missing_command():
    with pytest.raises(ConfigError):
        parse_config("k_max = 3\n")


def test_enumerate_output(tmp_path, capsys):
    cfg = write(tmp_path, "command = enumerate\nk_max = 3\n")
    out = tmp_path / "out"
    assert main(["enumerate", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "enumerate.csv").read_text().splitlines()
    assert rows[0] == "k,denominator,num_x,num_y,rep_x,rep_y"
    assert len(rows) == 9
    summary = json.loads((out / "enumerate.json").read_text())
    assert summary["counts_by_period"] == {"1": 1, "2": 2, "3": 5}
    assert json.loads(capsys.readouterr().out)["k_max"] == 3


@pytest.mark.parametrize("command, body", [
    ("spectrum", ROOF),
    ("cocycle", "k_max = 2\n" + ROOF),
    ("homoclinic", ROOF),
    ("bowen", "t_stop = 5\npotential = unstable_jacobian\n" + ROOF),
    ("match", "k_max = 4\n" + ROOF),
    ("pigeonhole", "n = 2\n"),
])
def test_commands_are_deterministic(tmp_path, command, body):
    cfg = write(tmp_path, f"command = {command}\n" + body)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([command, "--config", cfg, "--out", str(a), "--threads", "1"]) == 0
    assert main([command, "--config", cfg, "--out", str(b), "--threads", "3"]) == 0
    da, db = read_dir(a), read_dir(b)
    da.pop(f"{command}.json"), db.pop(f"{command}.json")  # echo records the thread count
    assert da == db
    summary = json.loads((a / f"{command}.json").read_text())
    assert summary["command"] == command and "config" in summary


def test_homoclinic_summary(tmp_path):
    cfg = write(tmp_path, "command = homoclinic\n" + ROOF)
    assert main(["homoclinic", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    s = json.loads((tmp_path / "o" / "homoclinic.json").read_text())
    assert s["t_prime"] == pytest.approx(s["t_prime_oracle"], abs=1e-9)
    assert s["k_is_zero"] is False


def test_cocycle_tilt(tmp_path):
    cfg = write(tmp_path, "command = cocycle\nk_max = 2\n" + ROOF + "[tilt]\nsin 1 1 0.02\n")
    assert main(["cocycle", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    s = json.loads((tmp_path / "o" / "cocycle.json").read_text())
    assert s["max_tilt_discrepancy"] < 1e-5
    assert s["max_method_gap"] < 1e-6
    big = write(tmp_path, "command = cocycle\n" + ROOF + "[tilt]\nsin 1 1 0.5\n", "big.cfg")
    assert main(["cocycle", "--config", big, "--out", str(tmp_path / "b")]) == 1


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, "command = bowen\ndelta = -1\n")
    assert main(["bowen", "--config", bad]) == 1
    assert "line 2" in capsys.readouterr().err
    gate = write(tmp_path, "command = homoclinic\nn_max = 200\n", "gate.cfg")
    assert main(["homoclinic", "--config", gate, "--out", str(tmp_path / "g")]) == 2
    assert "PrecisionLoss" in capsys.readouterr().err
    cost = write(tmp_path, "command = bowen\nt_start = 30\nt_stop = 30\n", "cost.cfg")
    assert main(["bowen", "--config", cost, "--out", str(tmp_path / "c")]) == 2
    wrong = write(tmp_path, "command = enumerate\n", "wrong.cfg")
    assert main(["homoclinic", "--config", wrong]) == 1
    assert main(["enumerate", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["enumerate"]) == 1
