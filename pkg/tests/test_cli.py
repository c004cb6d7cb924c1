import csv
import json
import math

import pytest

from delaykv import ValidationError
from delaykv.cli import (
    ENERGY_HEADER,
    REGION_HEADER,
    ROOTS_HEADER,
    SWEEP_HEADER,
    TRAJECTORY_HEADER,
    ConfigError,
    csv_text,
    fmt,
    json_text,
    main,
    parse_config,
)

MINIMAL = """
a: 1
tau: 1
modes:
  dirichlet-1d: {L: 1, K: 3}
"""


def run(tmp_path, *argv, config=MINIMAL):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(config)
    out = tmp_path / "out"
    code = main([argv[0], "--config", str(cfg), "--out", str(out), *argv[1:]])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.xi == 4.0
    assert cfg.window is None
    assert len(cfg.mode_set) == 3
    assert cfg.mode_set[0] == pytest.approx(math.pi ** 2)
    assert cfg.output.dir == "out" and not cfg.output.svg


def test_parse_rejects_xi_on_bound():
    with pytest.raises(ValidationError, match="2τ/a"):
        parse_config("a: 1\ntau: 1\nxi: 2\n")


def test_flag_overrides_file():
    cfg = parse_config(MINIMAL, {"tau": 0.5, "a": None})
    assert cfg.tau == 0.5 and cfg.a == 1.0 and cfg.xi == 2.0


def test_json_config_accepted():
    cfg = parse_config(json.dumps({"a": 2, "tau": 1, "modes": [1, 4]}))
    assert list(cfg.mode_set) == [1.0, 4.0]


@pytest.mark.parametrize("text", [
    "a: 1\ntau: 1\nbogus: 3\n",
    "a: 1\nsimulation: {T: 1, dt: 0.1}\n",
    "modes: {dirichlet-1d: {L: 1, K: 3, M: 2}}\n",
    "output: {formats: [csv, xml]}\n",
])
def test_unknown_keys_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_parse_error_position():
    with pytest.raises(ConfigError, match=r"line 3, column 5: mapping values"):
        parse_config("a: 1\ntau: 1\n  xi: 2\n")


@pytest.mark.parametrize("text", ["a: -1\n", "a: 1\ntau: 0\n", "tol: -1\n",
                                  "instability: {theta: 2}\n", "modes: [1, -2]\n"])
def test_constraint_violations(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_fmt_and_json_round_trip():
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert float(fmt(math.pi)) == math.pi
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"
    values = [math.pi, 1 / 3, -2.5e-300, 12345.678901234567]
    assert json.loads(json_text({"v": values}))["v"] == values


def test_csv_text_layout():
    text = csv_text(("x", "y"), [(1.0, "s"), (2.0, "t")])
    assert text.splitlines() == ["x,y", f"{fmt(1.0)},s", f"{fmt(2.0)},t"]


def test_spectrum_command(tmp_path):
    code, out = run(tmp_path, "spectrum")
    assert code == 0
    rows = read_csv(out / "roots.csv")
    assert tuple(rows[0]) == ROOTS_HEADER
    assert len(rows) > 3
    assert all(float(r[2]) < 0 for r in rows[1:])
    assert {r[0] for r in rows[1:]} == {"1", "2", "3"}
    doc = json.loads((out / "spectrum.json").read_text())
    assert doc["verdict"]["verdict"] == "stable"


def test_spectrum_is_byte_identical(tmp_path):
    (tmp_path / "one").mkdir()
    (tmp_path / "two").mkdir()
    _, first = run(tmp_path / "one", "spectrum")
    _, second = run(tmp_path / "two", "spectrum")
    assert (first / "roots.csv").read_bytes() == (second / "roots.csv").read_bytes()


def test_sigma_command(tmp_path):
    code, out = run(tmp_path, "sigma")
    assert code == 0
    rows = read_csv(out / "roots.csv")
    assert tuple(rows[0]) == ROOTS_HEADER
    assert all(r[0] == "" and r[1] == "inf" and r[5].startswith("sigma:") for r in rows[1:])


def test_region_command(tmp_path):
    cfg = MINIMAL + "region: {a: [0.5, 1.5, 3], tau: [0.5, 1.5, 3]}\n"
    code, out = run(tmp_path, "region", config=cfg)
    assert code == 0
    rows = read_csv(out / "region.csv")
    assert tuple(rows[0]) == REGION_HEADER
    assert len(rows) == 10
    for a, tau, _, verdict in rows[1:]:
        if float(tau) <= float(a):
            assert verdict == "stable"


def test_instability_command(tmp_path):
    code, out = run(tmp_path, "instability", "--lambda-k", "1", "--theta", "1.0471975512",
                    config="{}\n")
    assert code == 0
    pair = json.loads((out / "pair.json").read_text())
    assert pair["a"] < pair["tau"]
    assert pair["residual"] <= 1e-10


def test_simulate_zero_data(tmp_path):
    cfg = MINIMAL + "simulation: {T: 2, history: {type: zero}}\n"
    code, out = run(tmp_path, "simulate", config=cfg)
    assert code == 0
    rows = read_csv(out / "energy.csv")
    assert tuple(rows[0]) == ENERGY_HEADER
    assert all(float(x) == 0.0 for r in rows[1:] for x in r[1:])
    traj = read_csv(out / "trajectory.csv")
    assert tuple(traj[0]) == TRAJECTORY_HEADER


def test_freqresp_command(tmp_path):
    cfg = MINIMAL + "sweep: {n: 128}\n"
    code, out = run(tmp_path, "freqresp", config=cfg)
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert tuple(rows[0]) == SWEEP_HEADER
    assert all(math.isfinite(float(r[2])) for r in rows[1:])


def test_svg_output(tmp_path):
    code, out = run(tmp_path, "spectrum", "--svg")
    assert code == 0
    assert (out / "roots.svg").read_text().lstrip().startswith("<?xml")


def test_exit_code_validation(tmp_path, capsys):
    code, _ = run(tmp_path, "spectrum", config="a: 1\ntau: 1\nxi: 1\n")
    assert code == 1
    assert "error" in capsys.readouterr().err
    assert main(["spectrum", "--config", str(tmp_path / "missing.yaml")]) == 1


def test_exit_code_numerical(tmp_path, capsys):
    cfg = "a: 0.05\ntau: 3\nmodes: [1]\nsimulation: {T: 100000, m: 16}\n"
    code, _ = run(tmp_path, "simulate", config=cfg)
    assert code == 2
    assert "diverged" in capsys.readouterr().err
