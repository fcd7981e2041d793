import json

import pytest

from dipolerings.cli import (ConfigError, RunConfig, config_items, main, parse_config,
                             resolve_config)


def run_cli(args):
    return main(args)


def test_parse_minimal_config_fills_defaults():
    values = parse_config("command = spectrum\n[geometry]\nn = 8\nd = 0.1\n"
                          "polarization = transverse\n")
    cfg = resolve_config(values, {})
    assert cfg.command == "spectrum"
    assert cfg.n == 8 and cfg.d == 0.1
    assert cfg.format == "csv" and cfg.t_steps == 2000


def test_negative_d_names_key():
    values = parse_config("[geometry]\nd = -0.5\n")
    with pytest.raises(ConfigError, match="d"):
        resolve_config(values, {"command": "spectrum"})


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError) as err:
        parse_config("[geometry]\nn = 8\nwibble = 3\n")
    assert err.value.line == 3


def test_unknown_section_rejected():
    with pytest.raises(ConfigError):
        parse_config("[lasers]\npower = 9\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config("[geometry]\nnonsense\n")
    assert err.value.line == 2


def test_fig5_style_scan_config():
    text = """
command = fidelity-scan
[geometry]
n = 20
d = 0.1
polarization = tangential
[physics]
m = 5
x_min = 0.05
x_max = 0.5
x_points = 4
"""
    cfg = resolve_config(parse_config(text), {})
    assert cfg.command == "fidelity-scan"
    assert cfg.n == 20 and cfg.m == 5 and cfg.x_points == 4


def test_config_echo_round_trip():
    cfg = resolve_config(parse_config("[geometry]\nn = 12\nd = 0.2\n"),
                         {"command": "spectrum", "polarization": "tangential"})
    echoed = "\n".join(f"{k} = {v}" for k, v in config_items(cfg))
    cfg2 = resolve_config(parse_config(echoed), {})
    assert cfg2 == cfg


def test_cli_override_beats_file(tmp_path):
    cfgfile = tmp_path / "c.txt"
    cfgfile.write_text("command = spectrum\n[geometry]\nn = 8\nd = 0.1\n")
    out = tmp_path / "o.csv"
    rc = run_cli(["spectrum", "--config", str(cfgfile), "--out", str(out),
                  "--set", "geometry.n=6"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert "# config: geometry.n = 6" in lines
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == "index,m_label,J_over_Gamma0,Gamma_over_Gamma0"
    assert len(data) == 7  # header + 6 modes


def test_spectrum_has_one_row_per_mode(tmp_path):
    out = tmp_path / "spec.csv"
    rc = run_cli(["spectrum", "--out", str(out), "--set", "geometry.n=8",
                  "--set", "geometry.d=0.1"])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 8
    labels = sorted(int(r.split(",")[1]) for r in rows)
    assert labels == [-3, -2, -1, 0, 1, 2, 3, 4]


def test_decay_scan_emits_two_series(tmp_path):
    out = tmp_path / "scan.csv"
    rc = run_cli(["decay-scan", "--out", str(out), "--set", "physics.n_min=4",
                  "--set", "physics.n_max=8", "--set", "physics.n_step=2"])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")][1:]
    kinds = {r.split(",")[0] for r in rows}
    assert kinds == {"ring", "chain"}
    assert len(rows) == 6


def test_eta_includes_light_line_column(tmp_path):
    out = tmp_path / "eta.csv"
    rc = run_cli(["eta", "--out", str(out), "--set", "geometry.arrangement=site-site",
                  "--set", "geometry.n=10", "--set", "geometry.d=0.1",
                  "--set", "geometry.polarization=tangential"])
    assert rc == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "m1,m2,J,Gamma,eta,m_star"
    assert len(lines) == 101
    assert all(l.split(",")[5] == "1" for l in lines[1:])


def test_json_format(tmp_path):
    out = tmp_path / "spec.json"
    rc = run_cli(["spectrum", "--out", str(out), "--format", "json",
                  "--set", "geometry.n=4", "--set", "geometry.d=0.2"])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["version"]
    assert len(doc["modes"]) == 4
    # interleaved re/im eigenvector arrays
    assert len(doc["modes"][0]["eigenvector"]) == 8


def test_exit_codes(tmp_path, capsys):
    rc = run_cli(["spectrum", "--out", str(tmp_path / "x.csv"), "--set", "geometry.d=-1"])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["code"] == 2
    rc = run_cli(["fieldmap", "--out", str(tmp_path / "y.csv"),
                  "--set", "geometry.arrangement=chain"])
    assert rc == 2  # fieldmap needs a ring geometry


def test_fidelity_trace_command(tmp_path):
    out = tmp_path / "fid.csv"
    rc = run_cli(["fidelity", "--out", str(out),
                  "--set", "geometry.arrangement=site-site",
                  "--set", "geometry.n=8", "--set", "geometry.d=0.1",
                  "--set", "geometry.polarization=tangential",
                  "--set", "geometry.x=0.15", "--set", "physics.m=2",
                  "--set", "physics.delta_theta=1.0",
                  "--set", "physics.t_max=20", "--set", "physics.t_steps=50"])
    assert rc == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "t,fidelity,argmax_site"
    assert len(rows) == 51
    first = rows[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) < 1e-10


@pytest.mark.parametrize("args", [
    ["spectrum", "--set", "geometry.n=6", "--set", "geometry.d=0.15"],
    ["decay-scan", "--set", "physics.n_min=4", "--set", "physics.n_max=6"],
    ["fieldmap", "--set", "geometry.n=6", "--set", "geometry.d=0.3",
     "--set", "physics.m=3", "--set", "physics.resolution=11"],
    ["coupling", "--set", "geometry.arrangement=site-site", "--set", "geometry.n=6",
     "--set", "geometry.d=0.1", "--set", "geometry.polarization=tangential"],
    ["eta", "--set", "geometry.arrangement=site-edge", "--set", "geometry.n=6",
     "--set", "geometry.d=0.1", "--set", "geometry.polarization=tangential"],
    ["fidelity", "--set", "geometry.arrangement=site-site", "--set", "geometry.n=6",
     "--set", "geometry.d=0.1", "--set", "geometry.polarization=tangential",
     "--set", "physics.m=2", "--set", "physics.t_max=10", "--set", "physics.t_steps=40"],
    ["fidelity-scan", "--set", "geometry.n=6", "--set", "geometry.d=0.1",
     "--set", "geometry.polarization=tangential", "--set", "physics.m=2",
     "--set", "physics.x_points=2", "--set", "physics.dtheta_points=2",
     "--set", "physics.t_max=10", "--set", "physics.t_steps=40",
     "--set", "geometry.arrangement=site-site"],
])
def test_byte_identical_reruns(tmp_path, args):
    out = tmp_path / "artifact.csv"
    assert run_cli(args + ["--out", str(out)]) == 0
    first = out.read_bytes()
    assert run_cli(args + ["--out", str(out)]) == 0
    assert out.read_bytes() == first
