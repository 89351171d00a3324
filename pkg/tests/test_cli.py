import json

import pytest

import ccspectral.symbols
from ccspectral import ConfigError, ExperimentConfig, load_config, run_experiment
from ccspectral.acceptance import bundled_config
from ccspectral.cli import main

EXPECTED = {
    "counterexample": "counterexample-reproduced",
    "divcurl": "confirms-equality",
    "oscillation": "confirms-inequality",
    "parabolic": "confirms-equality",
}


def _small_oscillation():
    cfg = json.loads(bundled_config("oscillation").read_text())
    cfg["grid"] = [128, 128]
    cfg["r_schedule"] = [4, 8, 16, 32]
    return cfg


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _report(tmp_path):
    reports = list(tmp_path.glob("out/*/*/report.json"))
    assert len(reports) == 1
    return json.loads(reports[0].read_text())


def test_list_contents(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for item in ["divcurl", "counterexample", "parabolic-pair", "oscillation", "concentration",
                 "riesz:k", "confirms-equality", "inconclusive"]:
        assert item in out
    assert main(["list"]) == 0
    assert capsys.readouterr().out == out


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_bundled_configs(name, tmp_path, capsys):
    assert main(["--output", str(tmp_path / "out"), "run", name]) == 0
    out = capsys.readouterr().out
    assert f"{name}: {EXPECTED[name]}" in out
    rep = _report(tmp_path)
    assert rep["verdict"] == EXPECTED[name]
    assert set(rep["checklist"].values()) <= {"pass", "fail", "n/a"}
    assert any((tmp_path / "out").glob("*/*/ladders/*.csv"))
    if name == "counterexample":
        assert rep["checklist"]["domination"] == "fail"
        assert rep["strong_consistency"]["mu_l_zero"]


def test_decreasing_schedule_rejected(tmp_path, capsys):
    cfg = _small_oscillation()
    cfg["r_schedule"] = [16, 8]
    assert main(["--output", str(tmp_path / "out"), "run", _write(tmp_path, cfg)]) == 1
    assert "r_schedule" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("mutate, field", [
    (lambda c: c.pop("label"), "label"),
    (lambda c: c.update(kind="magic"), "kind"),
    (lambda c: c.update(grid=[100, 100]), "grid"),
    (lambda c: c["family"]["params"].update(speed=3), "family.params"),
    (lambda c: c["family"].update(label="nonesuch"), "family.label"),
    (lambda c: c.update(symbol_bank=["riesz"]), "symbol_bank"),
    (lambda c: c["phi_bank"][0].update(type="square"), "phi_bank"),
    (lambda c: c.update(r_schedule=[4, 8, 16, 64]), "r_schedule"),
    (lambda c: c.update(exponents={"p": 2, "q": 2, "mode": "theorem"}), "exponents"),
    (lambda c: c.update(quadratic=[[1, 2], [3, 4]]), "quadratic"),
    (lambda c: c.update(tolerances={"speed": 1}), "tolerances"),
    (lambda c: c.update(schema=99), "schema"),
])
def test_malformed_config_names_field(tmp_path, capsys, mutate, field):
    cfg = _small_oscillation()
    mutate(cfg)
    assert main(["run", _write(tmp_path, cfg)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ") and field in err


def test_unreadable_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["run", str(tmp_path / "bad.json")]) == 1
    assert capsys.readouterr().err.count("error:") == 2


def test_config_echo_reproduces_run(tmp_path):
    cfg = _small_oscillation()
    first = run_experiment(ExperimentConfig.from_dict(cfg))
    echo = first.to_dict()["config"]
    second = run_experiment(load_config(_write(tmp_path, echo, "echo.json")))
    assert second.to_json() == first.to_json()


def test_exit_code_inconclusive(tmp_path, capsys):
    cfg = _small_oscillation()
    cfg["tolerances"] = {"defect": 1e-300}
    assert main(["--output", str(tmp_path / "out"), "run", _write(tmp_path, cfg)]) == 2
    assert "inconclusive" in capsys.readouterr().out


def test_jobs_flag(tmp_path):
    cfg = _small_oscillation()
    path = _write(tmp_path, cfg)
    assert main(["--jobs", "2", "--output", str(tmp_path / "out"), "run", path]) == 0
    with pytest.raises(SystemExit):
        main(["--jobs", "0", "run", path])


def test_config_error_type():
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict({"schema": 1})
    assert info.value.field


def test_verify_filter(capsys):
    assert main(["verify", "--filter", "projection,parity"]) == 0
    out = capsys.readouterr().out
    assert "2/2 criteria passed" in out
    assert main(["verify", "--filter", "no-such-criterion"]) == 1


def test_verify_detects_projection_sign_bug(monkeypatch, capsys):
    original = ccspectral.symbols.project_to_P
    monkeypatch.setattr(ccspectral.symbols, "project_to_P", lambda xi, alpha: -original(xi, alpha))
    assert main(["verify", "--filter", "projection"]) == 1
    assert "[FAIL]" in capsys.readouterr().out
