import json

import pytest

from transent.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main


def write(tmp_path, text, name="c.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_predict_json(tmp_path, capsys):
    path = write(tmp_path, "[scenario]\nname = source-check\n")
    assert main(["predict", path]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["configurations"][0]["minus-plus"]["analytic"]["violated"]


def test_predict_csv(tmp_path, capsys):
    path = write(tmp_path, "[scenario]\nname = intermediate-null\n")
    assert main(["predict", path, "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("key,value")


def test_run_uses_env_out_dir(tmp_path, monkeypatch, capsys):
    path = write(tmp_path, "[scenario]\nname = source-check\n")
    out = tmp_path / "env-out"
    monkeypatch.setenv("TRANSENT_OUT_DIR", str(out))
    assert main(["run", path, "--events", "20000", "--seed", "3"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 3 and report["events"] == 20000


def test_out_dir_flag_wins(tmp_path, monkeypatch):
    path = write(tmp_path, "[scenario]\nname = source-check\n")
    monkeypatch.setenv("TRANSENT_OUT_DIR", str(tmp_path / "env"))
    assert main(["run", path, "--events", "20000", "--out-dir", str(tmp_path / "flag")]) == EXIT_OK
    assert (tmp_path / "flag" / "report.json").exists()
    assert not (tmp_path / "env").exists()


def test_config_error_code(tmp_path, capsys):
    path = write(tmp_path, "[scenario]\nname = bogus\n")
    assert main(["predict", path]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_io_error_code(tmp_path):
    assert main(["predict", str(tmp_path / "missing.ini")]) == EXIT_IO
    path = write(tmp_path, "[scenario]\nname = source-check\n")
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", path, "--events", "20000", "--out-dir", str(blocker / "sub")]) == EXIT_IO


def test_bad_arguments_exit_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["predict"])
    assert err.value.code == 2


def test_design_frft(capsys):
    assert main(["design-frft", "--alpha", "5pi/4", "--f", "25cm", "--stages", "3", "--format", "json"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert len(out["lenses"]) == 3
    assert out["realized_rotation"] == pytest.approx(3.9269908169872414, abs=1e-9)


def test_design_frft_text(capsys):
    assert main(["design-frft", "--alpha", "0.5", "--f", "0.25"]) == EXIT_OK
    assert "lens 1" in capsys.readouterr().out


def test_design_frft_rejects_negative():
    assert main(["design-frft", "--alpha", "-1", "--f", "0.25"]) == EXIT_CONFIG
