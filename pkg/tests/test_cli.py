import json
import math

import pytest

from plapext.cli import main


def _artifacts(out_dir):
    return sorted(p for p in out_dir.rglob("*.json")
                  if p.name != "manifest.json")


def test_eig_writes_artifact_with_oracle_values(tmp_path):
    code = main(["eig", "--out", str(tmp_path)])
    assert code == 0
    arts = _artifacts(tmp_path)
    assert len(arts) == 1
    data = json.loads(arts[0].read_text())
    assert data["lambda1"] == pytest.approx(math.pi ** 2, rel=1e-6)
    assert data["r0"] == pytest.approx(2.0, rel=1e-6)
    manifest = json.loads(next(tmp_path.rglob("manifest.json")).read_text())
    assert manifest["hash"] == data["manifest"]


def test_identical_configs_give_identical_artifacts(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["poincare", "--out", str(a)]) == 0
    assert main(["poincare", "--out", str(b)]) == 0
    art_a, art_b = _artifacts(a)[0], _artifacts(b)[0]
    assert art_a.read_bytes() == art_b.read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 2.0\nr_end = 100.0  # comment\nweight = linear_r4\n")
    out = tmp_path / "out"
    code = main(["eig", "--config", str(cfg), "--r-end", "200.0",
                 "--out", str(out)])
    assert code == 0
    manifest = json.loads(next(out.rglob("manifest.json")).read_text())
    assert manifest["config"]["r_end"] == 200.0  # flag wins over file
    assert manifest["config"]["p"] == 2.0


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    assert main(["eig", "--config", str(cfg),
                 "--out", str(tmp_path / "o")]) == 2


def test_bad_weight_is_usage_error(tmp_path):
    assert main(["eig", "--weight", "mystery", "--out", str(tmp_path)]) == 2


def test_bad_command_is_usage_error(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_solve_reports_no_solution_for_tilted_forcing(tmp_path):
    code = main(["solve", "--h", "bump?center=3&width=0.5",
                 "--out", str(tmp_path)])
    assert code == 0
    data = json.loads(_artifacts(tmp_path)[0].read_text())
    assert data["verdict"] == "no-solution"
