import csv
import json
import shutil
from pathlib import Path

import pytest

from thermoshift import cli
from thermoshift.verify import PropertyResult, SuiteResult

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_csv(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    return rows[0], rows[1:]


def test_symmetric_two_well(tmp_path):
    assert cli.main(["run", str(CONFIGS / "symmetric-two-well.json"), "--out-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "out/symmetric-two-well.json").read_text())
    assert summary["delta"] == pytest.approx([0.5, 0.5], abs=1e-8)
    assert all(summary["checks"].values())


def test_four_state_csv(tmp_path):
    assert cli.main(["run", str(CONFIGS / "metastable-4state.json"), "--out-dir", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "out/metastable-4state.csv")
    assert len(rows) == 20
    assert header[:2] == ["eps", "lambda"]
    assert (tmp_path / "out/metastable-4state.csv").read_text().startswith("# eps")
    summary = json.loads((tmp_path / "out/metastable-4state.json").read_text())
    assert summary["delta"][0] == pytest.approx(2 / 3, abs=1e-2)


def test_missing_q_is_an_input_error(tmp_path, capsys):
    assert cli.main(["run", str(CONFIGS / "bad-config-missing-Q.json"), "--out-dir", str(tmp_path)]) == 3
    assert "'Q'" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_missing_file_and_bad_threads(tmp_path, monkeypatch, capsys):
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 3
    monkeypatch.setenv("THERMOSHIFT_THREADS", "many")
    assert cli.main(["run", str(CONFIGS / "symmetric-two-well.json"), "--out-dir", str(tmp_path)]) == 3
    assert "THERMOSHIFT_THREADS" in capsys.readouterr().err


def test_referenced_files_resolve_next_to_the_config(tmp_path):
    for name in ("interval-two-half.json", "two-half-asymmetric.system.json"):
        shutil.copy(CONFIGS / name, tmp_path / name)
    cfg = json.loads((tmp_path / "interval-two-half.json").read_text())
    cfg["monte_carlo"] = {"iterates": 20000, "orbits": 500}
    cfg["eps"] = [0.1, 0.05, 0.02, 0.01]
    cfg["cell_depth"] = 5
    (tmp_path / "interval-two-half.json").write_text(json.dumps(cfg))
    code = cli.main(["run", str(tmp_path / "interval-two-half.json"), "--out-dir", str(tmp_path)])
    summary = json.loads((tmp_path / "out/interval-two-half.json").read_text())
    assert summary["p_limit"][0]["value"] == pytest.approx(2 / 3, abs=1e-6)
    header, rows = read_csv(tmp_path / "out/interval-two-half.csv")
    assert len(rows) == 4 and header[0] == "eps"
    assert code == (0 if summary["ok"] else 2)


def test_increasing_grid_is_rejected(tmp_path):
    cfg = json.loads((CONFIGS / "symmetric-two-well.json").read_text())
    cfg["eps"] = [0.01, 0.1]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["run", str(path), "--out-dir", str(tmp_path)]) == 3


def test_verify_and_schema(capsys):
    assert cli.main(["verify", "pressure-oracles"]) == 0
    out = capsys.readouterr().out
    assert "golden_mean_spectral_pressure: 1/1 passed" in out
    assert cli.main(["schema"]) == 0
    assert "shift-experiment" in json.loads(capsys.readouterr().out)


def test_verify_failure_serializes_the_instance(monkeypatch, capsys):
    bad = PropertyResult("toy", 1e-12)
    bad.record(1.0, {"matrix": [[1.0]]})
    monkeypatch.setattr(cli, "run_suite", lambda name, seed: SuiteResult(name, seed, [bad]))
    assert cli.main(["verify", "complement-identities"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["failures"][0]["instances"][0]["matrix"] == [[1.0]]
