import json

import numpy as np
import pytest

from esd_adapt import cli
from esd_adapt.adaptation import LocalFilter, damping_spec, loss_spec, run_pipeline
from esd_adapt.linalg import SIGMA_X


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields_of(text):
    out = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) == 2 and not line.startswith(" "):
            out[parts[0]] = parts[1]
    return out


def test_asym_entangled(capsys):
    code, out, _ = run(capsys, "asym", "--p1", "0.9", "--p2", "0.9")
    f = fields_of(out)
    assert code == 0
    assert float(f["concurrence"]) == pytest.approx(0.715131670195, abs=1e-11)
    assert f["entangled"] == "true"


def test_asym_separable(capsys):
    code, out, _ = run(capsys, "asym", "--p1", "0.5", "--p2", "0.5")
    f = fields_of(out)
    assert code == 0
    assert f["entangled"] == "false"
    assert float(f["concurrence"]) == 0.0


def test_asym_swap(capsys, tmp_path):
    path = tmp_path / "asym.json"
    code, out, _ = run(capsys, "asym", "--p1", "0.5", "--p2", "0.5", "--adapter", "swap", "--json", str(path))
    f = fields_of(out)
    assert code == 0
    assert float(f["concurrence"]) == pytest.approx(0.25, abs=1e-11)
    assert json.loads(path.read_text())["concurrence"] == pytest.approx(0.25, abs=1e-11)


def test_asym_filter_adapter(capsys):
    spec = json.dumps({"r": 1.0, "u_angles": [0, np.pi, 0], "v_angles": [0, 0, 0]})
    code, out, _ = run(capsys, "asym", "--p1", "0.5", "--p2", "0.5", "--adapter", spec)
    # Ry(pi) is a bit flip up to a sign, so it acts as the swap adapter
    assert code == 0
    assert float(fields_of(out)["concurrence"]) == pytest.approx(0.25, abs=1e-11)


def test_asym_bad_params(capsys):
    assert run(capsys, "asym", "--p1", "1.5", "--p2", "0.5")[0] == 2
    assert run(capsys, "asym", "--p1", "0.5", "--p2", "0.5", "--adapter", '{"r": 3}')[0] == 2


def test_asym_numbers_round_trip(capsys):
    code, out, _ = run(capsys, "asym", "--p1", "0.37", "--p2", "0.83")
    printed = float(fields_of(out)["min_pt_eigenvalue"])
    _, rep = run_pipeline(loss_spec(0.37, 0.83))
    assert printed == pytest.approx(rep.min_pt_eigenvalue, abs=1e-11)


def test_scan_grid_and_files(capsys, tmp_path):
    code, out, _ = run(capsys, "scan", "--grid", "10x10", "--out-dir", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert len(lines) == 101
    assert lines[0].startswith("gamma,p,")
    for name in ("scan.pgm", "scan.svg", "summary.json"):
        assert (tmp_path / name).exists()
    counts = json.loads((tmp_path / "summary.json").read_text())["counts"]
    assert sum(counts.values()) == 100


def test_scan_seed_determinism(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "scan", "--grid", "6x6", "--seed", "7", "--out-dir", str(a))[0] == 0
    assert run(capsys, "scan", "--grid", "6x6", "--seed", "7", "--out-dir", str(b))[0] == 0
    for name in ("scan.csv", "scan.pgm", "scan.svg", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_scan_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(capsys, "scan", "--grid", "2x2", "--out-dir", str(blocker / "sub"))[0] == 3


def test_scan_config_precedence_and_strictness(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma_steps": 3, "p_steps": 4, "out_dir": str(tmp_path / "o")}))
    assert run(capsys, "scan", "--config", str(cfg))[0] == 0
    assert len((tmp_path / "o" / "scan.csv").read_text().splitlines()) == 13
    assert run(capsys, "scan", "--config", str(cfg), "--grid", "2x2")[0] == 0
    assert len((tmp_path / "o" / "scan.csv").read_text().splitlines()) == 5
    cfg.write_text(json.dumps({"gamma_steps": 3, "colour": "red"}))
    code, _, err = run(capsys, "scan", "--config", str(cfg))
    assert code == 2 and "colour" in err
    assert run(capsys, "scan", "--grid", "ten")[0] == 2


def test_optimize_bound_consistent(capsys, tmp_path):
    path = tmp_path / "opt.json"
    code, _, _ = run(capsys, "optimize", "--gamma", "0.8", "--p", "0.5", "--input", "PhiMinus", "--out", str(path))
    data = json.loads(path.read_text())
    assert code == 0
    assert not data["unfiltered_entangled"]
    assert data["concurrence"] > 0
    assert np.sqrt(data["best_r"]) < data["filter_bound"]
    for key in ("best_r", "concurrence", "success_rate", "evaluations", "config"):
        assert key in data


def test_optimize_already_entangled(capsys):
    code, out, _ = run(capsys, "optimize", "--gamma", "0.1", "--p", "0.9", "--input", "PsiMinus")
    data = json.loads(out)
    assert code == 0
    assert data["unfiltered_entangled"]
    assert data["concurrence"] >= data["unfiltered_concurrence"] > 0


@pytest.mark.parametrize("kind", ["PhiMinus", "PsiMinus"])
def test_optimize_depolarizing_broken(capsys, kind):
    assert run(capsys, "optimize", "--gamma", "0.5", "--p", "0.2", "--input", kind)[0] == 4


def test_optimize_infeasible_constraint(capsys):
    assert run(capsys, "optimize", "--gamma", "0.5", "--p", "0.8", "--s-min", "2")[0] == 4


def test_optimize_ga_deterministic(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"method": "ga", "space": "full", "seed": 5, "ga": {"generations": 20}}))
    outs = []
    for name in ("a.json", "b.json"):
        assert run(capsys, "optimize", "--gamma", "0.8", "--p", "0.5", "--config", str(cfg),
                   "--out", str(tmp_path / name))[0] == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["config"]["ga"]["generations"] == 20 and data["seed"] == 5


def test_optimize_result_round_trips(capsys):
    code, out, _ = run(capsys, "optimize", "--gamma", "0.7", "--p", "0.6", "--method", "ga",
                       "--space", "full", "--seed", "2")
    data = json.loads(out)
    f = LocalFilter.from_dict(data["filters"]["F"])
    _, rep = run_pipeline(damping_spec(0.6, 0.7, "PhiMinus"), {"F": f})
    # parameters are printed to 12 digits, so the objective reproduces to about that precision
    assert rep.concurrence == pytest.approx(data["concurrence"], abs=1e-10)


def test_optimize_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ga": {"population": 8, "speed": 3}}))
    assert run(capsys, "optimize", "--gamma", "0.5", "--p", "0.8", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"learning_rate": 3}))
    assert run(capsys, "optimize", "--gamma", "0.5", "--p", "0.8", "--config", str(cfg))[0] == 2


def test_verify(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert out.count("[PASS]") == 6
    assert "6/6 suites passed" in out
    code, out, _ = run(capsys, "verify", "--tol-scale", "0")
    assert code == 1 and "[FAIL]" in out


def test_pipeline_command(capsys, tmp_path):
    spec = loss_spec(0.6, 0.7, SIGMA_X).to_dict()
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "pipeline", str(path), "--out", str(out_path))
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["concurrence"] == pytest.approx(0.42, abs=1e-11)
    assert len(data["rho"]) == 4


def test_pipeline_with_slots(capsys, tmp_path):
    spec = damping_spec(0.4, 0.9, "PhiMinus").to_dict()
    spec["slots"] = {"F": {"r": 0.05}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "pipeline", str(path))
    assert code == 0
    assert fields_of(out)["entangled"] == "true"


def test_pipeline_errors(capsys, tmp_path):
    assert run(capsys, "pipeline", str(tmp_path / "missing.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"configuration": "asymmetric", "stages": {"A": [], "B": []}, "extra": 1}))
    assert run(capsys, "pipeline", str(bad))[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "pipeline", str(bad))[0] == 2


def test_pipeline_inline_channel_descriptors(capsys, tmp_path):
    damp = {"type": "channel", "family": "amplitude_damping", "gamma": 0.9}
    spec = {"configuration": "symmetric", "input": {"kind": "PhiMinus", "p": 0.4},
            "stages": {"A": [{"type": "slot", "name": "F"}, damp], "B": [{"type": "slot", "name": "F"}, damp]},
            "slots": {"F": {"r": 0.05}}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "pipeline", str(path))
    _, rep = run_pipeline(damping_spec(0.4, 0.9, "PhiMinus"), {"F": LocalFilter(0.05)})
    assert code == 0
    assert float(fields_of(out)["concurrence"]) == pytest.approx(rep.concurrence, abs=1e-11)
