import json
import os
import subprocess
import sys

import pytest

from hmgame import hmm
from hmgame.cli import main
from hmgame.experiments import AGGRESSIVE_TRANSITIONS, aggressive_scenario, scenario_to_dict, shipped_scenario_path
from hmgame.hmg import build_emission_matrix, hmg_to_dict, to_hmm

DATA = shipped_scenario_path("tennis_hmg").parent


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def test_solve_game_table6(capsys):
    code, out, _ = run(capsys, "solve-game", "--game", str(DATA / "table6_game.json"), "--mixed")
    assert code == 0
    lines = out.splitlines()
    assert lines[:2] == ["pure: (s1,s2)", "pure: (s2,s1)"]
    assert "mixed: p=(0.333333,0.666667) q=(0.333333,0.666667)" in lines


def test_solve_game_dominant(capsys, tmp_path):
    g = {"row_strategies": ["a", "b"], "col_strategies": ["x", "y"], "payoffs": [[1, 1], [0, 0], [0, 0], [-1, -1]]}
    code, out, _ = run(capsys, "solve-game", "--game", write(tmp_path / "g.json", g))
    assert code == 0
    assert out == "pure: (a,x)\n"


def test_solve_game_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"row_strategies": ["a",\n  oops}')
    code, out, err = run(capsys, "solve-game", "--game", str(bad), "--mixed")
    assert code == 2
    assert out == ""
    assert f"{bad}:2:" in err


def test_solve_game_invalid_shape(capsys, tmp_path):
    g = {"row_strategies": ["a", "b"], "col_strategies": ["x"], "payoffs": [[1, 1]]}
    code, out, _ = run(capsys, "solve-game", "--game", write(tmp_path / "g.json", g))
    assert code == 2 and out == ""


def test_missing_flag_is_input_error(capsys):
    assert main(["solve-game"]) == 2


def test_build_hmg(capsys, tmp_path, tennis):
    hmg_path = write(tmp_path / "hmg.json", hmg_to_dict(tennis))
    trans = write(tmp_path / "A.json", [list(r) for r in AGGRESSIVE_TRANSITIONS])
    code, out, _ = run(capsys, "build-hmg", "--hmg", hmg_path, "--transitions", trans)
    assert code == 0
    model = hmm.model_from_dict(json.loads(out))
    assert model == to_hmm(tennis, AGGRESSIVE_TRANSITIONS)


def test_train_predict_distance(capsys, tmp_path, tennis):
    hmg_path = write(tmp_path / "hmg.json", hmg_to_dict(tennis))
    gen = to_hmm(tennis, AGGRESSIVE_TRANSITIONS)
    obs, _ = hmm.sample(gen, 2000, seed=3)
    obs_path = tmp_path / "obs.txt"
    obs_path.write_text(" ".join(gen.observation_labels[o] for o in obs))
    model_path = tmp_path / "trained.json"
    code, out, _ = run(
        capsys, "train", "--hmg", hmg_path, "--observations", str(obs_path),
        "--trace", str(tmp_path / "trace.csv"), "--out", str(model_path),
    )
    assert code == 0 and out == ""
    trained = hmm.model_from_dict(json.loads(model_path.read_text()))
    assert trained.emissions.tobytes() == build_emission_matrix(tennis).tobytes()
    assert (tmp_path / "trace.csv").read_text().startswith("iteration,log_likelihood\n")

    code, out, _ = run(capsys, "predict", "--model", str(model_path), "--observations", str(obs_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("posterior: Aggressive=")
    assert lines[1].split(": ")[1] in tennis.informed_types
    assert lines[3] in ("predicted: Open", "predicted: Center")

    code, out, _ = run(capsys, "distance", "--model-a", str(model_path), "--model-b", str(model_path), "--length", "500")
    assert (code, out) == (0, "distance: 0.000000\n")


def test_predict_unknown_symbol(capsys, tmp_path, tennis):
    model_path = write(tmp_path / "m.json", hmm.model_to_dict(to_hmm(tennis)))
    obs = tmp_path / "obs.json"
    obs.write_text('["Open", "Lob"]')
    code, out, err = run(capsys, "predict", "--model", model_path, "--observations", str(obs))
    assert code == 2 and out == "" and "Lob" in err


@pytest.fixture
def small_scenario(tmp_path):
    d = scenario_to_dict(aggressive_scenario(horizon=400, eval_interval=100, seeds=(0, 1)))
    (tmp_path / "hmg.json").write_text(json.dumps(d["hmg"]))
    d["hmg"] = "hmg.json"
    return write(tmp_path / "scenario.json", d)


def test_run_scenario(capsys, tmp_path, small_scenario):
    code, out, _ = run(capsys, "run-scenario", "--scenario", small_scenario, "--out", str(tmp_path / "o1"))
    assert code == 0
    assert out.startswith("scenario: aggressive\n")
    summary = json.loads((tmp_path / "o1" / "summary.json").read_text())
    assert set(summary["final_hit_rates"]) == {"proposed", "bayesian", "random", "frequent", "tft"}

    code, _, _ = run(capsys, "run-scenario", "--scenario", small_scenario, "--out", str(tmp_path / "o2"))
    assert code == 0
    for name in ("hit_rates.csv", "summary.json"):
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()


def test_run_scenario_unwritable_out(capsys, tmp_path, small_scenario):
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("")
    code, _, err = run(capsys, "run-scenario", "--scenario", small_scenario, "--out", str(blocker / "x"))
    assert code == 3
    assert str(blocker) in err


def test_run_scenario_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "run-scenario", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path))
    assert code == 2


def test_module_entry_point_and_logging(tmp_path):
    env = {**os.environ, "HMG_LOG": "debug"}
    hmg_path = tmp_path / "hmg.json"
    hmg_path.write_text((DATA / "tennis_hmg.json").read_text())
    obs = tmp_path / "obs.json"
    obs.write_text("[0, 1, 1, 0, 0, 0, 1]")
    proc = subprocess.run(
        [sys.executable, "-m", "hmgame", "train", "--hmg", str(hmg_path), "--observations", str(obs), "--max-iterations", "3"],
        env=env, capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["state_labels"] == ["Aggressive", "Moderate", "Defensive"]
    assert "baum-welch iteration" in proc.stderr
