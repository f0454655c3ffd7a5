"""Command line behavior: output formats, exit codes, determinism."""
import json

import numpy as np
import pytest

from blamekit.cli import main, run_coordination, run_perm_sweep
from blamekit.mmdp import save_model, save_policy
from blamekit.planning import CharacteristicGame, mmdp_from_game


@pytest.fixture()
def two_agent_inputs(tmp_path):
    """The interchangeable-agents fixture as a model/behavior file pair."""
    game = CharacteristicGame(2, np.array([0.0, 2.0, 2.0, 2.0]))
    model, behavior = mmdp_from_game(game)
    model_path = tmp_path / "model.json"
    behavior_path = tmp_path / "behavior.json"
    save_model(model, model_path)
    save_policy(behavior, behavior_path)
    return str(model_path), str(behavior_path)


def test_attribute_all_methods(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["attribute", "--model", model_path,
                 "--behavior", behavior_path])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "method,beta_1,beta_2,total"
    assert "SV,1,1,2" in out
    assert "BI,1,1,2" in out
    assert "AP,1,1,2" in out
    assert "MC,2,2,4" in out
    assert sum(line.startswith("MER,") for line in out) == 1
    mer_line = next(line for line in out if line.startswith("MER,"))
    assert mer_line.endswith(",2")  # the optimal total is unique


def test_attribute_tiebreak_and_subset(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["attribute", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "MER,MC", "--tiebreak", "1"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1:] == ["MER,2,0,2", "MC,2,2,4"]

    code = main(["attribute", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "MER", "--tiebreak", "2"])
    assert code == 0
    assert capsys.readouterr().out.splitlines()[1] == "MER,0,2,2"


def test_attribute_writes_file(two_agent_inputs, tmp_path, capsys):
    model_path, behavior_path = two_agent_inputs
    out_path = tmp_path / "blame.csv"
    code = main(["attribute", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "SV", "--out", str(out_path)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert out_path.read_text() == "method,beta_1,beta_2,total\nSV,1,1,2\n"


def test_check_reports_all_six_properties(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["check", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "SV"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "property,epsilon,holds,witness"
    names = [line.split(",")[0] for line in out[1:]]
    assert names == ["R_V", "R_E", "R_R", "R_AE", "R_S", "R_I"]
    by_name = {line.split(",")[0]: line for line in out[1:]}
    for prop in ("R_V", "R_E", "R_S", "R_I"):
        assert by_name[prop].split(",")[2] == "true"
    # on this instance even the non-guaranteed cap check comes out clean
    assert by_name["R_R"].split(",")[2] == "true"


def test_check_epsilon_is_recorded(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["check", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "MC", "--eps", "0.25"])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert all(line.split(",")[1] == "0.25" for line in out[1:])


def test_check_rejects_method_lists(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["check", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "SV,MC"])
    assert code == 2
    assert "one method" in capsys.readouterr().err


def test_unknown_method_exits_2(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["attribute", "--model", model_path, "--behavior", behavior_path,
                 "--methods", "EQ"])
    assert code == 2
    assert "unknown methods" in capsys.readouterr().err


def test_bad_tiebreak_exits_2(two_agent_inputs, capsys):
    model_path, behavior_path = two_agent_inputs
    code = main(["attribute", "--model", model_path, "--behavior", behavior_path,
                 "--tiebreak", "3"])
    assert code == 2
    assert "tiebreak" in capsys.readouterr().err


def test_missing_file_exits_4(two_agent_inputs, capsys):
    _, behavior_path = two_agent_inputs
    code = main(["attribute", "--model", "/nonexistent/model.json",
                 "--behavior", behavior_path])
    assert code == 4
    assert "cannot read" in capsys.readouterr().err


def test_malformed_json_exits_2(two_agent_inputs, tmp_path, capsys):
    _, behavior_path = two_agent_inputs
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code = main(["attribute", "--model", str(broken),
                 "--behavior", behavior_path])
    assert code == 2
    assert "cannot parse" in capsys.readouterr().err


def test_invalid_model_exits_3(two_agent_inputs, tmp_path, capsys):
    _, behavior_path = two_agent_inputs
    doc = {
        "num_states": 2, "num_agents": 2, "action_counts": [2, 2],
        "gamma": 0.9, "initial_dist": [1.0, 0.0], "terminals": [],
        "rewards": [],
        "transitions": [[s, a, 1, 0.5] for s in range(2) for a in range(4)],
    }
    path = tmp_path / "halfmass.json"
    path.write_text(json.dumps(doc))
    code = main(["attribute", "--model", str(path),
                 "--behavior", behavior_path])
    assert code == 3
    assert "invalid instance" in capsys.readouterr().err


def test_perm_sweep_rows():
    rows = run_perm_sweep()
    alphas = sorted({r["alpha_prime"] for r in rows})
    assert alphas == [round(0.1 * i, 1) for i in range(11)]
    methods = {r["method"] for r in rows}
    assert methods == {"MER", "MC", "SV", "BI", "AP"}
    for r in rows:
        assert r["blames"].shape == (2,)
        assert r["total"] == pytest.approx(float(r["blames"].sum()), abs=1e-9)


def test_coordination_rows_match_threshold_structure():
    rows = run_coordination()
    assert sorted({r["m"] for r in rows}) == [1, 2, 3, 4]
    by = {(r["m"], r["method"]): r for r in rows}
    # the totals ordering that makes the four thresholds interesting
    assert by[(1, "MC")]["total"] > by[(1, "MC")]["delta"] + 1e-6
    assert by[(2, "MER")]["total"] == pytest.approx(0.0, abs=1e-9)
    assert by[(2, "MC")]["total"] == pytest.approx(0.0, abs=1e-9)
    assert by[(2, "BI")]["total"] > by[(2, "BI")]["delta"] + 1e-6
    for m in (1, 2, 3, 4):
        assert by[(m, "SV")]["total"] == pytest.approx(
            by[(m, "SV")]["delta"], abs=1e-6)


def test_perm_experiment_writes_csv(tmp_path, capsys):
    code = main(["experiment", "perm", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "perm.csv").read_text().splitlines()
    assert lines[0] == "alpha_prime,method,beta_1,beta_2,total"
    assert len(lines) == 1 + 11 * 5


def test_coordination_experiment_writes_csv(tmp_path):
    code = main(["experiment", "coordination", "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "coordination.csv").read_text().splitlines()
    assert lines[0] == "m,method,beta_1,beta_2,beta_3,beta_4,total"
    assert len(lines) == 1 + 4 * 5


def test_robustness_experiment_is_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        code = main(["experiment", "robustness-grid", "--seeds", "2",
                     "--eps", "0.1", "--out", str(out)])
        assert code == 0
    name = "robustness_grid.csv"
    assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    summary = "robustness_grid_summary.csv"
    assert (out1 / summary).read_bytes() == (out2 / summary).read_bytes()

    lines = (out1 / name).read_text().splitlines()
    assert lines[0] == ("method,eps_max,seed,beta_1,beta_2,total,"
                        "l1_to_truth,consistent")
    methods = {line.split(",")[0] for line in lines[1:]}
    assert methods == {"SV", "SV_V", "SV_BC", "BI_BC", "MC_BC", "MER_BC", "AP_BC"}
    assert len(lines) == 1 + 7 * 2

    summary_lines = (out1 / summary).read_text().splitlines()
    assert summary_lines[0] == ("method,eps_max,total_mean,total_std,"
                                "l1_mean,l1_std,consistent_all")
    assert len(summary_lines) == 1 + 7


def test_bad_eps_list_exits_2(tmp_path, capsys):
    code = main(["experiment", "robustness-grid", "--eps", "0.1,oops",
                 "--out", str(tmp_path)])
    assert code == 2
    assert "bad eps list" in capsys.readouterr().err
    code = main(["experiment", "robustness-grid", "--eps", "-0.2",
                 "--out", str(tmp_path)])
    assert code == 2


def test_exact_uncertainty_unavailable_on_the_graph(tmp_path, capsys):
    code = main(["experiment", "robustness-graph", "--seeds", "1",
                 "--eps", "0.05", "--exact-uncertainty", "--out", str(tmp_path)])
    assert code == 3
    err = capsys.readouterr().err
    assert "experiment failed" in err
    assert "no exact chooser" in err


def test_argparse_level_failures_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["experiment", "perm", "--seeds", "0", "--out", str(tmp_path)])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["experiment", "unknown-name"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["experiment", "perm", "--exact-uncertainty", "--relaxed"])
    assert info.value.code == 2
