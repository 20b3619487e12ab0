import copy
import csv
import math

import pytest
import yaml

from multiscale_lab.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main, resolve_scenario_path, shipped_scenarios
from multiscale_lab.runner import OUTPUT_ROOT_ENV, run_scenario, run_study
from multiscale_lab.scenario import (
    ScenarioError,
    parse_scenario,
    parse_study,
    scenario_from_dict,
    serialize_scenario,
    serialize_study,
    study_from_dict,
)

OSCILLATOR = {
    "name": "minimal",
    "model": "oscillator",
    "params": {
        "t_end": 10.0,
        "scheme": "analytic",
        "cases": [{"name": "free", "m": 1.0, "k": 1.0, "gamma": 0.0, "x0": 1.0, "v0": 0.0}],
    },
}

SORPTION = {
    "name": "s1",
    "model": "sorption1d",
    "params": {
        "potential": {"tag": "lennard-jones", "eps": 0.05, "phi": 1.0},
        "D": 1.0,
        "models": "multiscale",
        "scheme": "implicit-euler",
        "dt": 1e-3,
        "output_times": [0.01],
        "multiscale": {"cells": 50},
        "c0": {"kind": "uniform", "value": 1.0},
    },
}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def is_study_file(path):
    return "study" in yaml.safe_load(path.read_text())


@pytest.mark.parametrize("path", shipped_scenarios(), ids=lambda p: p.stem)
def test_shipped_files_round_trip(path):
    if is_study_file(path):
        spec = parse_study(path)
        assert study_from_dict(yaml.safe_load(serialize_study(spec))) == spec
    else:
        scen = parse_scenario(path)
        assert scenario_from_dict(yaml.safe_load(serialize_scenario(scen))) == scen


def test_shipped_catalogue_covers_every_model():
    models = set()
    for p in shipped_scenarios():
        data = yaml.safe_load(p.read_text())
        models.add(data["base"]["model"] if "study" in data else data["model"])
    assert models == {"oscillator", "pendulum", "sorption1d", "sorption1d-compare", "sorption2d", "sw-network",
                      "euler-eigen"}
    assert len(shipped_scenarios()) >= 12


def test_minimal_oscillator_is_valid():
    s = scenario_from_dict(OSCILLATOR)
    assert s.model == "oscillator" and s.output_dir == "minimal"


def test_zero_epsilon_rejected():
    bad = copy.deepcopy(SORPTION)
    bad["params"]["potential"]["eps"] = 0.0
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(bad)
    assert any("epsilon must be positive" in e for e in info.value.errors)
    assert any(e.startswith("params.potential.eps") for e in info.value.errors)


def test_every_problem_is_reported():
    bad = copy.deepcopy(OSCILLATOR)
    bad["params"]["cases"][0]["m"] = -1.0
    bad["params"]["t_end"] = -1.0
    bad["output"] = {"directory": "/abs"}
    bad["colour"] = "red"
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(bad)
    text = "\n".join(info.value.errors)
    for fragment in ("mass must be positive", "t_end", "output.directory", "unknown top-level keys"):
        assert fragment in text
    with pytest.raises(ScenarioError, match="unknown model tag"):
        scenario_from_dict({"name": "x", "model": "maxwell", "params": {}})


def test_channel_end_linked_twice_names_both_edges():
    edge = {"channel": "a", "end": "right"}
    scen = {
        "name": "net",
        "model": "sw-network",
        "params": {
            "t_end": 0.1,
            "network": {
                "channels": [{"id": "a", "length": 1.0, "cells": 10, "bc_right": "junction", "initial": {"h": 1.0}}],
                "junctions": [
                    {"id": "J1", "sides": 4, "edges": [edge], "initial": {"h": 1.0}},
                    {"id": "J2", "sides": 4, "edges": [edge], "initial": {"h": 1.0}},
                ],
            },
        },
    }
    with pytest.raises(ScenarioError) as info:
        scenario_from_dict(scen)
    text = "\n".join(info.value.errors)
    assert "J1.edge[2]" in text and "J2.edge[2]" in text


def test_single_value_sweep_rejected():
    study = {"name": "s", "study": {"parameter": "t_end", "values": [1.0], "metric": "max_error"}, "base": OSCILLATOR}
    with pytest.raises(ScenarioError, match="at least 2"):
        study_from_dict(study)
    study["study"]["values"] = [1.0, 2.0]
    study["study"]["parameter"] = "nope"
    with pytest.raises(ScenarioError, match="not a field"):
        study_from_dict(study)


def test_run_is_deterministic(tmp_path):
    scen = parse_scenario(resolve_scenario_path("sorption1d-two-wall"))
    a = run_scenario(scen, tmp_path / "a")
    b = run_scenario(scen, tmp_path / "b")
    assert [f.name for f in a.files] == [f.name for f in b.files]
    for fa, fb in zip(a.files, b.files):
        assert fa.read_bytes() == fb.read_bytes()


def test_pendulum_study_error_decreases(tmp_path):
    res = run_study(parse_study(resolve_scenario_path("pendulum-k-study")), tmp_path)
    errors = res.metrics
    assert errors[0] > errors[1] > errors[2]
    rows = read_csv(res.directory / "study.csv")
    assert rows[0] == ["parameter", "max_angle_error"] and len(rows) == 4
    assert len(list(res.directory.glob("k=*/trajectory.csv"))) == 3


def test_grid_study_reports_second_order(tmp_path):
    res = run_study(parse_study(resolve_scenario_path("multiscale-grid-study")), tmp_path)
    assert res.order == pytest.approx(2.0, abs=0.2)


def test_compare_scenario_error_table(tmp_path):
    res = run_scenario(parse_scenario(resolve_scenario_path("sorption1d-compare")), tmp_path)
    rows = read_csv(res.directory / "errors.csv")
    sup = [float(r[rows[0].index("sup_error")]) for r in rows[1:]]
    assert len(sup) == 3 and sup[0] > sup[1] > sup[2]
    assert res.metrics["monotone"]
    assert res.metrics["order"] >= 1.0


def test_cli_euler_eigen_prints_spectrum(tmp_path, capsys):
    assert main(["--output-root", str(tmp_path), "run", "euler-eigen"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "state 0: {-1, 0, 1} hyperbolic" in out and "not hyperbolic" in out
    rows = read_csv(tmp_path / "euler-eigen" / "eigenvalues.csv")
    first = rows[1]
    header = rows[0]
    lams = sorted(float(first[header.index(k)]) for k in header if k.startswith("lambda") and k.endswith("_re"))
    assert lams == [-1.0, 0.0, 1.0]


def test_cli_validate_and_list(capsys):
    assert main(["validate", "oscillator-regimes"]) == EXIT_OK
    assert "valid scenario" in capsys.readouterr().out
    assert main(["validate", "pendulum-k-study"]) == EXIT_OK
    assert "valid study" in capsys.readouterr().out
    assert main(["list-scenarios"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("\n") == len(shipped_scenarios())


def test_cli_invalid_file_exit_code(tmp_path, capsys):
    bad = copy.deepcopy(SORPTION)
    bad["params"]["potential"]["eps"] = 0.0
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(bad))
    assert main(["validate", str(path)]) == EXIT_INVALID
    assert main(["run", str(path)]) == EXIT_INVALID
    assert "epsilon must be positive" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == EXIT_INVALID


def test_cli_runtime_failure_exit_code(tmp_path, capsys):
    scen = {"name": "coarse", "model": "pendulum",
            "params": {"m": 1.0, "L": 1.0, "k": 1e4, "theta0_deg": 30.0, "t_end": 1.0, "dt": 0.01}}
    path = tmp_path / "coarse.yaml"
    path.write_text(yaml.safe_dump(scen))
    assert main(["--output-root", str(tmp_path / "out"), "run", str(path)]) == EXIT_RUNTIME
    assert "coarse" in capsys.readouterr().err


def test_output_root_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "env-root"))
    assert main(["run", "euler-eigen"]) == EXIT_OK
    assert (tmp_path / "env-root" / "euler-eigen" / "summary.csv").exists()
    assert main(["--output-root", str(tmp_path / "flag"), "run", "euler-eigen"]) == EXIT_OK
    assert (tmp_path / "flag" / "euler-eigen" / "summary.csv").exists()
