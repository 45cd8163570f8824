import numpy as np
import pytest

from symgauge import cli
from symgauge.errors import ConfigError, StepSizeError, UnknownScenarioError
from symgauge.io import read_csv, read_snapshot
from symgauge.scenarios import REGISTRY, ScenarioConfig, list_scenarios, run_scenario

REQUIRED = [
    "vacuum_plane_wave",
    "sourced_oscillating_charge",
    "static_charge_equilibrium",
    "particle_constant_B",
    "particle_nonclosed_field_jacobi",
    "su2_pure_gauge",
    "chart_equivalence_su2",
]

# cheap settings so every scenario runs in well under a second
SMALL = {
    "vacuum_plane_wave": dict(dims=[8, 8, 8], steps=20, output_every=5),
    "sourced_oscillating_charge": dict(dims=[16, 16, 16], steps=40, output_every=10),
    "static_charge_equilibrium": dict(dims=[8, 8, 8], steps=20, output_every=5),
    "particle_constant_B": dict(steps=200, output_every=50),
    "particle_nonclosed_field_jacobi": dict(steps=20, initial={"points": 3}),
    "su2_pure_gauge": dict(initial={"points": 3}),
    "chart_equivalence_su2": dict(steps=20),
}


def test_registry_contents_and_stability():
    names = [n for n, _ in list_scenarios()]
    for name in REQUIRED:
        assert name in names
    assert list_scenarios() == list_scenarios()
    assert all(desc for _, desc in list_scenarios())


@pytest.mark.parametrize("name", REQUIRED)
def test_every_scenario_runs(name, tmp_path):
    cfg = ScenarioConfig.default(name, output_dir=str(tmp_path), **SMALL[name])
    report = run_scenario(cfg)
    assert report.ok, report.summary()
    assert (tmp_path / "config.yaml").exists()
    for path in report.outputs:
        assert (tmp_path / path.split("/")[-1]).exists()


def test_config_round_trip(tmp_path):
    cfg = ScenarioConfig.default("sourced_oscillating_charge", dims=[16, 16, 16], seed=7, dt=0.01)
    again = ScenarioConfig.loads(cfg.dumps())
    assert again == cfg
    cfg.save(tmp_path / "c.yaml")
    assert ScenarioConfig.load(tmp_path / "c.yaml") == cfg


def test_config_errors_name_the_field():
    with pytest.raises(UnknownScenarioError) as info:
        ScenarioConfig.from_dict({"scenario": "nope"})
    assert info.value.field == "scenario"
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict({"scenario": "vacuum_plane_wave", "colour": 1})
    assert info.value.field == "colour"
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.default("vacuum_plane_wave", dims=[8, 3, 8]).validate()
    assert info.value.field == "grid"
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.default("vacuum_plane_wave", steps=0).validate()
    assert info.value.field == "steps"
    with pytest.raises(StepSizeError) as info:
        ScenarioConfig.default("vacuum_plane_wave", dt=10.0).validate()
    assert "stability bound" in str(info.value) and info.value.bound > 0


def test_determinism(tmp_path):
    rows = []
    for sub in ("a", "b"):
        cfg = ScenarioConfig.default("vacuum_plane_wave", output_dir=str(tmp_path / sub), dims=[8, 8, 8], steps=10,
                                     output_every=5, initial={"family": "random"}, seed=3)
        run_scenario(cfg)
        rows.append((tmp_path / sub / "diagnostics.csv").read_bytes())
    assert rows[0] == rows[1]


def test_outputs_are_readable(tmp_path):
    cfg = ScenarioConfig.default("vacuum_plane_wave", output_dir=str(tmp_path), **SMALL["vacuum_plane_wave"])
    run_scenario(cfg)
    cols, data = read_csv(tmp_path / "diagnostics.csv")
    assert cols == ["t", "H", "lorentz", "gauss", "divB", "faraday", "ampere"]
    assert data.shape == (5, 7)
    A, name, t = read_snapshot(tmp_path / "A.sgf")
    assert name == "A" and t == pytest.approx(data[-1, 0])
    cfg = ScenarioConfig.default("particle_constant_B", output_dir=str(tmp_path), **SMALL["particle_constant_B"])
    run_scenario(cfg)
    cols, data = read_csv(tmp_path / "trajectory.csv")
    assert cols == ["t", "q1", "q2", "q3", "p1", "p2", "p3", "y1", "H"]


def test_cli(tmp_path, capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in REQUIRED)

    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: static_charge_equilibrium\ndims: [8, 8, 8]\n")
    assert cli.main(["check", str(cfg)]) == 0
    assert cli.main(["run", str(cfg), "--output-dir", str(tmp_path / "o"), "--steps", "5"]) == 0
    assert "PASS fixed_point_deviation" in capsys.readouterr().out
    assert cli.main(["check", str(cfg), "--dt", "5.0"]) == 2
    assert "stability bound" in capsys.readouterr().err

    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: warp_drive\n")
    assert cli.main(["run", str(bad)]) == 2


def test_cli_exit_status_reflects_failed_check(tmp_path):
    # an oversized step in the gyromotion run breaks the radius tolerance
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: particle_constant_B\nsteps: 100\n")
    assert cli.main(["run", str(cfg), "--output-dir", str(tmp_path), "--dt", "0.3"]) == 1
