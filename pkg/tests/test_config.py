"""YAML run configuration: defaults, overrides, and strict key checking."""

import pytest

from ific.config import ConfigError, parse_config, resolve_config
from ific.plant import IMPULSE


def test_empty_file_resolves_to_wiping_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    cfg = parse_config(path)
    assert cfg.scenario.name == "wiping"
    assert cfg.controller == "ific"
    assert cfg.scenario.duration == pytest.approx(150.0)
    assert cfg.scenario.params.kp == 2.0
    assert cfg.scenario.params.p_valve_f == pytest.approx(0.03)
    assert cfg.scenario.task.f_dz == pytest.approx(-10.0)


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown top-level keys"):
        resolve_config({"scenari": "wiping"})


def test_unknown_nested_key_reports_path():
    with pytest.raises(ConfigError, match=r"params\.'kq'"):
        resolve_config({"params": {"kq": 3.0}})
    with pytest.raises(ConfigError, match=r"script\[0\]\.'direciton'"):
        resolve_config({"script": [
            {"t_start": 0.0, "t_end": 1.0, "kind": IMPULSE, "direciton": [0, 1, 0]},
        ]})


def test_bad_controller_and_scenario_rejected():
    with pytest.raises(ConfigError, match="controller"):
        resolve_config({"controller": "pid"})
    with pytest.raises(ConfigError, match="scenario"):
        resolve_config({"scenario": "polishing"})


def test_schema_version_checked():
    with pytest.raises(ConfigError, match="schema_version"):
        resolve_config({"schema_version": 99})


def test_duration_and_noise_overrides():
    cfg = resolve_config({"duration": 12.5, "noise": {"std": 0.2, "seed": 3}})
    assert cfg.scenario.duration == pytest.approx(12.5)
    assert cfg.scenario.noise_std == pytest.approx(0.2)
    assert cfg.scenario.noise_seed == 3


def test_params_override_row():
    cfg = resolve_config({"params": {"kp": 3.0, "k_s_t": 1500.0}})
    assert cfg.scenario.params.kp == 3.0
    assert cfg.scenario.params.k_s_t == 1500.0
    # untouched fields keep the default row
    assert cfg.scenario.params.ki == 2.0


def test_scenario_builder_defaults_survive_without_params_section():
    cfg = resolve_config({"scenario": "phantom"})
    # the phantom setup ships its own parameter row
    assert cfg.scenario.params.kd == pytest.approx(0.01)
    assert cfg.scenario.params.k_s_t == pytest.approx(1500.0)
    assert cfg.scenario.params.p_valve_f == pytest.approx(0.05)
    assert cfg.scenario.safety_bound == pytest.approx(25.0)


def test_script_segments_parsed():
    cfg = resolve_config({"script": [
        {"t_start": 1.0, "t_end": 1.5, "kind": IMPULSE,
         "direction": [0, 0, -1], "peak": 25.0},
    ]})
    seg = cfg.scenario.script.segments[0]
    assert seg.kind == IMPULSE
    assert seg.peak == 25.0
    assert seg.direction == (0.0, 0.0, -1.0)


def test_segment_requires_kind_and_times():
    with pytest.raises(ConfigError, match="needs"):
        resolve_config({"script": [{"t_start": 0.0, "t_end": 1.0}]})


def test_lpf_and_ds_sections():
    cfg = resolve_config({
        "lpf": {"threshold": 8.0},
        "ds": {"e_threshold": 0.2, "e_max": 1.0},
    })
    assert cfg.lpf.threshold == 8.0
    assert cfg.lpf.cutoff_hz == 20.0
    assert cfg.ds.e_threshold == 0.2


def test_missing_file_raises():
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config("/nonexistent/run.yaml")


def test_shipped_exp3_file_reproduces_row():
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent
    cfg = parse_config(root / "scenarios" / "exp3_phantom.yaml")
    assert cfg.scenario.task.f_dz == pytest.approx(-3.0)
    assert cfg.scenario.params.p_valve_f == pytest.approx(0.05)
    assert cfg.scenario.params.e_total_f == pytest.approx(2.0)
    assert cfg.scenario.params.k_s_t == pytest.approx(1500.0)


def test_build_controller_respects_selection():
    cfg = resolve_config({"controller": "lpf"})
    assert cfg.build_controller().name == "lpf"
    assert cfg.build_controller("ds").name == "ds"
