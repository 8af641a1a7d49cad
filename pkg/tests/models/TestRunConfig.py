import json

import pytest

from src.models.parameters import ParameterKind
from src.models.run_config import (DEFAULT_RUN_SETTINGS, RunConfig, SweepParameter, config_from_dict,
                                   load_run_config, run_config_decoder)
from src.utils.exceptions import ConfigError

SAMPLE_CONFIG = {
    "parameters": {"dimensionless": {"omega_c_ratio": 0.9, "tension_ratio": 2.0, "n_modes": 40, "omega_d_ratio": 1.5}},
    "seed": 11,
    "trace": {"n_points": 512},
    "sweep": {"parameter": "omega_c_ratio", "values": [0.5, 0.7]},
    "workers": 2,
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SAMPLE_CONFIG))
    return path


def test_defaults_without_file():
    config = load_run_config(None)
    assert config.parameters.kind is ParameterKind.DIMENSIONLESS
    assert config.parameters.values == DEFAULT_RUN_SETTINGS["parameters"]["dimensionless"]
    assert config.seed == 0
    assert config.perturb == 0.0
    assert config.g_target is None
    assert config.n_time == 4096
    assert config.fock_modes == 2
    assert config.fock_cutoff == 12
    assert config.sweep.parameter is SweepParameter.G_TARGET
    assert config.sweep.values == []
    assert config.workers == 1


def test_load_merges_sections_with_defaults(config_path):
    config = load_run_config(str(config_path))
    assert config.parameters.n_modes == 40
    assert config.seed == 11
    assert config.n_time == 512
    assert config.delta == 1.0
    assert config.sweep.parameter is SweepParameter.OMEGA_C_RATIO
    assert config.sweep.values == [0.5, 0.7]
    assert config.workers == 2
    assert config.figures["fig2_points"] == DEFAULT_RUN_SETTINGS["figures"]["fig2_points"]


def test_default_figures_are_not_shared():
    first = load_run_config(None)
    first.figures["g"] = 0.1
    assert load_run_config(None).figures["g"] == DEFAULT_RUN_SETTINGS["figures"]["g"]


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "absent.json"))


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ConfigError):
        load_run_config(str(path))


@pytest.mark.parametrize("loaded", [
    [],
    {"unknown_key": 1},
    {"g_target": 1.5},
    {"g_target": 0.0},
    {"trace": {"n_points": 1}},
    {"trace": {"t_max": -2.0}},
    {"fock": {"n_modes": 4}},
    {"fock": {"cutoff": 0}},
    {"workers": 0},
    {"sweep": {"parameter": "temperature", "values": [1.0]}},
    {"sweep": {"values": 0.5}},
    {"trace": "fast"},
    {"seed": "abc"},
])
def test_invalid_configurations(loaded):
    with pytest.raises(ConfigError):
        config_from_dict(loaded)


def test_g_target_requires_dimensionless_block():
    raw = {"m": 1.0, "kappa": 0.5, "kappa_c": 0.5, "tau": 1.0, "sigma": 1.0, "ell": 10.0, "n_modes": 5}
    with pytest.raises(ConfigError):
        config_from_dict({"parameters": {"raw": raw}, "g_target": 0.5})


def test_decoder_converts_sweep_parameter():
    assert run_config_decoder({"parameter": "tension_ratio"})["parameter"] is SweepParameter.TENSION_RATIO


def test_decoder_leaves_unknown_parameter(caplog):
    result = run_config_decoder({"parameter": "temperature"})
    assert result["parameter"] == "temperature"
    assert "Unknown sweep parameter" in caplog.text


class TestOverrides:
    """Tests for command-line overrides."""

    def test_none_values_ignored(self):
        config = load_run_config(None)
        assert config.with_overrides(seed=None, out_dir=None) == config

    def test_n_modes_routed_into_parameters(self):
        config = load_run_config(None).with_overrides(n_modes=7, seed=3)
        assert config.parameters.n_modes == 7
        assert config.seed == 3

    def test_overrides_are_validated(self):
        with pytest.raises(ConfigError):
            load_run_config(None).with_overrides(g_target=2.0)

    def test_returns_new_instance(self):
        config = load_run_config(None)
        updated = config.with_overrides(perturb=1e-3)
        assert isinstance(updated, RunConfig)
        assert config.perturb == 0.0
        assert updated.perturb == 1e-3
