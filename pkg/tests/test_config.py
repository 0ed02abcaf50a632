import json

import pytest
import yaml

from memrc.config import ConfigError, load_config, parse_config

BASE = {
    "memristor": {"r_low_voltage": 465e3, "rho": 0.5},
    "circuit": {"C": 10e-9, "k": 5, "g_max": 1.4771e-5},
}


def cfg_with(**extra):
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in BASE.items()}
    raw.update(extra)
    return raw


class TestParseConfig:
    def test_minimal(self):
        cfg = parse_config(cfg_with())
        assert cfg.r_low_voltage == 465e3
        assert cfg.circuit.R == pytest.approx(13.54e3, rel=1e-3)
        assert cfg.train.method == "ridge"
        assert cfg.table is None
        assert cfg.memristor_states == [465e3]

    def test_explicit_circuit_values(self):
        cfg = parse_config(cfg_with(circuit={
            "C": 10e-9, "R": 13.54e3, "L": 1.833, "G_N": -88.65e-6,
        }))
        assert cfg.circuit.L == 1.833

    def test_seed_propagates_to_acquisition(self):
        cfg = parse_config(cfg_with(seed=9))
        assert cfg.seed == 9
        assert cfg.acquisition.rng_seed == 9

    def test_explicit_acquisition_seed_wins(self):
        cfg = parse_config(cfg_with(seed=9, acquisition={"rng_seed": 3}))
        assert cfg.acquisition.rng_seed == 3

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError):
            parse_config(cfg_with(extra_knob=1))

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError):
            parse_config(cfg_with(acquisition={"sample_rate": 100}))

    def test_missing_required_section(self):
        with pytest.raises(ConfigError):
            parse_config({"circuit": dict(BASE["circuit"])})

    def test_state_outside_window(self):
        raw = cfg_with()
        raw["memristor"]["r_low_voltage"] = 5e6
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_swept_state_outside_window(self):
        with pytest.raises(ConfigError):
            parse_config(cfg_with(sweep={"memristor_states": [465e3, 5e6]}))

    def test_bad_train_method(self):
        with pytest.raises(ConfigError):
            parse_config(cfg_with(train={"method": "forest"}))

    def test_table_section(self):
        cfg = parse_config(cfg_with(table={
            "n_bits": 2, "explicit": [0.161, 0.188, 0.299, 0.346],
        }))
        assert cfg.table.amplitudes == (0.161, 0.188, 0.299, 0.346)

    def test_stream_section(self):
        cfg = parse_config(cfg_with(stream={
            "u_low": 0.1, "u_high": 0.3, "n_streams": 4, "stream_length": 12,
        }))
        assert cfg.stream.u_high == 0.3
        assert cfg.n_streams == 4
        assert cfg.stream_length == 12

    def test_root_must_be_mapping(self):
        with pytest.raises(ConfigError):
            parse_config([1, 2])  # type: ignore[arg-type]

    def test_memristor_model_helper(self):
        cfg = parse_config(cfg_with())
        assert cfg.memristor_model().state.r_low_voltage == 465e3
        assert cfg.memristor_model(755e3).state.r_low_voltage == 755e3


class TestLoadConfig:
    def test_yaml_roundtrip(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(cfg_with(seed=4)))
        cfg = load_config(path)
        assert cfg.seed == 4

    def test_json_accepted(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg_with(seed=2)))
        assert load_config(path).seed == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("seed: [unclosed")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_non_mapping_root(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestHash:
    def test_stable(self):
        a = parse_config(cfg_with(seed=1))
        b = parse_config(cfg_with(seed=1))
        assert a.sha256() == b.sha256()

    def test_sensitive_to_content(self):
        a = parse_config(cfg_with(seed=1))
        b = parse_config(cfg_with(seed=2))
        assert a.sha256() != b.sha256()
