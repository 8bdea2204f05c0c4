import copy

import pytest
import yaml

from splitkd.scenario_io import (
    ConfigError,
    catalog_list,
    default_scenario_text,
    dump_scenario,
    load_scenario,
    loads_scenario,
    scenario_from_dict,
    scenario_to_dict,
    write_atomic,
)


@pytest.fixture
def raw():
    return yaml.safe_load(default_scenario_text())


def test_default_devices(default_scenario):
    freqs = [d.profile.max_gpu_freq_hz for d in default_scenario.devices]
    cores = [d.profile.cores for d in default_scenario.devices]
    assert freqs == [1.3e9, 1.3e9, 1.0e9, 1.0e9, 0.91e9, 0.91e9, 0.76e9, 0.76e9, 1.2e9, 1.2e9]
    assert cores == [2048] * 4 + [1024] * 4 + [512] * 2
    assert default_scenario.server.max_freq_hz == 2.52e9
    assert len(default_scenario.server.freq_levels_hz) == 8


def test_default_models(default_scenario):
    assert default_scenario.student.num_blocks == 12
    assert default_scenario.teacher.num_blocks == 64


def test_roundtrip(default_scenario):
    again = loads_scenario(dump_scenario(default_scenario))
    assert again == default_scenario
    assert dump_scenario(again) == dump_scenario(default_scenario)


def test_regime_sets_noise(raw):
    raw["regime"] = "poor"
    assert scenario_from_dict(raw).channel.noise_density_dbm_per_hz == -160.0


def test_zero_budget_rejected(raw):
    raw["delay_budget_s"] = 0
    with pytest.raises(ConfigError, match="delay_budget_s"):
        scenario_from_dict(raw)


@pytest.mark.parametrize("path", [(), ("channel",), ("server",), ("devices", 0), ("devices", 0, "trajectory")])
def test_unknown_keys_rejected(raw, path):
    node = raw
    for key in path:
        node = node[key]
    node["surprise"] = 1
    with pytest.raises(ConfigError, match="surprise"):
        scenario_from_dict(raw)


def test_missing_required(raw):
    del raw["devices"]
    with pytest.raises(ConfigError):
        scenario_from_dict(raw)


def test_bad_regime(raw):
    raw["regime"] = "stormy"
    with pytest.raises(ConfigError):
        scenario_from_dict(raw)


def test_bad_schema_version(raw):
    raw["schema_version"] = 99
    with pytest.raises(ConfigError):
        scenario_from_dict(raw)


def test_explicit_levels(raw):
    server = raw["server"]
    for key in ("num_freq_levels", "min_freq_fraction"):
        server.pop(key, None)
    server["max_freq_hz"] = 2e9
    server["freq_levels_hz"] = [1e9, 2e9]
    assert scenario_from_dict(raw).server.freq_levels_hz == (1e9, 2e9)


def test_levels_must_end_at_max(raw):
    raw["server"]["freq_levels_hz"] = [1e9, 2e9]
    with pytest.raises(ConfigError, match="max_freq_hz"):
        scenario_from_dict(raw)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_scenario(tmp_path / "nope.yaml")


def test_not_a_mapping():
    with pytest.raises(ConfigError):
        loads_scenario("- 1\n- 2\n")


def test_write_atomic(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    write_atomic(target, b"abc")
    write_atomic(target, b"xyz")
    assert target.read_bytes() == b"xyz"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]


def test_to_dict_is_plain(default_scenario):
    d = scenario_to_dict(default_scenario)
    assert yaml.safe_load(yaml.safe_dump(d)) == copy.deepcopy(d)


class TestCatalog:
    def test_entries(self):
        entries = catalog_list()
        assert len(entries) == 7
        first = entries[0]
        assert (first.teacher_size_gb, first.student_size_gb, first.compression_rate) == (700, 12, 58)
        assert entries[-1].student_size_gb == 0.10

    def test_rate_consistent_with_sizes(self):
        assert all(e.rate_consistent() for e in catalog_list())

    def test_inconsistent_rate_detected(self):
        import dataclasses
        e = dataclasses.replace(catalog_list()[0], compression_rate=5)
        assert not e.rate_consistent()
