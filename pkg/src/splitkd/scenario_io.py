"""Scenario files (YAML), strict validation, and the distillation catalog."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .channel import REGIMES, ChannelModel, Trajectory, default_cqi_table, load_cqi_table
from .cost_model import DeviceProfile, ServerProfile, evenly_spaced_levels
from .model_profile import profile_from_config, profile_to_config
from .planner import POLICIES
from .simulator import DeviceSetup, Scenario

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Scenario file is missing, malformed, or fails validation."""


_TOP = {
    "schema_version", "name", "regime", "seed", "rounds_per_device", "batches_per_epoch", "batch_size",
    "local_epochs", "delay_budget_s", "scheduling", "compression_ratio", "include_server_static_energy",
    "student", "teacher", "channel", "server", "device_defaults", "devices",
}
_CHANNEL = {"bandwidth_hz", "device_tx_power_dbm", "server_tx_power_dbm", "pathloss_ref_db", "pathloss_exponent",
            "ref_distance_m", "snr_margin_db", "shadowing_sigma_db", "cqi_table"}
_SERVER = {"name", "max_freq_hz", "freq_levels_hz", "num_freq_levels", "min_freq_fraction", "cores",
           "flops_per_cycle_per_core", "compute_utilization", "effective_capacitance", "static_power_w",
           "tx_power_w", "rx_power_w"}
_DEVICE_COMMON = {"flops_per_cycle_per_core", "compute_utilization", "effective_capacitance", "static_power_w",
                  "tx_power_w", "rx_power_w"}
_DEVICE = _DEVICE_COMMON | {"name", "max_gpu_freq_hz", "cores", "trajectory", "local_epochs"}
_TRAJECTORY = {"start_distance_m", "closest_approach_m", "speed_mps", "duration_s"}


def _section(data: Any, where: str, allowed: set[str], required: set[str] = frozenset()) -> dict:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(map(str, unknown))}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")
    return dict(data)


def _build(where: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _num(value: Any, where: str, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def scenario_from_dict(data: Mapping[str, Any]) -> Scenario:
    data = _section(data, "scenario", _TOP, {"student", "teacher", "channel", "server", "devices"})
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})")

    regime = data.get("regime", "good")
    if regime not in REGIMES:
        raise ConfigError(f"regime: expected one of {sorted(REGIMES)}, got {regime!r}")

    models = {}
    for key in ("student", "teacher"):
        try:
            models[key] = profile_from_config(data[key])
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc

    ch = _section(data["channel"], "channel", _CHANNEL,
                  _CHANNEL - {"snr_margin_db", "shadowing_sigma_db", "cqi_table"})
    table = ch.pop("cqi_table", None)
    if table is None:
        table = default_cqi_table()
    elif isinstance(table, str):
        table = tuple((e.index, e.spectral_efficiency) for e in load_cqi_table(table))
    channel = _build("channel", ChannelModel, noise_density_dbm_per_hz=REGIMES[regime], cqi_table=table,
                     **{k: _num(v, f"channel.{k}") for k, v in ch.items()})

    srv = _section(data["server"], "server", _SERVER, {"name", "max_freq_hz", "cores"})
    max_f = _num(srv.pop("max_freq_hz"), "server.max_freq_hz")
    levels = srv.pop("freq_levels_hz", None)
    count = _num(srv.pop("num_freq_levels", 8), "server.num_freq_levels", int)
    low = _num(srv.pop("min_freq_fraction", 0.4), "server.min_freq_fraction")
    if levels is None:
        levels = evenly_spaced_levels(max_f, count, low)
    else:
        levels = tuple(_num(f, "server.freq_levels_hz") for f in levels)
        if not levels or levels[-1] != max_f:
            raise ConfigError("server.freq_levels_hz: last level must equal max_freq_hz")
    server = _build("server", ServerProfile, name=str(srv.pop("name")), freq_levels_hz=levels,
                    cores=_num(srv.pop("cores"), "server.cores", int),
                    **{k: _num(v, f"server.{k}") for k, v in srv.items()})

    defaults = _section(data.get("device_defaults", {}), "device_defaults", _DEVICE_COMMON)
    default_epochs = _num(data.get("local_epochs", 1), "local_epochs", int)
    raw_devices = data["devices"]
    if not isinstance(raw_devices, list) or not raw_devices:
        raise ConfigError("devices: expected a non-empty list")
    devices = []
    for i, raw in enumerate(raw_devices):
        where = f"devices[{i}]"
        d = _section(raw, where, _DEVICE, {"name", "max_gpu_freq_hz", "cores", "trajectory"})
        traj = _section(d.pop("trajectory"), f"{where}.trajectory", _TRAJECTORY,
                        {"start_distance_m", "closest_approach_m"})
        trajectory = _build(f"{where}.trajectory", Trajectory,
                            **{k: _num(v, f"{where}.trajectory.{k}") for k, v in traj.items()})
        epochs = _num(d.pop("local_epochs", default_epochs), f"{where}.local_epochs", int)
        fields = {k: _num(v, f"device_defaults.{k}") for k, v in defaults.items()}
        fields.update({k: _num(v, f"{where}.{k}") for k, v in d.items() if k in _DEVICE_COMMON})
        profile = _build(where, DeviceProfile, name=str(d["name"]),
                         max_gpu_freq_hz=_num(d["max_gpu_freq_hz"], f"{where}.max_gpu_freq_hz"),
                         cores=_num(d["cores"], f"{where}.cores", int), **fields)
        devices.append(_build(where, DeviceSetup, profile=profile, trajectory=trajectory, local_epochs=epochs))

    budget = _num(data.get("delay_budget_s", math.inf), "delay_budget_s")
    if not budget > 0:
        raise ConfigError(f"delay_budget_s: must be > 0, got {budget!r}")
    scheduling = data.get("scheduling", "round_robin")
    if scheduling not in POLICIES:
        raise ConfigError(f"scheduling: expected one of {POLICIES}, got {scheduling!r}")
    static = data.get("include_server_static_energy", True)
    if not isinstance(static, bool):
        raise ConfigError("include_server_static_energy: expected true/false")

    return _build(
        "scenario", Scenario,
        devices=tuple(devices), server=server, regime=regime, channel=channel,
        student=models["student"], teacher=models["teacher"],
        rounds_per_device=_num(data.get("rounds_per_device", 1), "rounds_per_device", int),
        batches_per_epoch=_num(data.get("batches_per_epoch", 1), "batches_per_epoch", int),
        batch_size=_num(data.get("batch_size", 1), "batch_size", int),
        delay_budget_s=budget, scheduling=scheduling,
        seed=_num(data.get("seed", 0), "seed", int),
        compression_ratio=_num(data.get("compression_ratio", 1.0), "compression_ratio"),
        precision_bytes=models["student"].spec["precision_bytes"],
        include_server_static_energy=static,
        name=str(data.get("name", "scenario")),
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Fully resolved config mapping; loading it back yields an equal Scenario."""
    ch = scenario.channel
    channel = {
        "bandwidth_hz": ch.bandwidth_hz,
        "device_tx_power_dbm": ch.device_tx_power_dbm,
        "server_tx_power_dbm": ch.server_tx_power_dbm,
        "pathloss_ref_db": ch.pathloss_ref_db,
        "pathloss_exponent": ch.pathloss_exponent,
        "ref_distance_m": ch.ref_distance_m,
        "snr_margin_db": ch.snr_margin_db,
        "shadowing_sigma_db": ch.shadowing_sigma_db,
    }
    if ch.cqi_table != default_cqi_table():
        channel["cqi_table"] = [[i, e] for i, e in ch.cqi_table]
    s = scenario.server
    server = {
        "name": s.name, "max_freq_hz": s.max_freq_hz, "freq_levels_hz": list(s.freq_levels_hz), "cores": s.cores,
        "flops_per_cycle_per_core": s.flops_per_cycle_per_core, "compute_utilization": s.compute_utilization,
        "effective_capacitance": s.effective_capacitance, "static_power_w": s.static_power_w,
        "tx_power_w": s.tx_power_w, "rx_power_w": s.rx_power_w,
    }
    devices = []
    for d in scenario.devices:
        p, t = d.profile, d.trajectory
        devices.append({
            "name": p.name, "max_gpu_freq_hz": p.max_gpu_freq_hz, "cores": p.cores,
            **{k: getattr(p, k) for k in sorted(_DEVICE_COMMON)},
            "local_epochs": d.local_epochs,
            "trajectory": {"start_distance_m": t.start_distance_m, "closest_approach_m": t.closest_approach_m,
                           "speed_mps": t.speed_mps, "duration_s": t.duration_s},
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "regime": scenario.regime,
        "seed": scenario.seed,
        "rounds_per_device": scenario.rounds_per_device,
        "batches_per_epoch": scenario.batches_per_epoch,
        "batch_size": scenario.batch_size,
        "delay_budget_s": scenario.delay_budget_s,
        "scheduling": scenario.scheduling,
        "compression_ratio": scenario.compression_ratio,
        "include_server_static_energy": scenario.include_server_static_energy,
        "student": profile_to_config(scenario.student),
        "teacher": profile_to_config(scenario.teacher),
        "channel": channel,
        "server": server,
        "devices": devices,
    }


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False, default_flow_style=False)


def loads_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    return scenario_from_dict(data)


def load_scenario(path: str | os.PathLike | None = None) -> Scenario:
    """Load and validate a scenario file; ``None`` loads the shipped default."""
    if path is None:
        return loads_scenario(default_scenario_text())
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    return loads_scenario(text)


def default_scenario_text() -> str:
    return resources.files("splitkd.data").joinpath("default_scenario.yaml").read_text()


def write_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class CatalogEntry:
    teacher: str
    teacher_size_gb: float
    distillation_type: str
    student: str
    student_size_gb: float
    compression_rate: int
    performance_note: str

    teacher_size_decimals: int = 0
    student_size_decimals: int = 0

    def rate_bounds(self) -> tuple[float, float]:
        """Range of teacher/student size ratios consistent with the sizes as printed (half-unit rounding)."""
        ht = 0.5 * 10.0**-self.teacher_size_decimals
        hs = 0.5 * 10.0**-self.student_size_decimals
        t, s = self.teacher_size_gb, self.student_size_gb
        return (t - ht) / (s + hs), (t + ht) / (s - hs)

    def rate_consistent(self) -> bool:
        lo, hi = self.rate_bounds()
        return math.floor(lo) <= self.compression_rate <= math.ceil(hi)


def _decimals(text: str) -> int:
    text = text.strip()
    return len(text.split(".")[1]) if "." in text else 0


def catalog_list() -> list[CatalogEntry]:
    text = resources.files("splitkd.data").joinpath("kd_catalog.csv").read_text()
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    entries = []
    try:
        for r in csv.DictReader(io.StringIO("\n".join(rows))):
            entries.append(CatalogEntry(
                teacher=r["teacher"], teacher_size_gb=float(r["teacher_size_gb"]),
                distillation_type=r["distillation_type"], student=r["student"],
                student_size_gb=float(r["student_size_gb"]), compression_rate=int(r["compression_rate"]),
                performance_note=r["performance_note"],
                teacher_size_decimals=_decimals(r["teacher_size_gb"]),
                student_size_decimals=_decimals(r["student_size_gb"]),
            ))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"corrupt catalog data file: {exc}") from exc
    if not entries:
        raise ConfigError("corrupt catalog data file: no rows")
    return entries
