"""Deterministic link model: log-distance path loss -> SNR -> CQI -> bitrate."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Sequence

import numpy as np

# Noise spectral density presets (dBm/Hz) for the three named channel regimes.
REGIMES: dict[str, float] = {"good": -166.0, "normal": -163.0, "poor": -160.0}


class LinkOutage(RuntimeError):
    """Raised when a non-empty payload must cross a zero-rate link."""


@dataclass(frozen=True)
class CqiEntry:
    index: int
    modulation: str
    code_rate: float
    spectral_efficiency: float


def load_cqi_table(path=None) -> tuple[CqiEntry, ...]:
    if path is None:
        text = resources.files("splitkd.data").joinpath("cqi_table.csv").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    entries = tuple(
        CqiEntry(int(r["cqi_index"]), r["modulation"], float(r["code_rate"]), float(r["spectral_efficiency"]))
        for r in csv.DictReader(rows)
    )
    _check_table(tuple((e.index, e.spectral_efficiency) for e in entries))
    return entries


def default_cqi_table() -> tuple[tuple[int, float], ...]:
    return tuple((e.index, e.spectral_efficiency) for e in load_cqi_table())


def _check_table(table: Sequence[tuple[int, float]]) -> None:
    if len(table) != 15:
        raise ValueError(f"CQI table needs 15 entries, got {len(table)}")
    if [i for i, _ in table] != list(range(1, 16)):
        raise ValueError("CQI table indices must be 1..15 in order")
    effs = [e for _, e in table]
    if any(b <= a for a, b in zip(effs, effs[1:])) or effs[0] <= 0:
        raise ValueError("CQI spectral efficiencies must be positive and strictly increasing")


@dataclass(frozen=True)
class ChannelModel:
    noise_density_dbm_per_hz: float
    bandwidth_hz: float
    device_tx_power_dbm: float
    server_tx_power_dbm: float
    pathloss_ref_db: float
    pathloss_exponent: float
    ref_distance_m: float
    cqi_table: tuple[tuple[int, float], ...]
    snr_margin_db: float = 0.0
    shadowing_sigma_db: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cqi_table", tuple((int(i), float(e)) for i, e in self.cqi_table))
        _check_table(self.cqi_table)
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not self.pathloss_exponent >= 2:
            raise ValueError("pathloss_exponent must be >= 2")
        if not self.ref_distance_m > 0:
            raise ValueError("ref_distance_m must be positive")
        if self.shadowing_sigma_db < 0:
            raise ValueError("shadowing_sigma_db must be >= 0")

    def with_regime(self, name: str) -> "ChannelModel":
        try:
            density = REGIMES[name]
        except KeyError:
            raise ValueError(f"unknown channel regime {name!r}; expected one of {sorted(REGIMES)}") from None
        return replace(self, noise_density_dbm_per_hz=density)

    def efficiency(self, cqi: int) -> float:
        return dict(self.cqi_table)[cqi]


@dataclass(frozen=True)
class Trajectory:
    """Straight drive-past: the vehicle closes on the base station at constant
    speed, passes at ``closest_approach_m`` and then recedes."""

    start_distance_m: float
    closest_approach_m: float
    speed_mps: float = 30 / 3.6
    duration_s: float = 600.0

    def __post_init__(self) -> None:
        if not (self.start_distance_m > 0 and self.closest_approach_m > 0):
            raise ValueError("trajectory distances must be positive")
        if self.start_distance_m < self.closest_approach_m:
            raise ValueError("start_distance_m must be >= closest_approach_m")
        if self.speed_mps < 0:
            raise ValueError("speed_mps must be >= 0")
        if self.duration_s < 0:
            raise ValueError("duration_s must be >= 0")

    @property
    def start_offset_m(self) -> float:
        return math.sqrt(self.start_distance_m**2 - self.closest_approach_m**2)

    @property
    def time_of_closest_approach_s(self) -> float:
        return math.inf if self.speed_mps == 0 else self.start_offset_m / self.speed_mps


def path_loss_db(model: ChannelModel, distance_m: float) -> float:
    if not distance_m > 0:
        raise ValueError(f"distance must be positive, got {distance_m!r}")
    if distance_m <= model.ref_distance_m:
        return model.pathloss_ref_db
    return model.pathloss_ref_db + 10.0 * model.pathloss_exponent * math.log10(distance_m / model.ref_distance_m)


def noise_power_dbm(model: ChannelModel) -> float:
    return model.noise_density_dbm_per_hz + 10.0 * math.log10(model.bandwidth_hz)


def snr_db(model: ChannelModel, tx_power_dbm: float, distance_m: float, shadowing_db: float = 0.0) -> float:
    return tx_power_dbm - path_loss_db(model, distance_m) - shadowing_db - noise_power_dbm(model)


def snr_to_cqi(model: ChannelModel, snr_db: float) -> int:
    """Largest CQI whose efficiency fits under the Shannon bound at ``snr_db - margin``."""
    capacity = math.log2(1.0 + 10.0 ** ((snr_db - model.snr_margin_db) / 10.0))
    cqi = 0
    for index, eff in model.cqi_table:
        if eff <= capacity:
            cqi = index
        else:
            break
    return cqi


def bitrate_bps(model: ChannelModel, cqi: int) -> float:
    if isinstance(cqi, bool) or not isinstance(cqi, (int, np.integer)) or not 0 <= cqi <= 15:
        raise ValueError(f"cqi must be an integer in 0..15, got {cqi!r}")
    if cqi == 0:
        return 0.0
    return model.efficiency(int(cqi)) * model.bandwidth_hz


def distance_at(traj: Trajectory, t_s: float) -> float:
    if not 0 <= t_s <= traj.duration_s:
        raise ValueError(f"t={t_s!r} outside trajectory duration [0, {traj.duration_s}]")
    offset = traj.start_offset_m - traj.speed_mps * t_s
    return math.hypot(traj.closest_approach_m, offset)


def shadowing_db(sigma_db: float, seed: int, *keys: int) -> float:
    """Seeded log-normal shadowing draw in dB; exactly 0 when ``sigma_db`` is 0."""
    if sigma_db == 0:
        return 0.0
    rng = np.random.default_rng([seed, *keys])
    return float(rng.normal(0.0, sigma_db))


@dataclass(frozen=True)
class LinkState:
    distance_m: float
    snr_up_db: float
    snr_down_db: float
    cqi_up: int
    cqi_down: int
    bitrate_up_bps: float
    bitrate_down_bps: float


def link_state(model: ChannelModel, distance_m: float, shadow_db: float = 0.0) -> LinkState:
    """Uplink and downlink snapshot at one position; both directions share the path loss."""
    up = snr_db(model, model.device_tx_power_dbm, distance_m, shadow_db)
    down = snr_db(model, model.server_tx_power_dbm, distance_m, shadow_db)
    cqi_up, cqi_down = snr_to_cqi(model, up), snr_to_cqi(model, down)
    return LinkState(distance_m, up, down, cqi_up, cqi_down, bitrate_bps(model, cqi_up), bitrate_bps(model, cqi_down))


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)
