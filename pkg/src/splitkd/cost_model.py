"""Per-phase delay and energy for one training round.

Compute energy uses the effective-capacitance DVFS model: a workload of
``cycles`` clock cycles at frequency ``f`` costs ``kappa * cycles * f**2`` of
dynamic energy plus ``static_power * time``. Radio energy is transmit/receive
power times airtime. Phases within a batch run strictly one after another.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .channel import LinkOutage
from .model_profile import CutPlan, WorkloadSplit


class Phase(str, enum.Enum):
    DEVICE_FORWARD = "device_forward"
    UPLINK_SMASHED = "uplink_smashed"
    SERVER_FORWARD_BACKWARD = "server_forward_backward"
    DOWNLINK_GRADIENTS = "downlink_gradients"
    DEVICE_BACKWARD = "device_backward"
    UPLINK_PARAMS = "uplink_params"


PHASES: tuple[Phase, ...] = tuple(Phase)


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    max_gpu_freq_hz: float
    cores: int
    flops_per_cycle_per_core: float = 2.0
    compute_utilization: float = 0.4
    effective_capacitance: float = 1e-26
    static_power_w: float = 5.0
    tx_power_w: float = 1.0
    rx_power_w: float = 0.5

    def __post_init__(self) -> None:
        _check_positive(self, ("max_gpu_freq_hz", "cores", "flops_per_cycle_per_core", "compute_utilization",
                               "effective_capacitance", "static_power_w", "tx_power_w", "rx_power_w"))
        if self.compute_utilization > 1:
            raise ValueError(f"{self.name}: compute_utilization must be <= 1")


@dataclass(frozen=True)
class ServerProfile:
    """Edge server. ``tx_power_w``/``rx_power_w`` are the base-station radio draw
    charged to the server for downlink gradients and uplink receptions."""

    name: str
    freq_levels_hz: tuple[float, ...]
    cores: int
    flops_per_cycle_per_core: float = 2.0
    compute_utilization: float = 0.4
    effective_capacitance: float = 1e-26
    static_power_w: float = 50.0
    tx_power_w: float = 5.0
    rx_power_w: float = 2.0

    def __post_init__(self) -> None:
        levels = tuple(float(f) for f in self.freq_levels_hz)
        object.__setattr__(self, "freq_levels_hz", levels)
        if not levels:
            raise ValueError(f"{self.name}: freq_levels_hz must not be empty")
        if any(f <= 0 for f in levels) or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"{self.name}: freq_levels_hz must be positive and strictly increasing")
        _check_positive(self, ("cores", "flops_per_cycle_per_core", "compute_utilization", "effective_capacitance"))
        for name in ("static_power_w", "tx_power_w", "rx_power_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{self.name}: {name} must be >= 0")
        if self.compute_utilization > 1:
            raise ValueError(f"{self.name}: compute_utilization must be <= 1")

    @property
    def max_freq_hz(self) -> float:
        return self.freq_levels_hz[-1]

    @property
    def min_freq_hz(self) -> float:
        return self.freq_levels_hz[0]

    def without_static_energy(self) -> "ServerProfile":
        return replace(self, static_power_w=0.0)


def _check_positive(obj, names) -> None:
    for name in names:
        value = getattr(obj, name)
        if not value > 0:
            raise ValueError(f"{obj.name}: {name} must be positive, got {value!r}")


def evenly_spaced_levels(max_freq_hz: float, count: int = 8, low_fraction: float = 0.4) -> tuple[float, ...]:
    """``count`` levels from ``low_fraction*max`` to ``max`` inclusive; the top level is exactly ``max``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if count == 1:
        return (float(max_freq_hz),)
    step = (1.0 - low_fraction) / (count - 1)
    levels = [max_freq_hz * (low_fraction + i * step) for i in range(count - 1)]
    return tuple(levels) + (float(max_freq_hz),)


@dataclass(frozen=True)
class PhaseCost:
    phase: Phase
    delay_s: float
    energy_j: float

    def __post_init__(self) -> None:
        if self.delay_s < 0 or self.energy_j < 0:
            raise ValueError(f"{self.phase.value}: delay and energy must be >= 0")


@dataclass(frozen=True)
class RoundMetrics:
    plan: CutPlan
    delay_s: float
    device_energy_j: float
    server_energy_j: float
    comm_energy_j: float
    total_energy_j: float
    phases: tuple[PhaseCost, ...]

    def phase(self, phase: Phase) -> PhaseCost:
        for p in self.phases:
            if p.phase is phase:
                return p
        raise KeyError(phase)


def compute_time_s(flops: float, freq_hz: float, cores: int, flops_per_cycle_per_core: float,
                   utilization: float) -> float:
    if flops < 0:
        raise ValueError("flops must be >= 0")
    if not (freq_hz > 0 and cores > 0 and flops_per_cycle_per_core > 0 and utilization > 0):
        raise ValueError("frequency, cores, flops/cycle/core and utilization must all be positive")
    return flops / (freq_hz * cores * flops_per_cycle_per_core * utilization)


def compute_energy_j(flops: float, freq_hz: float, cores: int, flops_per_cycle_per_core: float,
                     utilization: float, effective_capacitance: float, static_power_w: float) -> float:
    if effective_capacitance < 0 or static_power_w < 0:
        raise ValueError("effective_capacitance and static_power_w must be >= 0")
    time = compute_time_s(flops, freq_hz, cores, flops_per_cycle_per_core, utilization)
    cycles = flops / (cores * flops_per_cycle_per_core * utilization)
    return effective_capacitance * cycles * freq_hz**2 + static_power_w * time


def comm_cost(nbytes: int, bitrate_bps: float, tx_power_w: float, rx_power_w: float,
              phase: Phase = Phase.UPLINK_SMASHED) -> tuple[PhaseCost, PhaseCost]:
    """(sender, receiver) costs for moving ``nbytes`` over one link; both share the airtime."""
    if nbytes < 0:
        raise ValueError("nbytes must be >= 0")
    if nbytes == 0:
        return PhaseCost(phase, 0.0, 0.0), PhaseCost(phase, 0.0, 0.0)
    if not bitrate_bps > 0:
        raise LinkOutage(f"{phase.value}: {nbytes} bytes over a zero-rate link")
    delay = 8.0 * nbytes / bitrate_bps
    return PhaseCost(phase, delay, tx_power_w * delay), PhaseCost(phase, delay, rx_power_w * delay)


def round_cost(
    split: WorkloadSplit,
    device: DeviceProfile,
    server: ServerProfile,
    plan: CutPlan,
    bitrate_up: float,
    bitrate_down: float,
    local_epochs: int = 1,
    batches_per_epoch: int = 1,
) -> RoundMetrics:
    """Delay and energy of one round: ``local_epochs * batches_per_epoch`` batches
    followed by a single device-to-server parameter upload.

    Device radio energy is reported as ``comm_energy_j``; server radio energy is
    folded into ``server_energy_j``. Raises :class:`LinkOutage` if any payload
    meets a zero-rate link.
    """
    if local_epochs <= 0 or batches_per_epoch <= 0:
        raise ValueError("local_epochs and batches_per_epoch must be positive")
    f_srv = plan.gpu_frequency_hz
    if not server.min_freq_hz <= f_srv <= server.max_freq_hz:
        raise ValueError(f"gpu_frequency_hz {f_srv:g} outside server range")
    n = local_epochs * batches_per_epoch

    dev = (device.max_gpu_freq_hz, device.cores, device.flops_per_cycle_per_core, device.compute_utilization)
    dev_e = dev + (device.effective_capacitance, device.static_power_w)
    srv = (f_srv, server.cores, server.flops_per_cycle_per_core, server.compute_utilization)
    srv_e = srv + (server.effective_capacitance, server.static_power_w)

    fwd_t = compute_time_s(split.device_forward_flops, *dev)
    fwd_e = compute_energy_j(split.device_forward_flops, *dev_e)
    up_dev, up_srv = comm_cost(split.smashed_bytes_up, bitrate_up, device.tx_power_w, server.rx_power_w,
                               Phase.UPLINK_SMASHED)
    srv_t = compute_time_s(split.server_flops, *srv)
    srv_en = compute_energy_j(split.server_flops, *srv_e)
    down_srv, down_dev = comm_cost(split.gradient_bytes_down, bitrate_down, server.tx_power_w, device.rx_power_w,
                                   Phase.DOWNLINK_GRADIENTS)
    bwd_t = compute_time_s(split.device_backward_flops, *dev)
    bwd_e = compute_energy_j(split.device_backward_flops, *dev_e)
    par_dev, par_srv = comm_cost(split.device_param_bytes_up, bitrate_up, device.tx_power_w, server.rx_power_w,
                                 Phase.UPLINK_PARAMS)

    batch_delay = fwd_t + up_dev.delay_s + srv_t + down_dev.delay_s + bwd_t
    delay = batch_delay * n + par_dev.delay_s

    device_energy = (fwd_e + bwd_e) * n
    server_energy = (srv_en + up_srv.energy_j + down_srv.energy_j) * n + par_srv.energy_j
    comm_energy = (up_dev.energy_j + down_dev.energy_j) * n + par_dev.energy_j

    phases = (
        PhaseCost(Phase.DEVICE_FORWARD, fwd_t * n, fwd_e * n),
        PhaseCost(Phase.UPLINK_SMASHED, up_dev.delay_s * n, (up_dev.energy_j + up_srv.energy_j) * n),
        PhaseCost(Phase.SERVER_FORWARD_BACKWARD, srv_t * n, srv_en * n),
        PhaseCost(Phase.DOWNLINK_GRADIENTS, down_dev.delay_s * n, (down_dev.energy_j + down_srv.energy_j) * n),
        PhaseCost(Phase.DEVICE_BACKWARD, bwd_t * n, bwd_e * n),
        PhaseCost(Phase.UPLINK_PARAMS, par_dev.delay_s, par_dev.energy_j + par_srv.energy_j),
    )
    return RoundMetrics(
        plan=plan,
        delay_s=delay,
        device_energy_j=device_energy,
        server_energy_j=server_energy,
        comm_energy_j=comm_energy,
        total_energy_j=device_energy + server_energy + comm_energy,
        phases=phases,
    )
