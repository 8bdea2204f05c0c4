"""Trial execution: devices served one at a time, each for a block of rounds.

Each vehicle's trajectory clock starts when the server begins serving it and
advances by the delay of every round it trains, so the channel is re-sampled
at the start of each round from the vehicle's position at that moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .channel import ChannelModel, LinkState, Trajectory, distance_at, link_state, shadowing_db
from .cost_model import DeviceProfile, RoundMetrics, ServerProfile
from .model_profile import ModelProfile
from .planner import (BASELINES, DEVICE_ONLY, POLICIES, ROUND_ROBIN, SERVER_ONLY, PlanningProblem, PlanResult,
                      baseline, optimize, select_next_device)

PROPOSED = "proposed"
METHODS = (PROPOSED, SERVER_ONLY, DEVICE_ONLY)
REGIME_ORDER = ("good", "normal", "poor")


@dataclass(frozen=True)
class DeviceSetup:
    profile: DeviceProfile
    trajectory: Trajectory
    local_epochs: int = 1

    def __post_init__(self) -> None:
        if self.local_epochs <= 0:
            raise ValueError(f"{self.profile.name}: local_epochs must be positive")


@dataclass(frozen=True)
class Scenario:
    devices: tuple[DeviceSetup, ...]
    server: ServerProfile
    regime: str
    channel: ChannelModel
    student: ModelProfile
    teacher: ModelProfile
    rounds_per_device: int = 1
    batches_per_epoch: int = 1
    batch_size: int = 1
    delay_budget_s: float = math.inf
    scheduling: str = ROUND_ROBIN
    seed: int = 0
    compression_ratio: float = 1.0
    precision_bytes: int = 2
    include_server_static_energy: bool = True
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(self, "devices", tuple(self.devices))
        if not self.devices:
            raise ValueError("scenario needs at least one device")
        if self.rounds_per_device < 0:
            raise ValueError("rounds_per_device must be >= 0")
        if self.batches_per_epoch <= 0 or self.batch_size <= 0:
            raise ValueError("batches_per_epoch and batch_size must be positive")
        if not self.delay_budget_s > 0:
            raise ValueError("delay_budget_s must be > 0")
        if self.scheduling not in POLICIES:
            raise ValueError(f"unknown scheduling policy {self.scheduling!r}")
        if not 0 < self.compression_ratio <= 1:
            raise ValueError("compression_ratio must be in (0, 1]")

    def with_regime(self, regime: str) -> "Scenario":
        return replace(self, regime=regime, channel=self.channel.with_regime(regime))

    @property
    def cost_server(self) -> ServerProfile:
        return self.server if self.include_server_static_energy else self.server.without_static_energy()


@dataclass(frozen=True)
class RoundRecord:
    method: str
    regime: str
    device_index: int
    device_name: str
    round_index: int
    t_start_s: float
    link: LinkState
    result: PlanResult

    @property
    def metrics(self) -> RoundMetrics | None:
        return self.result.metrics

    @property
    def outage(self) -> bool:
        return self.result.metrics is None

    @property
    def within_budget(self) -> bool:
        return self.result.feasible

    @property
    def delay_s(self) -> float:
        return 0.0 if self.metrics is None else self.metrics.delay_s


@dataclass(frozen=True)
class TrialReport:
    method: str
    regime: str
    rounds: tuple[RoundRecord, ...] = field(default_factory=tuple)

    @property
    def completed(self) -> tuple[RoundRecord, ...]:
        """Rounds that ran; link-outage rounds carry no numbers and are left out of every mean."""
        return tuple(r for r in self.rounds if r.metrics is not None)

    @property
    def n_outage(self) -> int:
        return len(self.rounds) - len(self.completed)

    @property
    def n_over_budget(self) -> int:
        return sum(1 for r in self.completed if not r.within_budget)

    @property
    def wall_clock_s(self) -> float:
        return math.fsum(r.delay_s for r in self.rounds)

    def _mean(self, attr: str) -> float:
        done = self.completed
        if not done:
            return math.nan
        return math.fsum(getattr(r.metrics, attr) for r in done) / len(done)

    @property
    def mean_delay_s(self) -> float:
        return self._mean("delay_s")

    @property
    def mean_energy_j(self) -> float:
        return self._mean("total_energy_j")

    @property
    def mean_device_energy_j(self) -> float:
        return self._mean("device_energy_j")

    @property
    def mean_server_energy_j(self) -> float:
        return self._mean("server_energy_j")

    @property
    def mean_comm_energy_j(self) -> float:
        return self._mean("comm_energy_j")

    @property
    def infeasible_everywhere(self) -> bool:
        return bool(self.rounds) and not any(r.metrics is not None and r.within_budget for r in self.rounds)


def _check_method(mode: str) -> str:
    mode = mode.replace("-", "_")
    if mode not in METHODS:
        raise ValueError(f"unknown method {mode!r}; expected one of {METHODS}")
    return mode


def channel_at(scenario: Scenario, device_index: int, t_s: float, round_index: int = 0) -> LinkState:
    setup = scenario.devices[device_index]
    shadow = shadowing_db(scenario.channel.shadowing_sigma_db, scenario.seed, device_index, round_index)
    return link_state(scenario.channel, distance_at(setup.trajectory, t_s), shadow)


def planning_problem(scenario: Scenario, device_index: int, link: LinkState) -> PlanningProblem:
    setup = scenario.devices[device_index]
    return PlanningProblem(
        device=setup.profile,
        server=scenario.cost_server,
        student=scenario.student,
        teacher=scenario.teacher,
        bitrate_up=link.bitrate_up_bps,
        bitrate_down=link.bitrate_down_bps,
        delay_budget_s=scenario.delay_budget_s,
        local_epochs=setup.local_epochs,
        batches_per_epoch=scenario.batches_per_epoch,
        batch_size=scenario.batch_size,
        compression_ratio=scenario.compression_ratio,
        precision_bytes=scenario.precision_bytes,
    )


def plan_for(problem: PlanningProblem, mode: str) -> PlanResult:
    mode = _check_method(mode)
    return optimize(problem) if mode == PROPOSED else baseline(problem, mode)


def run_round(scenario: Scenario, device_index: int, t_start: float, mode: str = PROPOSED,
              round_index: int = 0) -> RoundRecord:
    mode = _check_method(mode)
    link = channel_at(scenario, device_index, t_start, round_index)
    result = plan_for(planning_problem(scenario, device_index, link), mode)
    return RoundRecord(mode, scenario.regime, device_index, scenario.devices[device_index].profile.name,
                       round_index, t_start, link, result)


def service_order(scenario: Scenario) -> list[int]:
    """Order in which devices are served; channel ranking uses each vehicle's position at its own t=0."""
    rates = [channel_at(scenario, i, 0.0).bitrate_up_bps for i in range(len(scenario.devices))]
    served: list[int] = []
    while len(served) < len(rates):
        served.append(select_next_device(rates, served, scenario.scheduling))
    return served


def run_trial(scenario: Scenario, mode: str = PROPOSED) -> TrialReport:
    mode = _check_method(mode)
    rounds = []
    for device_index in service_order(scenario):
        t = 0.0
        for k in range(scenario.rounds_per_device):
            record = run_round(scenario, device_index, t, mode, k)
            rounds.append(record)
            t += record.delay_s
    return TrialReport(mode, scenario.regime, tuple(rounds))


@dataclass(frozen=True)
class Comparison:
    reports: dict[tuple[str, str], TrialReport]
    regimes: tuple[str, ...]

    def report(self, method: str, regime: str) -> TrialReport:
        return self.reports[(_check_method(method), regime)]

    def reduction(self, regime: str, baseline_method: str, metric: str = "energy") -> float:
        """``(baseline - proposed) / baseline`` for the mean round delay or energy."""
        attr = {"energy": "mean_energy_j", "delay": "mean_delay_s"}[metric]
        base = getattr(self.report(baseline_method, regime), attr)
        prop = getattr(self.report(PROPOSED, regime), attr)
        return (base - prop) / base


def resolve_regimes(regimes: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(regimes, str):
        regimes = REGIME_ORDER if regimes == "all" else (regimes,)
    out = tuple(regimes)
    for r in out:
        if r not in REGIME_ORDER:
            raise ValueError(f"unknown regime {r!r}")
    return out


def compare_methods(scenario: Scenario, regimes: str | Sequence[str] = "all",
                    methods: Sequence[str] = METHODS) -> Comparison:
    regimes = resolve_regimes(regimes)
    reports = {}
    for regime in regimes:
        sc = scenario.with_regime(regime)
        for method in methods:
            reports[(_check_method(method), regime)] = run_trial(sc, method)
    return Comparison(reports, regimes)


__all__ = [
    "BASELINES", "Comparison", "DeviceSetup", "METHODS", "PROPOSED", "REGIME_ORDER", "RoundRecord", "Scenario",
    "TrialReport", "channel_at", "compare_methods", "plan_for", "planning_problem", "run_round", "run_trial",
    "service_order",
]
