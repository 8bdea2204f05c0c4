"""Exhaustive (cut layer, server frequency) search under a round-delay budget."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

from .channel import LinkOutage
from .cost_model import DeviceProfile, RoundMetrics, ServerProfile, round_cost
from .model_profile import CutPlan, ModelProfile, split_workload

SERVER_ONLY = "server_only"
DEVICE_ONLY = "device_only"
BASELINES = (SERVER_ONLY, DEVICE_ONLY)

ROUND_ROBIN = "round_robin"
BEST_CHANNEL_FIRST = "best_channel_first"
POLICIES = (ROUND_ROBIN, BEST_CHANNEL_FIRST)


@dataclass(frozen=True)
class PlanningProblem:
    device: DeviceProfile
    server: ServerProfile
    student: ModelProfile
    teacher: ModelProfile
    bitrate_up: float
    bitrate_down: float
    delay_budget_s: float
    local_epochs: int = 1
    batches_per_epoch: int = 1
    batch_size: int = 1
    compression_ratio: float = 1.0
    precision_bytes: int = 2

    def __post_init__(self) -> None:
        if not self.delay_budget_s > 0:
            raise ValueError(f"delay_budget_s must be > 0, got {self.delay_budget_s!r}")
        if self.bitrate_up < 0 or self.bitrate_down < 0:
            raise ValueError("bitrates must be >= 0")
        if self.student.num_blocks < 2:
            raise ValueError("student needs at least two blocks to be split")


@dataclass(frozen=True)
class PlanResult:
    plan: CutPlan
    metrics: RoundMetrics | None
    feasible: bool
    evaluated_candidates: int
    outage: bool = False


def enumerate_candidates(problem: PlanningProblem) -> list[CutPlan]:
    return [CutPlan(c, f) for c in range(1, problem.student.max_cut + 1) for f in problem.server.freq_levels_hz]


def evaluate(problem: PlanningProblem, plan: CutPlan) -> RoundMetrics:
    split = split_workload(problem.student, problem.teacher, plan, problem.batch_size,
                           problem.precision_bytes, problem.compression_ratio)
    return round_cost(split, problem.device, problem.server, plan, problem.bitrate_up, problem.bitrate_down,
                      problem.local_epochs, problem.batches_per_epoch)


def _energy_key(m: RoundMetrics) -> tuple:
    return (m.total_energy_j, m.delay_s, m.plan.cut_index, m.plan.gpu_frequency_hz)


def _delay_key(m: RoundMetrics) -> tuple:
    return (m.delay_s, m.total_energy_j, m.plan.cut_index, m.plan.gpu_frequency_hz)


def optimize(problem: PlanningProblem) -> PlanResult:
    """Minimum-energy candidate within the delay budget.

    Ties go to lower delay, then lower cut, then lower frequency. When nothing
    fits the budget the fastest candidate comes back with ``feasible=False``.
    """
    candidates = enumerate_candidates(problem)
    try:
        evaluated = [evaluate(problem, plan) for plan in candidates]
    except LinkOutage:
        return PlanResult(candidates[0], None, False, len(candidates), outage=True)
    feasible = [m for m in evaluated if m.delay_s <= problem.delay_budget_s]
    if feasible:
        best = min(feasible, key=_energy_key)
        return PlanResult(best.plan, best, True, len(candidates))
    best = min(evaluated, key=_delay_key)
    return PlanResult(best.plan, best, False, len(candidates))


def baseline(problem: PlanningProblem, mode: str) -> PlanResult:
    if mode == SERVER_ONLY:
        cut = 1
    elif mode == DEVICE_ONLY:
        cut = problem.student.max_cut
    else:
        raise ValueError(f"unknown baseline {mode!r}; expected one of {BASELINES}")
    plan = CutPlan(cut, problem.server.max_freq_hz)
    try:
        metrics = evaluate(problem, plan)
    except LinkOutage:
        return PlanResult(plan, None, False, 1, outage=True)
    return PlanResult(plan, metrics, metrics.delay_s <= problem.delay_budget_s, 1)


def select_next_device(uplink_bitrates: Sequence[float], served: Collection[int], policy: str = ROUND_ROBIN) -> int:
    """Index of the next device to serve; ``uplink_bitrates`` is one entry per device."""
    pending = [i for i in range(len(uplink_bitrates)) if i not in served]
    if not uplink_bitrates:
        raise ValueError("no devices")
    if not pending:
        raise LookupError("every device has already been served")
    if policy == ROUND_ROBIN:
        return pending[0]
    if policy == BEST_CHANNEL_FIRST:
        # max() keeps the first maximal element, i.e. the lowest index on ties
        return max(pending, key=lambda i: uplink_bitrates[i])
    raise ValueError(f"unknown scheduling policy {policy!r}; expected one of {POLICIES}")

