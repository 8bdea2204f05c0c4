"""Split knowledge distillation at the edge: delay/energy simulation and cut-layer planning."""

from .channel import REGIMES, ChannelModel, LinkOutage, Trajectory
from .cost_model import DeviceProfile, Phase, PhaseCost, RoundMetrics, ServerProfile, round_cost
from .kd_numerics import KdLossConfig, kd_loss, kd_loss_grad, kl_div, softmax_t
from .model_profile import CutPlan, LayerProfile, ModelProfile, WorkloadSplit, build_transformer_profile, split_workload
from .planner import PlanningProblem, PlanResult, baseline, enumerate_candidates, optimize, select_next_device
from .scenario_io import ConfigError, catalog_list, load_scenario
from .simulator import Scenario, TrialReport, compare_methods, run_round, run_trial

__version__ = "0.1.0"
