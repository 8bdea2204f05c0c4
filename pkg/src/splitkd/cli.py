"""Command-line entry point: ``splitkd {run,compare,plan,kd-selftest,catalog}``.

Exit codes: 0 success, 1 usage or config error, 2 a trial had no round that
both reached the server and met the delay budget. ``compare`` applies the
last rule to the proposed method only; the baselines ignore the budget.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import kd_numerics
from .report import SUMMARY_TEXT, TABLE_ROWS, emit_report, fmt_number
from .scenario_io import ConfigError, catalog_list, load_scenario, write_atomic
from .simulator import (METHODS, PROPOSED, REGIME_ORDER, channel_at, compare_methods, plan_for, planning_problem,
                        run_trial)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, regime_default: str | None) -> None:
    p.add_argument("--scenario", type=Path, default=None, help="scenario YAML (default: shipped scenario)")
    p.add_argument("--regime", choices=REGIME_ORDER + ("all",), default=regime_default,
                   help="channel regime (default: the scenario's own)" if regime_default is None else None)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="splitkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="one method under one channel regime")
    _common(run, None)
    run.add_argument("--method", choices=[m.replace("_", "-") for m in METHODS], default="proposed")
    run.add_argument("--out", type=Path, default=None, help="directory for run_rows.csv and run_summary.txt")

    cmp_ = sub.add_parser("compare", help="proposed vs both baselines across regimes")
    _common(cmp_, "all")
    cmp_.add_argument("--out", type=Path, default=None, help="directory for compare_rows.csv and compare_summary.txt")

    plan = sub.add_parser("plan", help="one-shot planner query for a device at a trajectory time")
    _common(plan, None)
    plan.add_argument("--device", type=int, default=0, help="zero-based device index")
    plan.add_argument("--time", type=float, default=0.0, help="seconds along the device trajectory")
    plan.add_argument("--method", choices=[m.replace("_", "-") for m in METHODS], default="proposed")

    kd = sub.add_parser("kd-selftest", help="KL and gradient property checks")
    kd.add_argument("--seed", type=int, default=0)

    sub.add_parser("catalog", help="list the distillation catalog")
    return parser


def _scenario(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    return scenario


def _emit(reports, scenario, out: Path | None, stem: str) -> None:
    summary = emit_report(reports, SUMMARY_TEXT, scenario)
    if out is not None:
        write_atomic(out / f"{stem}_rows.csv", emit_report(reports, TABLE_ROWS, scenario))
        write_atomic(out / f"{stem}_summary.txt", summary)
    sys.stdout.write(summary.decode())


def cmd_run(args) -> int:
    scenario = _scenario(args)
    if args.regime == "all":
        raise ConfigError("run takes a single regime; use compare for all of them")
    if args.regime is not None:
        scenario = scenario.with_regime(args.regime)
    report = run_trial(scenario, args.method)
    _emit(report, scenario, args.out, "run")
    return EXIT_INFEASIBLE if report.infeasible_everywhere else EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args)
    comparison = compare_methods(scenario, args.regime)
    _emit(comparison, scenario, args.out, "compare")
    if any(r.infeasible_everywhere for (method, _), r in comparison.reports.items() if method == PROPOSED):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_plan(args) -> int:
    scenario = _scenario(args)
    if args.regime == "all":
        raise ConfigError("plan takes a single regime")
    if args.regime is not None:
        scenario = scenario.with_regime(args.regime)
    if not 0 <= args.device < len(scenario.devices):
        raise ConfigError(f"--device must be in 0..{len(scenario.devices) - 1}")
    link = channel_at(scenario, args.device, args.time)
    result = plan_for(planning_problem(scenario, args.device, link), args.method)
    print(f"device {args.device} ({scenario.devices[args.device].profile.name}), regime {scenario.regime}, "
          f"t={fmt_number(args.time)} s, distance {fmt_number(link.distance_m)} m")
    print(f"link: CQI up {link.cqi_up} ({fmt_number(link.bitrate_up_bps)} bps), "
          f"down {link.cqi_down} ({fmt_number(link.bitrate_down_bps)} bps)")
    if result.metrics is None:
        print("link outage: no plan can run at this instant")
        return EXIT_INFEASIBLE
    m = result.metrics
    print(f"method {args.method}: cut {m.plan.cut_index}, server frequency {fmt_number(m.plan.gpu_frequency_hz)} Hz, "
          f"{'within' if result.feasible else 'OVER'} budget {fmt_number(scenario.delay_budget_s)} s")
    print(f"round delay {fmt_number(m.delay_s)} s, energy {fmt_number(m.total_energy_j)} J "
          f"(device {fmt_number(m.device_energy_j)}, server {fmt_number(m.server_energy_j)}, "
          f"comm {fmt_number(m.comm_energy_j)}); {result.evaluated_candidates} candidates")
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_kd_selftest(args) -> int:
    results = kd_numerics.selftest(seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_USAGE


def cmd_catalog(args) -> int:
    for e in catalog_list():
        print(f"{e.teacher} ({fmt_number(e.teacher_size_gb)} GB) --{e.distillation_type}--> {e.student} "
              f"({fmt_number(e.student_size_gb)} GB): {e.compression_rate}x, {e.performance_note}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "plan": cmd_plan, "kd-selftest": cmd_kd_selftest,
            "catalog": cmd_catalog}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"splitkd: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
