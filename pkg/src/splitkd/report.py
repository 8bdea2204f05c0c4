"""Deterministic report serialization: per-round CSV rows and a fixed-width summary table."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable

from .cost_model import PHASES
from .scenario_io import SCHEMA_VERSION, dump_scenario
from .simulator import METHODS, PROPOSED, REGIME_ORDER, Comparison, Scenario, TrialReport

TABLE_ROWS = "table_rows"
SUMMARY_TEXT = "summary_text"
FORMATS = (TABLE_ROWS, SUMMARY_TEXT)

ROW_COLUMNS = (
    ["method", "regime", "device", "device_name", "round", "t_start_s", "status", "within_budget", "distance_m",
     "cqi_up", "cqi_down", "bitrate_up_bps", "bitrate_down_bps", "cut_index", "gpu_frequency_hz", "candidates",
     "delay_s", "device_energy_j", "server_energy_j", "comm_energy_j", "total_energy_j"]
    + [f"delay_{p.value}_s" for p in PHASES]
    + [f"energy_{p.value}_j" for p in PHASES]
)

SUMMARY_COLUMNS = ("regime", "method", "rounds", "outage", "over_budget", "mean_delay_s", "mean_energy_j",
                   "mean_device_energy_j", "mean_server_energy_j", "mean_comm_energy_j",
                   "delay_red_vs_server_only", "energy_red_vs_server_only",
                   "delay_red_vs_device_only", "energy_red_vs_device_only")


def fmt_number(x: float | None) -> str:
    """Nine significant digits; '-' for values that do not exist."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    return f"{x:.9g}"


def _ordered(reports: Iterable[TrialReport]) -> list[TrialReport]:
    def key(r: TrialReport):
        regime = REGIME_ORDER.index(r.regime) if r.regime in REGIME_ORDER else len(REGIME_ORDER)
        return (regime, r.regime, METHODS.index(r.method))
    return sorted(reports, key=key)


def _header(format: str, scenario: Scenario | None) -> list[str]:
    lines = ["# splitkd report", f"# schema_version: {SCHEMA_VERSION}", f"# format: {format}"]
    if scenario is not None:
        lines.append("# scenario (resolved):")
        lines += [f"#   {line}" for line in dump_scenario(scenario).splitlines()]
    lines.append("# means exclude link-outage rounds; over-budget rounds are included and counted")
    return lines


def _row(record) -> list[str]:
    m = record.metrics
    link = record.link
    row = [record.method, record.regime, str(record.device_index), record.device_name, str(record.round_index),
           fmt_number(record.t_start_s), "outage" if m is None else "ok", str(record.within_budget).lower(),
           fmt_number(link.distance_m), str(link.cqi_up), str(link.cqi_down), fmt_number(link.bitrate_up_bps),
           fmt_number(link.bitrate_down_bps)]
    if m is None:
        return row + [""] * (len(ROW_COLUMNS) - len(row))
    row += [str(m.plan.cut_index), fmt_number(m.plan.gpu_frequency_hz), str(record.result.evaluated_candidates),
            fmt_number(m.delay_s), fmt_number(m.device_energy_j), fmt_number(m.server_energy_j),
            fmt_number(m.comm_energy_j), fmt_number(m.total_energy_j)]
    row += [fmt_number(p.delay_s) for p in m.phases]
    row += [fmt_number(p.energy_j) for p in m.phases]
    return row


def _reduction(base: float, prop: float) -> float:
    if math.isnan(base) or math.isnan(prop) or base == 0:
        return math.nan
    return (base - prop) / base


def summary_rows(reports: list[TrialReport]) -> list[list[str]]:
    by_key = {(r.method, r.regime): r for r in reports}
    rows = []
    for r in _ordered(reports):
        reds = []
        for base_method in ("server_only", "device_only"):
            base = by_key.get((base_method, r.regime))
            if r.method != PROPOSED or base is None:
                reds += [math.nan, math.nan]
            else:
                reds += [_reduction(base.mean_delay_s, r.mean_delay_s), _reduction(base.mean_energy_j, r.mean_energy_j)]
        rows.append([r.regime, r.method, str(len(r.rounds)), str(r.n_outage), str(r.n_over_budget),
                     fmt_number(r.mean_delay_s), fmt_number(r.mean_energy_j), fmt_number(r.mean_device_energy_j),
                     fmt_number(r.mean_server_energy_j), fmt_number(r.mean_comm_energy_j)]
                    + [fmt_number(x) for x in reds])
    return rows


def emit_report(reports: Comparison | TrialReport | Iterable[TrialReport], format: str = TABLE_ROWS,
                scenario: Scenario | None = None) -> bytes:
    if isinstance(reports, Comparison):
        reports = list(reports.reports.values())
    elif isinstance(reports, TrialReport):
        reports = [reports]
    else:
        reports = list(reports)
    lines = _header(format, scenario)

    if format == TABLE_ROWS:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_COLUMNS)
        for report in _ordered(reports):
            for record in report.rounds:
                writer.writerow(_row(record))
        return ("\n".join(lines) + "\n" + buf.getvalue()).encode()

    if format == SUMMARY_TEXT:
        table = [list(SUMMARY_COLUMNS)] + summary_rows(reports)
        widths = [max(len(row[i]) for row in table) for i in range(len(SUMMARY_COLUMNS))]
        body = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
        return ("\n".join(lines + body) + "\n").encode()

    raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")
