import csv
import io

import pytest

from splitkd.report import ROW_COLUMNS, SUMMARY_COLUMNS, SUMMARY_TEXT, TABLE_ROWS, emit_report, fmt_number
from splitkd.simulator import compare_methods


@pytest.fixture(scope="module")
def comparison(default_scenario):
    return compare_methods(default_scenario)


def _body(data: bytes) -> list[str]:
    return [l for l in data.decode().splitlines() if not l.startswith("#")]


def test_fmt_number():
    assert fmt_number(float("nan")) == "-"
    assert fmt_number(None) == "-"
    assert fmt_number(1.0) == "1"
    assert fmt_number(1 / 3) == "0.333333333"


def test_empty_report_is_header_only():
    rows = emit_report([], TABLE_ROWS)
    assert _body(rows) == [",".join(ROW_COLUMNS)]
    assert _body(emit_report([], SUMMARY_TEXT))[0].split() == list(SUMMARY_COLUMNS)


def test_byte_identical(default_scenario, comparison):
    again = compare_methods(default_scenario)
    for fmt in (TABLE_ROWS, SUMMARY_TEXT):
        assert emit_report(comparison, fmt, default_scenario) == emit_report(again, fmt, default_scenario)


def test_rows_csv(comparison):
    rows = list(csv.DictReader(io.StringIO("\n".join(_body(emit_report(comparison, TABLE_ROWS))))))
    assert len(rows) == 3 * 3 * 20
    assert {r["method"] for r in rows} == {"proposed", "server_only", "device_only"}
    ok = [r for r in rows if r["status"] == "ok"]
    for r in ok:
        phases = sum(float(r[f"energy_{p}_j"]) for p in ("device_forward", "uplink_smashed",
                     "server_forward_backward", "downlink_gradients", "device_backward", "uplink_params"))
        assert phases == pytest.approx(float(r["total_energy_j"]), rel=1e-6)


def test_summary_parses(default_scenario, comparison):
    # independent parser: whitespace split, numbers via float()
    lines = _body(emit_report(comparison, SUMMARY_TEXT, default_scenario))
    header, rows = lines[0].split(), [l.split() for l in lines[1:]]
    assert header == list(SUMMARY_COLUMNS)
    assert len(rows) == 9
    assert [(r[0], r[1]) for r in rows[:3]] == [("good", m) for m in ("proposed", "server_only", "device_only")]
    for r in rows:
        rec = dict(zip(header, r))
        rep = comparison.report(rec["method"], rec["regime"])
        assert float(rec["mean_energy_j"]) == pytest.approx(rep.mean_energy_j, rel=1e-8)
        if rec["method"] == "proposed":
            red = comparison.reduction(rec["regime"], "server_only", "energy")
            assert float(rec["energy_red_vs_server_only"]) == pytest.approx(red, rel=1e-8)
        else:
            assert rec["energy_red_vs_server_only"] == "-"


def test_header_echoes_scenario(default_scenario, comparison):
    text = emit_report(comparison, SUMMARY_TEXT, default_scenario).decode()
    assert "#   delay_budget_s: 25.0" in text


def test_unknown_format(comparison):
    with pytest.raises(ValueError):
        emit_report(comparison, "xml")
