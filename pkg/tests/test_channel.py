import math
from dataclasses import replace

import numpy as np
import pytest

from splitkd.channel import (
    REGIMES,
    ChannelModel,
    Trajectory,
    bitrate_bps,
    default_cqi_table,
    distance_at,
    link_state,
    load_cqi_table,
    path_loss_db,
    shadowing_db,
    snr_db,
    snr_to_cqi,
)

# TS 38.214 Table 5.2.2.1-2, transcribed independently of the shipped data file
TS38214_CQI1 = [0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223,
                3.9023, 4.5234, 5.1152, 5.5547]


@pytest.fixture
def model():
    return ChannelModel(noise_density_dbm_per_hz=-166.0, bandwidth_hz=100e6, device_tx_power_dbm=23.0,
                        server_tx_power_dbm=30.0, pathloss_ref_db=60.0, pathloss_exponent=2.0,
                        ref_distance_m=1.0, cqi_table=default_cqi_table())


def test_table_matches_standard():
    entries = load_cqi_table()
    assert [e.spectral_efficiency for e in entries] == TS38214_CQI1
    assert [e.modulation for e in entries][6] == "16QAM"
    assert [e.modulation for e in entries][-1] == "64QAM"
    for e in entries:
        bits = {"QPSK": 2, "16QAM": 4, "64QAM": 6}[e.modulation]
        assert e.spectral_efficiency == pytest.approx(bits * e.code_rate / 1024, abs=1e-4)


def test_path_loss_identity(model):
    assert path_loss_db(model, model.ref_distance_m) == model.pathloss_ref_db


def test_path_loss_decade(model):
    assert path_loss_db(model, 10.0) == pytest.approx(80.0, abs=1e-12)


def test_path_loss_derived(model):
    m = replace(model, pathloss_exponent=2.9, pathloss_ref_db=61.34)
    assert path_loss_db(m, 100.0) == pytest.approx(119.34, abs=1e-9)


def test_path_loss_clamps_below_reference(model):
    m = replace(model, ref_distance_m=5.0)
    assert path_loss_db(m, 0.5) == m.pathloss_ref_db


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_loss_rejects_nonpositive(model, d):
    with pytest.raises(ValueError):
        path_loss_db(model, d)


def test_snr_regime_gap(model):
    good = snr_db(model.with_regime("good"), 23.0, 50.0)
    poor = snr_db(model.with_regime("poor"), 23.0, 50.0)
    assert good - poor == pytest.approx(6.0, abs=1e-12)


def test_snr_derived(model):
    m = replace(model, pathloss_ref_db=100.0)  # PL = 100 dB at the 1 m reference
    assert snr_db(m, 23.0, 1.0) == pytest.approx(9.0, abs=1e-12)


def test_snr_bandwidth_times_ten(model):
    wide = replace(model, bandwidth_hz=1e9)
    assert snr_db(model, 23, 30) - snr_db(wide, 23, 30) == pytest.approx(10.0, abs=1e-12)


def test_cqi_edges(model):
    assert snr_to_cqi(model, -30.0) == 0
    assert snr_to_cqi(model, 60.0) == 15


def test_cqi_at_3db(model):
    capacity = math.log2(1 + 10 ** 0.3)
    expected = max(i for i, e in enumerate(TS38214_CQI1, start=1) if e <= capacity)
    assert expected == 7
    assert snr_to_cqi(model, 3.0) == expected


def test_cqi_margin(model):
    m = replace(model, snr_margin_db=3.0)
    assert snr_to_cqi(m, 6.0) == snr_to_cqi(model, 3.0)


def test_cqi_monotone_dense_sweep(model):
    cqis = [snr_to_cqi(model, s) for s in np.linspace(-40, 60, 5001)]
    assert all(b >= a for a, b in zip(cqis, cqis[1:]))
    assert cqis[0] == 0 and cqis[-1] == 15


def test_bitrate(model):
    assert bitrate_bps(model, 0) == 0.0
    assert bitrate_bps(model, 15) == pytest.approx(5.5547 * 1e8)
    rates = [bitrate_bps(model, c) for c in range(16)]
    assert all(b >= a for a, b in zip(rates, rates[1:]))


@pytest.mark.parametrize("cqi", [-1, 16])
def test_bitrate_out_of_range(model, cqi):
    with pytest.raises(ValueError):
        bitrate_bps(model, cqi)


def test_regime_bitrate_ordering(model):
    for d in np.linspace(1, 2000, 400):
        rates = [link_state(model.with_regime(r), float(d)).bitrate_up_bps for r in ("good", "normal", "poor")]
        assert rates[0] >= rates[1] >= rates[2]


def test_pipeline_deterministic(model):
    assert link_state(model, 123.4) == link_state(model, 123.4)


def test_regime_presets():
    assert REGIMES == {"good": -166.0, "normal": -163.0, "poor": -160.0}


def test_invariants_enforced(model):
    with pytest.raises(ValueError):
        replace(model, pathloss_exponent=1.5)
    with pytest.raises(ValueError):
        replace(model, bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        replace(model, cqi_table=default_cqi_table()[:14])
    with pytest.raises(ValueError):
        model.with_regime("stormy")


class TestTrajectory:
    traj = Trajectory(start_distance_m=200.0, closest_approach_m=20.0, speed_mps=30 / 3.6, duration_s=60.0)

    def test_start(self):
        assert distance_at(self.traj, 0.0) == pytest.approx(200.0, rel=1e-15)

    def test_closest_approach(self):
        assert distance_at(self.traj, self.traj.time_of_closest_approach_s) == pytest.approx(20.0, rel=1e-12)

    def test_mid(self):
        # vehicle at (sqrt(200^2-20^2) - v t, 20) relative to the base station
        assert distance_at(self.traj, 12.0) == pytest.approx(100.9975371765827, rel=1e-12)

    def test_symmetric_after_passing(self):
        t0 = self.traj.time_of_closest_approach_s
        assert distance_at(self.traj, t0 + 3) == pytest.approx(distance_at(self.traj, t0 - 3), rel=1e-12)

    @pytest.mark.parametrize("t", [-0.1, 60.1])
    def test_out_of_range(self, t):
        with pytest.raises(ValueError):
            distance_at(self.traj, t)

    def test_default_speed_is_30_kmh(self):
        assert Trajectory(100.0, 10.0).speed_mps == pytest.approx(8.3333333, rel=1e-6)


def test_shadowing_seeded():
    assert shadowing_db(0.0, 1, 2, 3) == 0.0
    assert shadowing_db(4.0, 1, 2, 3) == shadowing_db(4.0, 1, 2, 3)
    assert shadowing_db(4.0, 1, 2, 3) != shadowing_db(4.0, 1, 2, 4)
