"""MTBS under measurement noise at a -60 dBm floor."""

import pytest

from riswpt.measurement import watts_to_dbm
from riswpt.scenario import load_scenario, run_mtbs

FLOOR_W = 1e-9  # -60 dBm


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_nominal_power_unaffected(seed):
    cfg = load_scenario("paper_exp_obstacle")
    clean = run_mtbs(cfg).final.sensor_w
    noisy = run_mtbs(cfg.with_updates(noise_std_w=FLOOR_W, seed=seed)).final.sensor_w
    assert abs(watts_to_dbm(noisy) - watts_to_dbm(clean)) < 0.5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_low_power_degrades_gracefully(seed):
    # RIS-OFF sensor reading close to the noise floor
    cfg = load_scenario("paper_exp_obstacle").with_updates(wide_beam_power_w=1e-3,
                                                           array_element_power_w=1e-6)
    clean = run_mtbs(cfg)
    assert watts_to_dbm(clean.checkpoint(1, "tiles").baseline_sensor_w) < -50
    noisy = run_mtbs(cfg.with_updates(noise_std_w=FLOOR_W, seed=seed))
    assert abs(watts_to_dbm(noisy.final.sensor_w) - watts_to_dbm(clean.final.sensor_w)) < 1.0


def test_power_quantization_tolerated():
    cfg = load_scenario("paper_exp_obstacle")
    clean = run_mtbs(cfg).final.sensor_w
    coarse = run_mtbs(cfg.with_updates(power_quant_db=0.1)).final.sensor_w
    assert abs(watts_to_dbm(coarse) - watts_to_dbm(clean)) < 1.0
