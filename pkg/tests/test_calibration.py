import json
import math

import pytest

from config.experiment_config import ENV_KEYS, config_from_mapping
from config.settings import CALIBRATION_CACHE_FILE
from core.calibration import (
    cache_key,
    calibrate,
    ensure_calibration,
    load_cached_calibration,
    soundness_sweep,
    store_calibration,
)
from core.error_handler import ConfigurationError
from core.mif_engine import Calibration

SMALL_SIZES = {
    "calibration.speed_n": "200",
    "calibration.speed_trials": "40",
    "calibration.tail_n": "200",
    "calibration.tail_trials": "200",
    "calibration.soundness_samples": "40",
}


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_KEYS.values():
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def small_config(tmp_path):
    return config_from_mapping({"seed": "11", "output_dir": str(tmp_path), **SMALL_SIZES})


def test_cache_key(small_config):
    assert cache_key(small_config) == "F_2|a:1/4, A:1/4, b:1/4, B:1/4|11"


def test_fixed_constants_skip_the_pipeline(small_config):
    config = small_config.with_overrides(calibration=(0.4, 1.5))
    calibration = ensure_calibration(config)
    assert calibration.lambda_hat == 0.4
    assert calibration.c1_hat == 1.5
    assert load_cached_calibration(config) is None


def test_cache_round_trip(small_config, tmp_path):
    stored = Calibration(lambda_hat=0.41, c1_hat=1.75, c_delta=1.0, master_seed=11,
                         measure="uniform", backend="F_2", diagnostics={"lambda_mean": 0.5})
    path = store_calibration(small_config, stored)
    assert path == str(tmp_path / CALIBRATION_CACHE_FILE)
    assert load_cached_calibration(small_config) == stored
    assert load_cached_calibration(small_config.with_overrides(master_seed=12)) is None
    assert ensure_calibration(small_config) == stored


def test_stale_cache_is_ignored(small_config, tmp_path):
    (tmp_path / CALIBRATION_CACHE_FILE).write_text(json.dumps({"version": -1, "entries": {}}))
    assert load_cached_calibration(small_config) is None


def test_corrupt_cache_is_ignored(small_config, tmp_path):
    (tmp_path / CALIBRATION_CACHE_FILE).write_text("{not json")
    assert load_cached_calibration(small_config) is None


def test_soundness_sweep_finds_no_counterexamples(small_config):
    sweep = soundness_sweep(small_config, c_delta=1.0, samples=100)
    assert sweep["samples"] == 100
    assert sweep["counterexamples"] == 0


@pytest.mark.slow
def test_soundness_sweep_at_desk_scale(small_config):
    sweep = soundness_sweep(small_config, c_delta=1.0, samples=1000)
    assert sweep["certified"] > 0
    assert sweep["counterexamples"] == 0


def test_inadmissible_measure_is_refused(tmp_path):
    config = config_from_mapping({"measure": "a:1/2, b:1/2", "output_dir": str(tmp_path), **SMALL_SIZES})
    with pytest.raises(ConfigurationError):
        calibrate(config)


def test_small_calibration_is_cached(small_config):
    calibration = ensure_calibration(small_config)
    assert 0.2 < calibration.lambda_hat < 0.6
    assert 1.0 <= calibration.c1_hat < math.inf
    assert calibration.diagnostics["soundness_counterexamples"] == 0
    cached = load_cached_calibration(small_config)
    assert (cached.lambda_hat, cached.c1_hat) == (calibration.lambda_hat, calibration.c1_hat)
    assert ensure_calibration(small_config).lambda_hat == calibration.lambda_hat


def test_calibration_is_reproducible(small_config):
    first = calibrate(small_config)
    second = calibrate(small_config)
    assert first.lambda_hat == second.lambda_hat
    assert first.c1_hat == second.c1_hat
