"""
Calibration: estimate lambda_hat and C1_hat by Monte Carlo, check C_delta
against direct evaluation, and cache the result per (backend, measure, seed).
"""
import json
import os
import tempfile
from dataclasses import replace
from typing import Dict, Optional

from config.experiment_config import ExperimentConfig
from config.settings import (
    CALIBRATION_CACHE_FILE,
    CALIBRATION_CACHE_VERSION,
    CALIBRATION_PROBE,
    SPEED_QUANTILE,
)
from core.error_handler import ConfigurationError, get_logger, safe_operation
from core.group_core import enumerate_ball, identity, parse_element
from core.mif_engine import Calibration, certify_single
from core.mixed_words import evaluate, mixed_power, sample_w_n
from core.random_walk import derive_rng, estimate_speed, estimate_tail, format_measure, walk_endpoint

logger = get_logger(__name__)

SOUNDNESS_POWERS = 8


# ============================================================
#                   CACHE
# ============================================================

def cache_key(config: ExperimentConfig) -> str:
    return f"{config.backend.describe()}|{format_measure(config.measure)}|{config.master_seed}"


def _cache_path(config: ExperimentConfig) -> str:
    return os.path.join(config.output_dir, CALIBRATION_CACHE_FILE)


def _read_cache(path: str) -> Dict:
    with open(path, "r", encoding="utf-8") as handle:
        cache = json.load(handle)
    if cache.get("version") != CALIBRATION_CACHE_VERSION:
        logger.info(f"Ignoring calibration cache {path} with version {cache.get('version')}")
        return {"version": CALIBRATION_CACHE_VERSION, "entries": {}}
    return cache


def load_cached_calibration(config: ExperimentConfig) -> Optional[Calibration]:
    """Cached calibration for this config, or None (missing, stale or unreadable)."""
    path = _cache_path(config)
    if not os.path.exists(path):
        return None
    cache = safe_operation(_read_cache, path, context="Reading calibration cache", default_return=None)
    if cache is None:
        return None
    entry = cache["entries"].get(cache_key(config))
    if entry is None:
        return None
    return Calibration(**entry)


def store_calibration(config: ExperimentConfig, calibration: Calibration) -> str:
    """Merge into the cache file atomically; returns its path."""
    path = _cache_path(config)
    os.makedirs(config.output_dir, exist_ok=True)
    cache = {"version": CALIBRATION_CACHE_VERSION, "entries": {}}
    if os.path.exists(path):
        cache = safe_operation(_read_cache, path, context="Reading calibration cache", default_return=cache)
    cache["entries"][cache_key(config)] = {
        "lambda_hat": calibration.lambda_hat,
        "c1_hat": calibration.c1_hat,
        "c_delta": calibration.c_delta,
        "master_seed": calibration.master_seed,
        "measure": calibration.measure,
        "backend": calibration.backend,
        "diagnostics": calibration.diagnostics,
    }
    handle, temp_path = tempfile.mkstemp(dir=config.output_dir, suffix=".tmp")
    with os.fdopen(handle, "w", encoding="utf-8") as out:
        json.dump(cache, out, sort_keys=True, indent=2)
    os.replace(temp_path, path)
    logger.info(f"Stored calibration under {cache_key(config)}")
    return path


# ============================================================
#                   PIPELINE
# ============================================================

def soundness_sweep(
    config: ExperimentConfig,
    c_delta: float,
    samples: int,
    powers: int = SOUNDNESS_POWERS
) -> Dict[str, int]:
    """
    Count certify_single certificates whose word powers evaluate to e.

    Pairs (w, g) are w in W_2 with at most 6 syllables and g a walk endpoint
    of length 1..24.
    """
    backend = config.backend
    params = replace(config.hyp_params(), c_delta=c_delta)
    e = identity(backend)
    rng = derive_rng(config.master_seed, "soundness")
    ball = enumerate_ball(2, backend)
    certified = 0
    counterexamples = 0
    for i in range(samples):
        w = sample_w_n(2, backend, rng, syllable_cap=6, exponent_cap=2, ball=ball)
        length = int(rng.integers(1, 25))
        g = walk_endpoint(config.measure, length, derive_rng(config.master_seed, "soundness", i))
        result = certify_single(w, g, params)
        if result.certificate is None:
            continue
        certified += 1
        if any(evaluate(mixed_power(result.core, k), g) == e for k in range(1, powers + 1)):
            counterexamples += 1
            logger.error(f"Unsound certificate: w={w}, g={g}, C_delta={c_delta}")
    return {"samples": samples, "certified": certified, "counterexamples": counterexamples}


def calibrate(config: ExperimentConfig) -> Calibration:
    """
    Run the calibration pipeline for a config.

    lambda_hat is a low quantile of per-trial speeds, C1_hat the larger of the
    dominating fits for the probe element and its inverse orientation, and
    C_delta must survive a soundness sweep.

    Raises:
        ConfigurationError: For an inadmissible measure without override, a tail
            no grid value dominates, or an unsound C_delta
    """
    config.require_admissible("calibrate")
    measure = config.measure
    seed = config.master_seed
    logger.info(f"Calibrating {cache_key(config)}")

    speed = estimate_speed(measure, config.size("speed_n"), config.size("speed_trials"), seed)
    lambda_hat = speed.quantile(SPEED_QUANTILE)
    if lambda_hat <= 0:
        raise ConfigurationError(f"Speed quantile is {lambda_hat}; the walk shows no linear progress")

    probe = parse_element(CALIBRATION_PROBE, config.backend)
    tails = [
        estimate_tail(measure, probe, config.size("tail_n"), config.size("tail_trials"), seed, inverse=flag)
        for flag in (False, True)
    ]
    c1_hat = max(t.fitted_c1 for t in tails)
    if c1_hat == float("inf"):
        raise ConfigurationError("No grid value dominates the overlap tail")

    sweep = soundness_sweep(config, config.c_delta, config.size("soundness_samples"))
    if sweep["counterexamples"]:
        raise ConfigurationError(
            f"C_delta = {config.c_delta} is unsound: {sweep['counterexamples']} counterexamples"
        )

    return Calibration(
        lambda_hat=lambda_hat,
        c1_hat=c1_hat,
        c_delta=config.c_delta,
        master_seed=seed,
        measure=format_measure(measure),
        backend=config.backend.describe(),
        diagnostics={
            "lambda_mean": speed.lambda_hat,
            "lambda_stderr": speed.stderr,
            "tail_slope": tails[0].slope,
            "soundness_certified": sweep["certified"],
            "soundness_counterexamples": sweep["counterexamples"],
        },
    )


def ensure_calibration(config: ExperimentConfig, refresh: bool = False) -> Calibration:
    """User-fixed constants first, then the cache, then a fresh run (which is cached)."""
    if config.calibration is not None:
        lambda_hat, c1_hat = config.calibration
        return Calibration(
            lambda_hat=lambda_hat,
            c1_hat=c1_hat,
            c_delta=config.c_delta,
            master_seed=config.master_seed,
            measure=format_measure(config.measure),
            backend=config.backend.describe(),
        )
    if not refresh:
        cached = load_cached_calibration(config)
        if cached is not None and cached.c_delta == config.c_delta:
            logger.info(f"Using cached calibration for {cache_key(config)}")
            return cached
    calibration = calibrate(config)
    store_calibration(config, calibration)
    return calibration
