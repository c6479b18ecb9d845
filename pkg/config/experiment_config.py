# experiment_config.py
"""
Experiment configuration: flat `key = value` files, with values taken from
the file first, then the environment, then config.settings.
"""
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from config.settings import (
    CALIBRATION_SOUNDNESS_SAMPLES,
    CALIBRATION_SPEED_N,
    CALIBRATION_SPEED_TRIALS,
    CALIBRATION_TAIL_N,
    CALIBRATION_TAIL_TRIALS,
    DEFAULT_ATTEMPT_LIMIT,
    DEFAULT_BUDGETS,
    DEFAULT_C_DELTA,
    DEFAULT_MEASURE,
    DEFAULT_RANK,
    DEFAULT_SEED,
    OUTPUT_DIR,
)
from core.error_handler import ConfigurationError, get_logger
from core.group_core import BackendSpec
from core.hyp_geom import HypParams
from core.random_walk import Measure, format_measure, parse_measure

logger = get_logger(__name__)

# key -> environment variable consulted when the file omits it
ENV_KEYS = {
    "rank": "MIF_RANK",
    "measure": "MIF_MEASURE",
    "seed": "MIF_SEED",
}

_CALIBRATION_SIZES = {
    "calibration.speed_n": CALIBRATION_SPEED_N,
    "calibration.speed_trials": CALIBRATION_SPEED_TRIALS,
    "calibration.tail_n": CALIBRATION_TAIL_N,
    "calibration.tail_trials": CALIBRATION_TAIL_TRIALS,
    "calibration.soundness_samples": CALIBRATION_SOUNDNESS_SAMPLES,
}
_CALIBRATION_VALUES = ("calibration.lambda_hat", "calibration.c1_hat", "calibration.c_delta")
KNOWN_KEYS = (
    {"rank", "measure", "seed", "output_dir", "attempt_limit", "allow_inadmissible", "trials"}
    | set(_CALIBRATION_SIZES)
    | set(_CALIBRATION_VALUES)
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a command needs to reproduce its payload."""

    backend: BackendSpec
    measure: Measure
    master_seed: int
    budgets: Dict[str, Optional[int]] = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    output_dir: str = OUTPUT_DIR
    # (lambda_hat, c1_hat) fixed by the user; calibration runs when absent
    calibration: Optional[Tuple[float, float]] = None
    c_delta: float = DEFAULT_C_DELTA
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT
    allow_inadmissible: bool = False
    trials: Optional[int] = None
    calibration_sizes: Dict[str, int] = field(default_factory=lambda: dict(_CALIBRATION_SIZES))

    def __post_init__(self):
        if self.c_delta < 0:
            raise ConfigurationError(f"calibration.c_delta must be nonnegative, got {self.c_delta}")
        if self.attempt_limit < 1:
            raise ConfigurationError(f"attempt_limit must be positive, got {self.attempt_limit}")
        if self.trials is not None and self.trials < 1:
            raise ConfigurationError(f"trials must be positive, got {self.trials}")

    def budget(self, name: str) -> Optional[int]:
        return self.budgets.get(name, DEFAULT_BUDGETS.get(name))

    def size(self, name: str) -> int:
        return self.calibration_sizes[f"calibration.{name}"]

    def hyp_params(self) -> HypParams:
        """delta = 0 on the free-group backend; the neighbourhood budget rides along."""
        return HypParams(delta=0.0, c_delta=self.c_delta, budget=self.budget("neighbourhood"))

    def require_admissible(self, context: str) -> None:
        """
        Refuse a walk-driven computation on a non-admissible measure.

        Raises:
            ConfigurationError: Unless allow_inadmissible is set
        """
        if self.measure.admissible or self.allow_inadmissible:
            return
        logger.error(f"{context}: measure {format_measure(self.measure)} is not admissible")
        raise ConfigurationError(
            f"Measure {format_measure(self.measure)} is not admissible; "
            f"set allow_inadmissible = true to run {context} anyway"
        )

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with CLI flag overrides; `budget` sets every budget at once."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if "budget" in changes:
            limit = changes.pop("budget")
            changes["budgets"] = {name: limit for name in self.budgets}
        if "rank" in changes:
            rank = changes.pop("rank")
            backend = BackendSpec.free_group(rank)
            changes["backend"] = backend
            changes.setdefault("measure", parse_measure(_measure_text(self.measure, backend), backend))
        return replace(self, **changes)

    def snapshot(self) -> Dict[str, Any]:
        """Flat key/value view embedded in every report."""
        values: Dict[str, Any] = {
            "backend": self.backend.describe(),
            "rank": self.backend.rank,
            "measure": format_measure(self.measure),
            "seed": self.master_seed,
            "output_dir": self.output_dir,
            "attempt_limit": self.attempt_limit,
            "allow_inadmissible": self.allow_inadmissible,
            "trials": self.trials,
            "calibration.c_delta": self.c_delta,
        }
        if self.calibration is not None:
            values["calibration.lambda_hat"], values["calibration.c1_hat"] = self.calibration
        values.update({f"budget.{k}": v for k, v in sorted(self.budgets.items())})
        values.update(sorted(self.calibration_sizes.items()))
        return values


def _measure_text(measure: Measure, backend: BackendSpec) -> str:
    # a rank change keeps `uniform` meaning uniform on the new generators
    uniform = parse_measure("uniform", measure.backend)
    return "uniform" if measure == uniform else format_measure(measure)


def _parse_bool(key: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key} expects a boolean, got {value!r}")


def _parse_number(key: str, value: str, kind=int):
    try:
        return kind(value)
    except ValueError as e:
        raise ConfigurationError(f"{key} expects {kind.__name__}, got {value!r}") from e


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment."""
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"Line {number}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS and not key.startswith("budget."):
            raise ConfigurationError(f"Line {number}: unknown key {key!r}")
        values[key] = value
    return values


def config_from_mapping(values: Mapping[str, Any]) -> ExperimentConfig:
    """
    Build a config from flat values (file contents or a report snapshot).

    Raises:
        ConfigurationError: On malformed or inconsistent values
    """
    def lookup(key: str, default: Any) -> Any:
        if values.get(key) is not None:
            return values[key]
        env = ENV_KEYS.get(key)
        if env and os.getenv(env):
            return os.getenv(env)
        return default

    rank = _parse_number("rank", str(lookup("rank", DEFAULT_RANK)))
    backend = BackendSpec.free_group(rank)
    measure = parse_measure(str(lookup("measure", DEFAULT_MEASURE)), backend)

    budgets: Dict[str, Optional[int]] = dict(DEFAULT_BUDGETS)
    for key, value in values.items():
        if key.startswith("budget."):
            name = key[len("budget."):]
            budgets[name] = None if value in (None, "none", "None") else _parse_number(key, str(value))

    calibration = None
    if values.get("calibration.lambda_hat") is not None or values.get("calibration.c1_hat") is not None:
        try:
            calibration = (
                _parse_number("calibration.lambda_hat", str(values["calibration.lambda_hat"]), float),
                _parse_number("calibration.c1_hat", str(values["calibration.c1_hat"]), float),
            )
        except KeyError as e:
            raise ConfigurationError("calibration.lambda_hat and calibration.c1_hat go together") from e

    sizes = dict(_CALIBRATION_SIZES)
    for key in _CALIBRATION_SIZES:
        if values.get(key) is not None:
            sizes[key] = _parse_number(key, str(values[key]))

    allow = values.get("allow_inadmissible", False)
    trials = values.get("trials")
    config = ExperimentConfig(
        backend=backend,
        measure=measure,
        master_seed=_parse_number("seed", str(lookup("seed", DEFAULT_SEED))),
        budgets=budgets,
        output_dir=str(lookup("output_dir", OUTPUT_DIR)),
        calibration=calibration,
        c_delta=_parse_number("calibration.c_delta", str(lookup("calibration.c_delta", DEFAULT_C_DELTA)), float),
        attempt_limit=_parse_number("attempt_limit", str(values.get("attempt_limit") or DEFAULT_ATTEMPT_LIMIT)),
        allow_inadmissible=allow if isinstance(allow, bool) else _parse_bool("allow_inadmissible", allow),
        trials=None if trials in (None, "") else _parse_number("trials", str(trials)),
        calibration_sizes=sizes,
    )
    if not measure.admissible and not config.allow_inadmissible:
        logger.warning(f"Measure {format_measure(measure)} is not admissible; set allow_inadmissible to use it")
    return config


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """
    Load a config file, or defaults when no path is given.

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    if path is None:
        return config_from_mapping({})
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigurationError(f"Cannot read config {path}: {e}") from e
    logger.info(f"Loaded config from {path}")
    return config_from_mapping(parse_config_text(text))
