import pytest

from config.experiment_config import (
    ENV_KEYS,
    config_from_mapping,
    load_config,
    parse_config_text,
)
from config.settings import DEFAULT_BUDGETS, DEFAULT_SEED
from core.error_handler import ConfigurationError
from core.random_walk import format_measure


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_KEYS.values():
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    config = load_config()
    assert config.backend.rank == 2
    assert config.master_seed == DEFAULT_SEED
    assert config.measure.admissible
    assert config.budget("ball") == DEFAULT_BUDGETS["ball"]
    assert config.calibration is None


def test_file_values(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        "# experiment\n"
        "rank = 3\n"
        "seed = 42   # fixed\n"
        "budget.ball = 500\n"
        "calibration.lambda_hat = 0.4\n"
        "calibration.c1_hat = 1.5\n"
        "calibration.c_delta = 0\n"
        "calibration.speed_n = 100\n"
        "trials = 12\n"
    )
    config = load_config(str(path))
    assert config.backend.describe() == "F_3"
    assert config.master_seed == 42
    assert config.budget("ball") == 500
    assert config.calibration == (0.4, 1.5)
    assert config.c_delta == 0.0
    assert config.size("speed_n") == 100
    assert config.trials == 12


def test_environment_fills_missing_keys(monkeypatch):
    monkeypatch.setenv("MIF_SEED", "77")
    monkeypatch.setenv("MIF_MEASURE", "uniform(aAbB)")
    config = config_from_mapping({})
    assert config.master_seed == 77
    assert config_from_mapping({"seed": "5"}).master_seed == 5


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError):
        parse_config_text("colour = blue\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigurationError):
        parse_config_text("rank 2\n")


def test_bad_values_rejected():
    with pytest.raises(ConfigurationError):
        config_from_mapping({"seed": "abc"})
    with pytest.raises(ConfigurationError):
        config_from_mapping({"allow_inadmissible": "maybe"})
    with pytest.raises(ConfigurationError):
        config_from_mapping({"calibration.lambda_hat": "0.5"})


def test_missing_file():
    with pytest.raises(ConfigurationError):
        load_config("/nonexistent/run.conf")


def test_inadmissible_measure_is_flagged():
    config = config_from_mapping({"measure": "a:1/2, b:1/2"})
    assert not config.measure.admissible
    assert not config.allow_inadmissible


def test_overrides():
    config = load_config().with_overrides(master_seed=9, budget=50, rank=3, trials=None)
    assert config.master_seed == 9
    assert set(config.budgets.values()) == {50}
    assert config.backend.rank == 3
    assert len(config.measure.support) == 6
    assert config.trials is None


def test_rank_override_keeps_explicit_measure():
    config = config_from_mapping({"measure": "a:1/2, A:1/4, b:1/8, B:1/8"})
    wider = config.with_overrides(rank=3)
    assert format_measure(wider.measure) == "a:1/2, A:1/4, b:1/8, B:1/8"
    assert wider.measure.backend.rank == 3


def test_snapshot_round_trip():
    config = config_from_mapping({
        "seed": "3",
        "calibration.lambda_hat": "0.45",
        "calibration.c1_hat": "2",
        "budget.sweep": "1000",
    })
    snapshot = config.snapshot()
    assert snapshot["backend"] == "F_2"
    assert snapshot["budget.sweep"] == 1000
    assert config_from_mapping(snapshot) == config


@pytest.mark.parametrize("values", [
    {"calibration.c_delta": "-1"},
    {"attempt_limit": "0"},
    {"trials": "0"},
    {"calibration.lambda_hat": "fast", "calibration.c1_hat": "2"},
])
def test_invalid_values_are_rejected(values):
    with pytest.raises(ConfigurationError):
        config_from_mapping(values)


def test_negative_c_delta_override_is_rejected():
    with pytest.raises(ConfigurationError, match="c_delta"):
        config_from_mapping({}).with_overrides(c_delta=-0.5)


def test_hyp_params_carry_the_neighbourhood_budget():
    params = config_from_mapping({"budget.neighbourhood": "1234", "calibration.c_delta": "2.5"}).hyp_params()
    assert (params.delta, params.c_delta, params.budget) == (0.0, 2.5, 1234)


def test_require_admissible():
    config_from_mapping({}).require_admissible("walk")
    one_sided = {"measure": "a:1/2, b:1/2"}
    with pytest.raises(ConfigurationError, match="allow_inadmissible"):
        config_from_mapping(one_sided).require_admissible("walk")
    config_from_mapping({**one_sided, "allow_inadmissible": "true"}).require_admissible("walk")
