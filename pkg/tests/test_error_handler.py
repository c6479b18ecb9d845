"""
Tests for the error handling module.

Run with: pytest tests/test_error_handler.py -v
"""
import logging

import pandas as pd
import pytest

from core.error_handler import (
    AttemptLimitExceeded,
    BudgetExceeded,
    CommandScope,
    DataValidationError,
    InjectivityFailure,
    MifError,
    SelflessnessFailure,
    UnknownSymbol,
    check_budget,
    display_error,
    display_warning,
    safe_operation,
    validate_dataframe,
)


class TestCustomExceptions:
    """Test custom exception classes."""

    def test_hierarchy(self):
        assert issubclass(BudgetExceeded, MifError)
        assert issubclass(InjectivityFailure, SelflessnessFailure)
        assert issubclass(UnknownSymbol, MifError)

    def test_budget_fields(self):
        error = BudgetExceeded("ball", 53, 10, "radius 3")
        assert (error.name, error.size, error.limit) == ("ball", 53, 10)
        assert "53" in str(error)

    def test_unknown_symbol_fields(self):
        error = UnknownSymbol("z", 2, "abz")
        assert error.symbol == "z"
        assert error.position == 2

    def test_attempt_limit_message(self):
        assert "7" in str(AttemptLimitExceeded(7, "walk length 3"))


class TestCheckBudget:
    """Test the enumeration budget gate."""

    def test_within_budget(self):
        check_budget("ball", 10, 10)
        check_budget("ball", 10**9, None)

    def test_over_budget(self):
        with pytest.raises(BudgetExceeded):
            check_budget("ball", 11, 10)


class TestValidateDataFrame:
    """Test DataFrame validation."""

    def test_valid_dataframe(self):
        df = pd.DataFrame({"t": [0, 1], "survival": [1.0, 0.5]})
        assert validate_dataframe(df, "tail", required_columns=["t", "survival"], min_rows=1)

    def test_empty_dataframe(self):
        with pytest.raises(DataValidationError):
            validate_dataframe(pd.DataFrame(), "tail", min_rows=1)
        assert validate_dataframe(pd.DataFrame(), "tail")

    def test_too_few_rows(self):
        with pytest.raises(DataValidationError):
            validate_dataframe(pd.DataFrame({"n": [1]}), "growth", min_rows=2)

    def test_missing_columns(self):
        with pytest.raises(DataValidationError):
            validate_dataframe(pd.DataFrame({"n": [1]}), "growth", required_columns=["n", "M_n"])


class TestCommandScope:
    """Test the CommandScope context manager."""

    def test_success_logs_metrics(self, caplog):
        caplog.set_level(logging.INFO, logger="core.error_handler")
        with CommandScope("growth") as scope:
            value = 1 + 1
        assert value == 2
        assert scope.error is None
        assert scope.duration >= 0.0
        assert "growth: SUCCESS" in caplog.text

    def test_error_is_recorded_and_reraised(self, caplog):
        caplog.set_level(logging.INFO, logger="core.error_handler")
        scope = CommandScope("certify")
        with pytest.raises(BudgetExceeded):
            with scope:
                check_budget("ball", 10, 5)
        assert isinstance(scope.error, BudgetExceeded)
        assert "certify: FAILED" in caplog.text
        assert "certify failed" in caplog.text

    def test_unexpected_errors_keep_their_traceback(self, caplog):
        with pytest.raises(ZeroDivisionError):
            with CommandScope("walk"):
                1 / 0
        failures = [r for r in caplog.records if "walk failed" in r.getMessage()]
        assert failures and failures[0].exc_info is not None


class TestSafeOperation:
    """Test safe_operation wrapper."""

    def test_success(self):
        assert safe_operation(lambda x: x * 2, 5, context="Test") == 10

    def test_failure_returns_default(self):
        def failing():
            raise ValueError("Test error")

        assert safe_operation(failing, context="Test", default_return="default") == "default"

    def test_kwargs(self):
        def add(x, y=0):
            return x + y

        assert safe_operation(add, 5, y=3, context="Test") == 8


def test_display_error(capsys):
    display_error(ValueError("bad input"), "Parse error")
    assert capsys.readouterr().err.strip() == "error: Parse error: bad input"


def test_display_warning(capsys):
    display_warning("measure a:1 is not admissible")
    captured = capsys.readouterr()
    assert captured.err.strip() == "warning: measure a:1 is not admissible"
    assert captured.out == ""
