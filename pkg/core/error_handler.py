# ============================================================
#                   ERROR HANDLING MODULE
# ============================================================

import logging
import time
from typing import Optional, Callable, Any

import click

from config.settings import LOG_LEVEL

# Configure logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL.upper(), logging.WARNING),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


# ============================================================
#                   CUSTOM EXCEPTIONS
# ============================================================

class MifError(Exception):
    """Base exception for every domain error raised by the toolkit."""
    pass


class UnknownSymbol(MifError):
    """Raised when text contains a character outside the backend alphabet."""

    def __init__(self, symbol: str, position: int, text: str):
        self.symbol = symbol
        self.position = position
        super().__init__(
            f"Unknown symbol {symbol!r} at position {position} in {text!r}"
        )


class BackendMismatch(MifError):
    """Raised when operands live on different group backends."""
    pass


class TrivialWord(MifError):
    """Raised when an operation needs a nontrivial element of G*<x>."""
    pass


class EndpointMismatch(MifError):
    """Raised when consecutive geodesic segments do not share endpoints."""
    pass


class BudgetExceeded(MifError):
    """Raised when an enumeration would exceed its element-count budget."""

    def __init__(self, name: str, size: int, limit: int, detail: str = ""):
        self.name = name
        self.size = size
        self.limit = limit
        message = f"Budget '{name}' exceeded: needs {size}, limit {limit}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class AttemptLimitExceeded(MifError):
    """Raised when a randomized search gives up; usually a miscalibrated C."""

    def __init__(self, attempts: int, detail: str = ""):
        self.attempts = attempts
        super().__init__(
            f"No success after {attempts} attempts" + (f": {detail}" if detail else "")
        )


class SelflessnessFailure(MifError):
    """Raised when a candidate selfless map violates a defining condition."""
    pass


class InjectivityFailure(SelflessnessFailure):
    """Raised when two ball elements share an image; the certificate was unsound."""
    pass


class KindMismatch(MifError):
    """Raised when plot data of one kind is requested from another report."""
    pass


class DataValidationError(MifError):
    """Raised when data validation fails."""
    pass


class ConfigurationError(MifError):
    """Raised when configuration is invalid."""
    pass


# ============================================================
#                   BUDGET GATE
# ============================================================

def check_budget(name: str, size: int, limit: Optional[int], detail: str = "") -> None:
    """
    Fail loudly when an enumeration of `size` elements exceeds `limit`.

    Args:
        name: Budget name for error messages
        size: Number of elements the caller is about to produce
        limit: Element-count limit; None disables the check
        detail: Extra context (radius, word length, ...)

    Raises:
        BudgetExceeded: If size > limit
    """
    if limit is not None and size > limit:
        logger.error(f"Budget '{name}' exceeded: {size} > {limit} {detail}")
        raise BudgetExceeded(name, size, limit, detail)


# ============================================================
#                   DATA VALIDATION
# ============================================================

def validate_dataframe(
    df,
    name: str,
    required_columns: list = None,
    min_rows: int = 0
) -> bool:
    """
    Validate that a DataFrame has required structure.

    Args:
        df: DataFrame to validate
        name: DataFrame name for error messages
        required_columns: List of required column names
        min_rows: Minimum number of rows required

    Returns:
        True if valid

    Raises:
        DataValidationError: If validation fails
    """
    if df is None or df.empty:
        if min_rows > 0:
            raise DataValidationError(f"{name} is empty")
        return True

    if len(df) < min_rows:
        raise DataValidationError(
            f"{name} has {len(df)} rows, expected at least {min_rows}"
        )

    if required_columns:
        missing = [col for col in required_columns if col not in df.columns]
        if missing:
            raise DataValidationError(
                f"{name} missing required columns: {missing}. "
                f"Available columns: {list(df.columns)}"
            )

    logger.info(f"Validated {name}: {len(df)} rows, {len(df.columns)} columns")
    return True


# ============================================================
#                   TERMINAL ERROR DISPLAY
# ============================================================

def display_error(error: Exception, context: str = "Error") -> None:
    """
    Print an error to stderr and log it.

    Args:
        error: Exception to display
        context: Context string for error message
    """
    error_msg = str(error)
    logger.error(f"{context}: {error_msg}")
    click.secho(f"error: {context}: {error_msg}", fg="red", err=True)


def display_warning(message: str) -> None:
    """
    Print a warning to stderr.

    Args:
        message: Warning message
    """
    logger.warning(message)
    click.secho(f"warning: {message}", fg="yellow", err=True)


def display_info(message: str) -> None:
    """
    Print an informational line to stdout.

    Args:
        message: Info message
    """
    logger.info(message)
    click.echo(message)


# ============================================================
#                   COMMAND SCOPE
# ============================================================

class CommandScope:
    """
    Time one command, log its metrics and record a failure before it propagates.

    Domain errors are expected outcomes and are logged without a traceback;
    anything else is logged with one.
    """

    def __init__(self, command: str):
        """
        Args:
            command: Command name as it appears in reports
        """
        self.command = command
        self.duration = 0.0
        self.error: Optional[BaseException] = None
        self._started = 0.0

    def __enter__(self) -> "CommandScope":
        self._started = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        self.duration = time.perf_counter() - self._started
        log_operation_metrics(self.command, self.duration, success=exc_type is None)
        if exc_type is not None:
            self.error = exc_val
            logger.error(f"{self.command} failed: {exc_val}", exc_info=not isinstance(exc_val, MifError))
        return False


# ============================================================
#                   SAFE OPERATION WRAPPER
# ============================================================

def safe_operation(
    func: Callable,
    *args,
    context: str = "Operation",
    default_return: Any = None,
    show_error: bool = False,
    **kwargs
) -> Any:
    """
    Execute function safely with error handling.

    Args:
        func: Function to execute
        *args: Positional arguments for function
        context: Description of operation for error messages
        default_return: Value to return if operation fails
        show_error: Whether to print the error on the terminal
        **kwargs: Keyword arguments for function

    Returns:
        Function result or default_return if error occurs

    Example:
        cached = safe_operation(
            load_cached_calibration,
            config,
            context="Reading calibration cache",
            default_return=None
        )
    """
    try:
        logger.info(f"Starting: {context}")
        result = func(*args, **kwargs)
        logger.info(f"Completed: {context}")
        return result

    except Exception as e:
        logger.error(f"{context} failed: {str(e)}", exc_info=True)

        if show_error:
            display_error(e, context)

        return default_return


# ============================================================
#                   LOGGING UTILITIES
# ============================================================

def log_operation_metrics(operation: str, duration: float, success: bool) -> None:
    """
    Log operation metrics for monitoring.

    Args:
        operation: Operation name
        duration: Duration in seconds
        success: Whether operation succeeded
    """
    status = "SUCCESS" if success else "FAILED"
    logger.info(f"{operation}: {status} ({duration:.2f}s)")


def get_logger(name: str = __name__) -> logging.Logger:
    """
    Get or create logger instance.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    return logging.getLogger(name)
