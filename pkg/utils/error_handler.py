"""
Standardized Error Handling Framework

Provides the exception hierarchy raised by the geometry package and a single
place where commands turn exceptions into log records, user-facing messages and
process exit codes.

Distinguishes between:
- Functional Errors: bad flags, bad configuration, violated preconditions
- Runtime Errors: numerical failures and failed acceptance checks
"""

import json
import logging
import sys
from enum import Enum
from typing import Optional


# ---------------------------------------------------------------------------
# Exception hierarchy
# ---------------------------------------------------------------------------

class GeometryError(Exception):
    """Root of every error raised by kummerlab."""


class JetDomainError(GeometryError):
    """Jet argument outside the domain of the requested operation."""


class SingularJetError(GeometryError):
    """Division by a jet whose constant term vanishes."""


class OrbifoldPointError(GeometryError):
    """Evaluation at an orbifold point (u = 0) of an orbifold chart."""


class OutOfRegionError(GeometryError):
    """Evaluation outside the region where a quantity is defined."""


class DegenerateMetricError(GeometryError):
    """Metric is not positive definite at the evaluation point."""


class WrongPatchError(GeometryError):
    """Bundle-chart coordinates outside the patch |zeta| <= 1."""


class NotHyperkahlerChartError(GeometryError):
    """det(g) is not constant, so the J/K construction does not apply."""


class NormalizationError(GeometryError):
    """Zero vector, or coefficients that are not unit-normalized."""


class PreconditionError(GeometryError):
    """Input violates a stated precondition (off fixed set, path not closed, ...)."""


class CapabilityError(GeometryError):
    """Requested derivative order exceeds what the jets carry."""


class OrbifoldProximityError(GeometryError):
    """Geodesic entered u < u_min in orbifold coordinates."""


class AccuracyError(GeometryError):
    """Integrator error monitor exceeded its tolerance."""


class IntegrationError(GeometryError):
    """An ODE or quadrature routine did not converge."""


class NonKahlerRhsError(GeometryError):
    """Monge-Ampere right-hand side is negative somewhere."""


class ParameterRangeError(GeometryError):
    """Parameters leave the valid range of the construction (e.g. A <= 0)."""


class HypothesisViolationError(GeometryError):
    """Surface does not satisfy the hypothesis of the operation."""


class OverlapError(GeometryError):
    """Chart balls around half-lattice points overlap."""


class ConfigError(GeometryError):
    """Surface configuration file is malformed."""


class CheckFailure(GeometryError):
    """An acceptance check evaluated to False."""

    def __init__(self, check_name: str, detail: str = ""):
        self.check_name = check_name
        self.detail = detail
        super().__init__(f"check '{check_name}' failed{': ' + detail if detail else ''}")


# ---------------------------------------------------------------------------
# Categories and messages
# ---------------------------------------------------------------------------

class ErrorCategory(Enum):
    """Error categories - distinguishes functional vs runtime errors"""
    # Functional Errors (caller/input related)
    VALIDATION_ERROR = "validation_error"        # Bad flag values, unknown options
    CONFIG_ERROR = "config_error"                # Malformed surface configuration
    PRECONDITION_ERROR = "precondition_error"    # Geometric precondition violated

    # Runtime Errors (numerical outcomes)
    NUMERICAL_ERROR = "numerical_error"          # Singular jets, degenerate metrics, ODE failures
    CHECK_FAILURE = "check_failure"              # An acceptance assertion was violated
    UNKNOWN_ERROR = "unknown_error"              # Unexpected errors


class ErrorSeverity(Enum):
    """Error severity levels for logging"""
    LOW = "low"          # Caller can fix the input and rerun
    MEDIUM = "medium"    # Result unavailable for this parameter set
    HIGH = "high"        # A check failed or the numerics broke down
    CRITICAL = "critical"  # Programming error


ERROR_MESSAGES = {
    ErrorCategory.VALIDATION_ERROR: "Invalid arguments. Run with --help for usage.",
    ErrorCategory.CONFIG_ERROR: "Invalid surface configuration: {details}",
    ErrorCategory.PRECONDITION_ERROR: "Input outside the domain of this command: {details}",
    ErrorCategory.NUMERICAL_ERROR: "Numerical failure: {details}",
    ErrorCategory.CHECK_FAILURE: "Check failed: {details}",
    ErrorCategory.UNKNOWN_ERROR: "An unexpected error occurred: {details}",
}

_PRECONDITION_TYPES = (
    OrbifoldPointError, OutOfRegionError, WrongPatchError, NotHyperkahlerChartError,
    NormalizationError, PreconditionError, CapabilityError, ParameterRangeError,
    HypothesisViolationError, OverlapError,
)
_NUMERICAL_TYPES = (
    JetDomainError, SingularJetError, DegenerateMetricError, OrbifoldProximityError,
    AccuracyError, IntegrationError, NonKahlerRhsError, FloatingPointError,
    ZeroDivisionError,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def categorize_error(error: Exception) -> tuple[ErrorCategory, ErrorSeverity]:
    """
    Categorize error and determine severity.
    Distinguishes functional (input) vs runtime (numerical) errors.
    """
    if isinstance(error, CheckFailure):
        return ErrorCategory.CHECK_FAILURE, ErrorSeverity.HIGH
    elif isinstance(error, (ConfigError, json.JSONDecodeError)):
        return ErrorCategory.CONFIG_ERROR, ErrorSeverity.LOW
    elif isinstance(error, _PRECONDITION_TYPES):
        return ErrorCategory.PRECONDITION_ERROR, ErrorSeverity.LOW
    elif isinstance(error, _NUMERICAL_TYPES):
        return ErrorCategory.NUMERICAL_ERROR, ErrorSeverity.HIGH
    # ValueError/KeyError come from malformed flag values or config entries
    elif isinstance(error, (ValueError, KeyError, FileNotFoundError)):
        return ErrorCategory.VALIDATION_ERROR, ErrorSeverity.LOW
    # AttributeError/TypeError are programming bugs and must not be buried as warnings
    elif isinstance(error, (AttributeError, TypeError)):
        return ErrorCategory.UNKNOWN_ERROR, ErrorSeverity.CRITICAL

    return ErrorCategory.UNKNOWN_ERROR, ErrorSeverity.HIGH


def exit_code_for(category: ErrorCategory) -> int:
    """Usage and configuration problems exit with 2, everything else with 1."""
    if category in (ErrorCategory.VALIDATION_ERROR, ErrorCategory.CONFIG_ERROR):
        return EXIT_USAGE
    return EXIT_CHECK_FAILED


def handle_error(
    error: Exception,
    command_name: str = "",
    additional_context: Optional[dict] = None,
) -> int:
    """
    Centralized error handler: logs the error with context, prints a short
    message to stderr, and returns the process exit code.

    Args:
        error: The exception that occurred
        command_name: Name of the subcommand that failed
        additional_context: Extra key/value pairs for the log record
    """
    category, severity = categorize_error(error)

    is_functional = category in [
        ErrorCategory.VALIDATION_ERROR,
        ErrorCategory.CONFIG_ERROR,
        ErrorCategory.PRECONDITION_ERROR,
    ]

    log_context = {
        "command": command_name,
        "category": category.value,
        "severity": severity.value,
        "error_type": type(error).__name__,
        "is_functional": is_functional,
    }
    if isinstance(error, CheckFailure):
        log_context["check"] = error.check_name
    if additional_context:
        log_context.update(additional_context)

    log_message = f"Error in command '{command_name}' | Category: {category.value} | Error: {error}"

    if severity == ErrorSeverity.CRITICAL:
        logging.critical(log_message, extra={"context": log_context}, exc_info=True)
    elif severity == ErrorSeverity.HIGH:
        logging.error(log_message, extra={"context": log_context}, exc_info=not isinstance(error, CheckFailure))
    else:
        logging.warning(log_message, extra={"context": log_context})

    template = ERROR_MESSAGES.get(category, ERROR_MESSAGES[ErrorCategory.UNKNOWN_ERROR])
    print(template.format(details=str(error)), file=sys.stderr)

    return exit_code_for(category)


def require(condition: bool, check_name: str, detail: str = "") -> None:
    """Raise CheckFailure naming the check when condition is False."""
    if not condition:
        raise CheckFailure(check_name, detail)
