"""Exception hierarchy.

Everything raised for bad input derives from :class:`ValidationError`, which
the CLI maps to exit status 1. Anything else is treated as an internal error.
"""

from __future__ import annotations


class ReputationError(Exception):
    """Base class for all package errors."""

    code = "error"


class ValidationError(ReputationError):
    """Input data or parameters violate a documented contract."""

    code = "validation"

    def __init__(self, message: str, *, file: str | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.file = file
        self.line = line

    def diagnostic(self) -> str:
        """One-line, machine-parsable rendering: ``code=.. file=.. line=.. msg=..``."""
        parts = [f"code={self.code}"]
        if self.file is not None:
            parts.append(f"file={self.file}")
        if self.line is not None:
            parts.append(f"line={self.line}")
        parts.append(f"msg={self.message}")
        return " ".join(parts)


class UnknownVertex(ValidationError):
    code = "unknown_vertex"


class EmptyGraph(ValidationError):
    code = "empty_graph"


class SelfLoopError(ValidationError):
    code = "self_loop"


class InvalidConfig(ValidationError):
    code = "invalid_config"


class NonConvergence(ReputationError):
    """Power iteration hit ``max_iter`` with the residual still above ``tol``."""

    code = "non_convergence"

    def __init__(self, iterations: int, residual: float, tol: float):
        super().__init__(
            f"PageRank did not converge after {iterations} iterations "
            f"(L1 residual {residual:.3e} > tol {tol:.1e})"
        )
        self.iterations = iterations
        self.residual = residual
        self.tol = tol


class FeatureOutOfRange(ValidationError):
    code = "feature_out_of_range"

    def __init__(self, field: str, value: object, *, file: str | None = None, line: int | None = None):
        super().__init__(f"feature {field!r}={value!r} outside [0, 1]", file=file, line=line)
        self.field = field
        self.value = value


class MalformedLine(ValidationError):
    code = "malformed_line"


class DuplicateId(ValidationError):
    code = "duplicate_id"


class InsufficientData(ValidationError):
    code = "insufficient_data"


class NoKnownAccounts(InsufficientData):
    code = "no_known_accounts"


class CycleDetected(ValidationError):
    code = "cycle_detected"


class TemporalOrderError(ValidationError):
    code = "temporal_order"


class UnsupportedFormat(ValidationError):
    code = "unsupported_format"


class InvalidSpec(ValidationError):
    code = "invalid_spec"
