"""Shared exception types."""


class PreconditionError(ValueError):
    """An operation was called with arguments violating its preconditions."""


class SchemaError(ValueError):
    """An input file does not match the documented schema."""


class ValidationError(ValueError):
    """Input data violates a domain invariant."""


class ContractViolation(RuntimeError):
    """An internal consistency contract was broken (e.g. all actions masked)."""


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite objective; carries a diagnostic record."""

    def __init__(self, message: str, record: dict | None = None):
        super().__init__(message)
        self.record = record or {}
