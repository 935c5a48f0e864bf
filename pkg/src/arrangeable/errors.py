"""Exception hierarchy.

Precondition and invariant failures are programming or input errors and map
to CLI exit code 3; :class:`StageFailure` marks an honest probabilistic miss
(exit code 2).
"""


class ArrangeableError(Exception):
    """Base class for all library errors."""


class PreconditionError(ArrangeableError, ValueError):
    pass


class GraphFormatError(PreconditionError):
    pass


class InvariantError(ArrangeableError, AssertionError):
    pass


class CapExceededError(PreconditionError):
    pass


class ColouringError(PreconditionError):
    pass


class PartitionError(InvariantError):
    """A postcondition audit of a partition or homomorphism failed.

    ``clause`` names the violated condition, e.g. ``"H2"``.
    """

    def __init__(self, clause: str, message: str, details=None):
        super().__init__(f"{clause}: {message}")
        self.clause = clause
        self.details = details


class ConstantChainError(PreconditionError):
    def __init__(self, inequality: str, message: str):
        super().__init__(f"violates {inequality}: {message}")
        self.inequality = inequality


class StageFailure(ArrangeableError):
    """A randomized stage ran out of attempts; ``report`` carries the trace."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SwapBudgetExhausted(StageFailure):
    pass


class EmbeddingFailure(StageFailure):
    pass
