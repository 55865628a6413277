"""
Exception types raised by the broker.

Checks that can report several problems at once return diagnostics; the
loaders and engines raise these when a caller needs a hard stop.
"""


class BrokerError(Exception):
    """Base class for every error raised by this package."""


class PlanError(BrokerError):
    """A plan file failed to parse or validate."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = '\n'.join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid plan ({len(self.diagnostics)} problem(s)):\n{lines}")


class CatalogError(BrokerError):
    """Invalid catalog registration, lookup or pattern."""


class UnknownResourceError(BrokerError, KeyError):
    """A compute server, data host or LFN id is not declared."""

    def __str__(self):
        return str(self.args[0]) if self.args else 'unknown resource'


class DecompositionError(BrokerError):
    """The plan cannot be turned into a job set."""


class ScenarioError(BrokerError):
    """A scenario file violates its schema."""

    def __init__(self, message, diagnostics=()):
        self.diagnostics = list(diagnostics)
        if self.diagnostics:
            message = message + '\n' + '\n'.join(f"  - {d}" for d in self.diagnostics)
        super().__init__(message)


class InvalidTransition(BrokerError, ValueError):
    """A job status change outside the job state machine."""


class TransferError(BrokerError):
    """A data transfer cannot start (link down or data service failed)."""


class BookkeeperError(BrokerError):
    """The bookkeeper log could not be written or read back."""


class InvariantViolation(BrokerError):
    """A runtime state invariant failed during simulation."""
