"""Shared exception types with CLI exit-code semantics."""

from __future__ import annotations


class GroupValidationError(ValueError):
    """A declarative group spec or raw table failed structural validation."""


class CapExceededError(ValueError):
    """An enumeration guard (subgroup cap, span guard, table size) was hit."""


class HypothesisError(RuntimeError):
    """A conditional statement's hypothesis fails and no descriptive run makes sense.

    Maps to CLI exit code 2.
    """


class FalsifiedError(AssertionError):
    """An exactly-verifiable claim failed on a run whose hypotheses held.

    Maps to CLI exit code 3.  Carries the offending report when available.
    """

    def __init__(self, message: str, report: object = None):
        super().__init__(message)
        self.report = report
