"""Exception hierarchy shared by every lightspan module."""

from __future__ import annotations


class LightspanError(Exception):
    """Base class for all library errors."""


class StructuralError(LightspanError):
    """An edge sequence is not a valid cycle, or a graph violates its invariants."""


class ConnectivityError(LightspanError):
    def __init__(self, node: int, message: str | None = None):
        self.node = node
        super().__init__(message or f"graph is disconnected: node {node} is stranded")


class SubgraphError(LightspanError):
    """A graph claimed to be a subgraph contains an edge absent from its host."""


class BudgetError(LightspanError):
    """An exhaustive enumeration was asked to exceed its configured cap."""


class ParameterError(LightspanError, ValueError):
    """Invalid numeric parameter (k, epsilon, q, side, ...)."""


class GenerationError(LightspanError):
    """A randomized generator produced an unusable graph."""


class RegularizationError(LightspanError):
    def __init__(self, message: str, trace: list | None = None):
        self.trace = list(trace or [])
        super().__init__(message)


class CertificationError(LightspanError):
    """A constructed instance failed its weighted-girth certificate.

    ``witness`` is the offending cycle and ``value`` its normalized weight.
    """

    def __init__(self, message: str, witness=None, value=None):
        self.witness = witness
        self.value = value
        super().__init__(message)


class InvariantViolation(LightspanError):
    """A proven invariant was observed to fail (indicates a bug)."""


class ConfigError(LightspanError, ValueError):
    """An experiment configuration has an unknown key or an unusable value."""
