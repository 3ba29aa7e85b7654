"""Semantic exception hierarchy for ptpsim.

Public functions raise subclasses of :class:`PtpsimError` rather than bare
built-ins, so callers (and the CLI) can map failure classes to distinct exit
codes.
"""

from __future__ import annotations


class PtpsimError(Exception):
    """Base class for all errors raised by this package."""


class SignalError(PtpsimError, ValueError):
    """A signal violates its contract (empty, non-finite entries, ...)."""


class PartitionError(PtpsimError, ValueError):
    """A state partition, angular partition, or grouping is malformed."""


class UnreachableStateError(PartitionError):
    """classify() found no (or more than one) matching state.

    Signals a malformed partition that escaped validation; should never be
    observed for a partition constructed through the public constructors.
    """


class EmbeddingMismatchError(PtpsimError, ValueError):
    """Binary/coalition operation applied to incompatible embeddings.

    Embeddings must share coordinate count, state count, kind, and the
    partition they were built against.
    """


class CoalitionCapError(PtpsimError):
    """Coalition enumeration requested above the configured cap.

    Full enumeration costs O(2^m * n * K); the cap exists so that a stray
    wide input does not silently start an exponential computation.
    """


class CoalitionTableError(PtpsimError, ValueError):
    """A cumulative-intersection table is missing required coalitions."""


class VacuumError(PtpsimError, ZeroDivisionError):
    """Normalization of a zero-mass measure was requested.

    The all-zero signal is a valid physical state, but it has no normalized
    distribution; callers must branch on total mass before normalizing.
    """


class InvariantViolationError(PtpsimError, ArithmeticError):
    """A computed internal identity failed its tolerance.

    Raised by the dual-route checks (direct vs. embedded intersection,
    Tanimoto vs. total-variation similarity) and by budget closure.
    """


class InputFormatError(PtpsimError, ValueError):
    """A signals or partition file could not be parsed or validated."""
