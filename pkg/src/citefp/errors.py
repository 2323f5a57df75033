"""Exception types raised across the toolkit.

Everything derives from :class:`CitefpError` so callers can catch broadly;
the subclasses exist because several failure modes (bad input data vs. an
infeasible shuffle vs. a diverging training run) call for different handling.
"""

from __future__ import annotations


class CitefpError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(CitefpError):
    """A data file is malformed (bad JSON/TSV line, missing field, bad value)."""


class DuplicateIdError(DataFormatError):
    """The same paper id appears twice in a papers file."""


class UnresolvedFocalError(DataFormatError):
    """A reference list names a focal paper that has no paper record."""


class DimensionMismatchError(DataFormatError):
    """An embedding vector does not have the expected dimension."""


class NonFiniteError(CitefpError):
    """A vector or matrix contains NaN or infinite entries."""


class MissingEmbeddingError(CitefpError):
    """A required embedding is absent from the table."""


class DegenerateGraphError(CitefpError):
    """A graph is too small or malformed for the requested operation."""


class ConvergenceError(CitefpError):
    """An iterative solver exhausted its iteration budget."""


class StratumInfeasibleError(CitefpError):
    """No valid reassignment exists for a shuffle stratum."""


class DegenerateLabelsError(CitefpError):
    """A training set contains fewer than two classes."""


class TrainingFailure(CitefpError):
    """A training run produced non-finite loss or gradients."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class NoSuccessfulTrialError(CitefpError):
    """Every trial of a hyperparameter search failed."""


class InsufficientDataError(CitefpError):
    """Not enough samples to honor the requested split or task."""
