"""Exception hierarchy shared across the package."""


class EnselError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(EnselError):
    """A domain object violates one of its invariants."""


class GridMismatch(EnselError):
    """Two density fields do not share the same grid."""


class EmptyOverlap(EnselError):
    """The shared-support domain of two fields is empty."""


class LengthMismatch(EnselError):
    """Coefficient vectors being compared have different lengths."""


class WeightOutOfRange(EnselError):
    """A shock/edge weight lies outside [0, 1]."""


class TooFewSamples(EnselError):
    """Not enough angular samples for the requested number of modes."""


class MalformedFile(EnselError):
    """A density or feature file is truncated or has a bad header."""


class CorruptStore(EnselError):
    """The store file is not a usable metadata store."""


class NotFound(EnselError):
    """A referenced id does not exist in the store."""


class DuplicateKey(EnselError):
    """An insert collides with an existing primary/unique key."""


class EmptySelection(EnselError):
    """A dataset save was attempted with no members."""


class FilterError(EnselError):
    """Base class for filter-string problems."""


class UnknownAxis(FilterError):
    """A filter clause names an axis that does not exist."""


class DuplicateAxis(FilterError):
    """Two clauses in one filter expression target the same axis."""


class MalformedClause(FilterError):
    """A filter string clause cannot be parsed.

    Carries the character offset of the offending clause in ``position``.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvertedRect(EnselError):
    """A box selection has min > max on some axis."""


class DegeneratePolygon(EnselError):
    """A lasso polygon has no area (all vertices collinear)."""


class InvalidProbability(EnselError):
    """A subsampling probability lies outside (0, 1]."""


class StaleRecords(EnselError):
    """Replay found no post-processed records for the saved method/time."""
