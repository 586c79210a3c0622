"""Exception types shared across the package."""


class Fr3ChanError(Exception):
    """Base class for all package errors."""


class DomainError(Fr3ChanError, ValueError):
    """An argument lies outside the domain of the operation."""


class MissingData(Fr3ChanError, LookupError):
    """Requested parameters were not measured for a link class."""

    def __init__(self, link_class, fields):
        self.link_class = link_class
        self.fields = tuple(fields)
        super().__init__(f"{link_class}: no data for {', '.join(self.fields)}")


class Unattainable(Fr3ChanError):
    """A synthesis target cannot be reached."""


class DegenerateFit(Fr3ChanError, ValueError):
    """Regression input does not determine a unique fit."""


class DegenerateInput(Fr3ChanError, ValueError):
    """A statistic is undefined for the input (e.g. zero variance)."""


class EmptyResult(Fr3ChanError):
    """An operation produced no output where at least one item is required."""


class SuspectDataWarning(UserWarning):
    """Generation is using a table cell flagged as suspect."""
