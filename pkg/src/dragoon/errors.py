"""Exception hierarchy shared by every stage of the pipeline.

``ValidationError`` subclasses signal bad input (CLI exit code 1);
everything else deriving from ``DragoonError`` is a runtime failure (exit 2).
"""

from __future__ import annotations


class DragoonError(Exception):
    """Base class for all package errors."""


class ValidationError(DragoonError):
    """Input failed validation before any computation ran."""


class RuntimeFailure(DragoonError):
    """A computation could not produce a result for valid input."""


# -- geo -------------------------------------------------------------------

class OutOfProjectionRange(ValidationError):
    pass


class CoincidentCenters(RuntimeFailure):
    pass


# -- topology / io ---------------------------------------------------------

class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyFile(ValidationError):
    pass


class MissingCoordinates(ValidationError):
    def __init__(self, node_ids):
        self.node_ids = list(node_ids)
        super().__init__(f"nodes without coordinates: {', '.join(map(str, self.node_ids))}")


class DisconnectedGraphWarning(UserWarning):
    """Emitted when a loaded topology has more than one connected component."""

    def __init__(self, component_sizes):
        self.component_sizes = list(component_sizes)
        super().__init__(f"topology is disconnected, component sizes {self.component_sizes}")


class UnknownNode(ValidationError):
    pass


# -- placement -------------------------------------------------------------

class KTooLarge(ValidationError):
    pass


# -- latency model ---------------------------------------------------------

class DomainError(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class SingularFit(RuntimeFailure):
    pass


class AllZeroPredictions(RuntimeFailure):
    pass


# -- lateration / estimation -----------------------------------------------

class TooFewConstraints(ValidationError):
    pass


class AllPairsDegenerate(RuntimeFailure):
    pass


class EmptyCloud(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


# -- simulator -------------------------------------------------------------

class NoPath(RuntimeFailure):
    pass
