"""Exception types shared across the package."""


class LayerdistError(Exception):
    """Base class for all package-specific errors."""


class ParseError(LayerdistError):
    """Input file is malformed or uses an unknown field/tag."""


class ShapeError(LayerdistError):
    """Array dimensions are inconsistent with each other or the contract."""


class BoundsError(LayerdistError):
    """Sampling bounds are empty or inverted (low >= high)."""


class NonConvergence(LayerdistError):
    """Iterative solver exceeded its step budget."""


class UnsupportedActivation(LayerdistError):
    """Hidden layer uses an activation the canonicalization does not cover."""


class DomainError(LayerdistError):
    """Numeric argument outside its valid open interval."""


class EmptySetError(LayerdistError):
    """Attempted to sketch an empty set (unfiltered dead neuron)."""


class FamilyMismatch(LayerdistError):
    """Sketches built with different hash families were combined."""


class EmptyMatrix(LayerdistError):
    """Assignment requested on a cost matrix with no rows or columns."""


class EmptyMatching(LayerdistError):
    """Layer distance requested on a matching with no pairs."""


class DegenerateData(LayerdistError):
    """Training data contains a single class only."""
