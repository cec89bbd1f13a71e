"""Exception types shared across the library."""


class PolygalError(Exception):
    """Base class for all library errors."""


class BadDimension(PolygalError):
    """Ambient dimension is unsupported (d < 2, or d > 3 where 2/3 required)."""


class BadLevel(PolygalError):
    """Refinement level is out of range for the requested grid."""


class ZeroRow(PolygalError):
    """A normal row has (numerically) zero length."""


class DuplicateRow(PolygalError):
    """Two normal rows coincide after normalization."""


class NumericalFailure(PolygalError):
    """Pivoting or iteration degenerated beyond tolerance recovery."""


class UnboundedRegion(PolygalError):
    """A polyhedron expected to be bounded has an unbounded direction."""


class UnboundedSpace(PolygalError):
    """The normal system spans a space of unbounded polyhedra."""


class UnboundedBody(PolygalError):
    """A support-function oracle describes an unbounded set."""


class DegenerateBody(PolygalError):
    """A body with zero size where positive size is required."""


class EmptyPolytope(PolygalError):
    """Right-hand side describes an empty polyhedron."""


class ExteriorCoordinates(PolygalError):
    """Coordinates lie outside the admissible cone."""


class InfeasibleLevel(PolygalError):
    """A discretized optimization level has no strictly feasible point."""
