"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: SchemaError and its relatives map to
exit 2, UnsupportedFamily to exit 3, numeric failures to exit 4.
"""


class QgendsError(Exception):
    """Base class for all package errors."""


class SchemaError(QgendsError):
    """Malformed document: bad JSON shape, unknown fields, wrong types."""


class InvariantError(QgendsError):
    """A structurally valid document violates a model invariant."""


class NonPositiveLength(InvariantError):
    """An edge length (or length-sequence value) is not strictly positive."""


class UnknownVertex(QgendsError):
    pass


class UnsupportedFamily(QgendsError):
    """The requested operation has no meaning for this family variant."""


class DepthTooLarge(QgendsError):
    """Truncation would exceed the configured vertex cap."""


class OutOfDomain(QgendsError):
    """Point lies outside the domain of a step weight or kernel."""


class InfiniteVolumeRegime(QgendsError):
    """Kernel analysis requested for a tree of infinite total volume."""


class NumericError(QgendsError):
    """Base class for failures of the numerical layer (CLI exit 4)."""


class NoFiniteVolumeEnd(NumericError):
    """No H1 solution exists: the family has no finite volume end."""


class NoQualifyingSequence(NumericError):
    """No subgraph sequence with vanishing volume and excess end count."""


class ShootingFailure(NumericError):
    """Layer propagation failed to meet a boundary condition or to settle."""


class RootScanTooCoarse(NumericError):
    """Two secular roots landed in one scan cell; rerun with a finer step."""


class SingularAssembly(NumericError):
    """Secular condition matrix is structurally singular."""


class ZeroFunction(NumericError):
    """All norms of the supplied function vanish."""


class NoLimit(NumericError):
    """Function handle has no limit along the ray."""
