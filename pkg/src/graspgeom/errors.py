"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to the
documented categories (I/O = 2, schema = 3, geometry = 4).
"""


class GraspGeomError(Exception):
    exit_code = 1


class InputError(GraspGeomError):
    """Missing or unreadable input file."""

    exit_code = 2


class SchemaError(GraspGeomError):
    """Malformed config or record."""

    exit_code = 3


class GeometryError(GraspGeomError):
    exit_code = 4


class NonPositiveDepth(GeometryError):
    pass


class FrameMismatch(GeometryError):
    pass


class DegenerateAxis(GeometryError):
    pass


class InfeasibleAngle(GeometryError):
    pass


class DegenerateContactPair(GeometryError):
    pass


class NonOrthogonalFrame(GeometryError):
    pass


class NotUnitVector(GeometryError):
    pass


class InvalidRotation(GeometryError):
    pass


class InvalidGrasp(GeometryError):
    pass


class EmptyMesh(GeometryError):
    pass


class InvalidMesh(GeometryError):
    pass


class EmptyDepthMap(GeometryError):
    pass


class EmptyWindow(GeometryError):
    pass


class DegenerateWindow(GeometryError):
    pass


class MissingDepth(InputError):
    pass
