"""Exception types shared across the library.

The CLI maps each class to a stable, machine-readable error category,
so modules should raise the most specific type that applies.
"""


class ShapeFormsError(Exception):
    """Base class for all library errors."""

    category = "internal"


class MeshFormatError(ShapeFormsError):
    """A mesh file could not be parsed (carries a line number when known)."""

    category = "format"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MeshTopologyError(ShapeFormsError):
    """Non-manifold edges, inconsistent winding, or a disconnected dual graph."""

    category = "topology"


class DegenerateGeometryError(ShapeFormsError):
    """A triangle with (numerically) vanishing area."""

    category = "degenerate"


class OrientationError(ShapeFormsError):
    """A deformation gradient with non-positive determinant (no embedding)."""

    category = "orientation"


class ConditioningError(ShapeFormsError):
    """A matrix too close to singular for a stable decomposition."""

    category = "conditioning"


class CutLocusError(ShapeFormsError):
    """Rotation logarithm requested at (or numerically at) angle pi."""

    category = "cutlocus"


class ReferenceMismatchError(ShapeFormsError):
    """Objects bound to different reference shapes were combined."""

    category = "mismatch"


class ConvergenceError(ShapeFormsError):
    """An iterative solver exhausted its iteration budget."""

    category = "convergence"
