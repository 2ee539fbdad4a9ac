"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class CoefficientError(EngineError):
    """Ring mismatch or an operation not defined in the given ring."""


class ShapeError(EngineError):
    """Incompatible spaces, arities or slot signatures."""


class StructureError(EngineError):
    """A structural invariant is violated (degrees, relations preconditions)."""


class DocumentError(EngineError):
    """Malformed or invalid serialized document.

    ``path`` locates the offending entry inside the JSON payload.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message
