"""Exception hierarchy shared by all modules."""


class AsymregError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(AsymregError, ValueError):
    """An argument violates a documented precondition."""


class ConsistencyError(AsymregError, RuntimeError):
    """An internal invariant was found broken (e.g. singular I + M)."""


class UnsupportedRepresentation(AsymregError, TypeError):
    """The operation is not available for this operator representation."""


class NumericFailure(AsymregError, ArithmeticError):
    """A non-finite value appeared during iteration."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class InstanceError(AsymregError, ValueError):
    """Base class for instance-file problems; ``path`` names the field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ParseError(InstanceError):
    """Instance text is not valid JSON or does not match the schema."""


class ValidationError(InstanceError):
    """Instance parsed but violates an invariant (alpha range, b, d, ...)."""
