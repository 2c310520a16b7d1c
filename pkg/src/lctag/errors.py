"""Exception types shared across the toolkit."""


class InvalidInputError(ValueError):
    """Raised when an operation's preconditions are violated."""


class NumericalFailureError(RuntimeError):
    """Raised when training or optimization produces non-finite values."""


class CompatibilityError(RuntimeError):
    """Raised when a checkpoint and a label vocabulary disagree."""
