class InvalidArgument(ValueError):
    """Input violates a documented precondition."""


class GuardExceeded(RuntimeError):
    """A computation would exceed its size guard."""

    def __init__(self, message: str, estimate: int):
        super().__init__(message)
        self.estimate = estimate
