class UnsupportedDimensionError(ValueError):
    """Closed-form path called on a non-planar pair."""


class NumericalError(RuntimeError):
    """Non-finite value or singular solve; ``payload`` carries diagnostics."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = dict(payload or {})
