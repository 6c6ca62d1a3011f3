"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value.

    ``field`` names the offending configuration key so callers (the CLI in
    particular) can report it in machine-parsable form.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class NumericalError(RuntimeError):
    """A numerical routine failed; ``operation`` names it."""

    def __init__(self, operation, message):
        super().__init__(f"{operation}: {message}")
        self.operation = operation
        self.message = message


class SpectralHitError(NumericalError):
    """The shift ``i*mu`` is numerically an eigenvalue of the generator."""

    def __init__(self, mu, nearest=None):
        msg = f"i*mu with mu={mu!r} is numerically in the spectrum"
        if nearest is not None:
            msg += f" (nearest eigenvalue {nearest!r})"
        super().__init__("resolvent", msg)
        self.mu = mu
        self.nearest = nearest
