"""Exception hierarchy shared across the package."""


class GomtlError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(GomtlError):
    """Invalid hyperparameters, CLI arguments, or experiment configuration."""


class DimensionError(ConfigError):
    """Shapes of model, codes, and data do not line up."""


class SystemSizeError(ConfigError):
    """A dense linear system exceeds the configured size cap."""


class DataError(GomtlError):
    """Dataset contents violate an invariant."""


class DatasetParseError(DataError):
    """A dataset file could not be parsed; carries file and line context."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class NumericError(GomtlError):
    """A computation produced non-finite values or failed numerically."""


class SingularSystemError(NumericError):
    """A linear system was singular (possible only with zero regularization)."""
