"""Exception types shared across the package."""


class WrocError(Exception):
    """Base class for all package-specific errors."""


class DataFormatError(WrocError):
    """Malformed input data (CSV rows, scenario files, bad selectors).

    Carries an optional 1-based ``line`` pointing at the offending row.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateDensityError(WrocError):
    """Non-diseased density estimate vanished where the density ratio is needed."""


class SingularCovarianceError(WrocError):
    """Contrast covariance is singular and no ridge was allowed."""
