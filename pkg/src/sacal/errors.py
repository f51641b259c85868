"""Exception hierarchy shared across the package."""


class SACError(Exception):
    """Base class for every error raised by :mod:`sacal`."""


class DomainError(SACError, ValueError):
    """An argument lies outside the domain where the model is meaningful."""


class DegenerateRotation(SACError, ValueError):
    """The rotation is too small for the closed-form estimators to be defined."""

    def __init__(self, degrees: float, axis: str, message: str | None = None):
        self.degrees = degrees
        self.axis = axis
        super().__init__(
            message
            or f"degenerate {axis} rotation of {degrees!r} deg: rotation term below threshold"
        )


class PointAtInfinity(SACError, ArithmeticError):
    """A homography sent a finite point to the line at infinity."""


class NoCorrespondences(SACError):
    """No usable correspondence was available for an estimate."""


class ParseError(SACError):
    """A correspondence or config file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class ConfigError(SACError):
    """One or more configuration values failed validation.

    All problems are collected in :attr:`problems` so callers can report them
    together instead of one per run.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))
