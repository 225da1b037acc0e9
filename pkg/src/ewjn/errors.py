"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """A scene configuration document is malformed.

    ``path`` names the offending location, e.g. ``objects[0].radius``.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConvergenceWarning(UserWarning):
    """A multipole series or quadrature is evaluated where it converges slowly."""


class AccuracyWarning(UserWarning):
    """A numerical result is expected to be less accurate than usual."""


class OverlapWarning(UserWarning):
    """Bounding spheres of two scene objects intersect."""
