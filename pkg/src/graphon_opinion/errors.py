"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(ArithmeticError):
    """A requested integral or norm is infinite."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SchemeError(ValueError):
    """Time step and truncation bound violate the Monte Carlo stability bound."""


class ConfigError(ValueError):
    """Invalid simulation configuration.

    ``key`` holds the dotted path of the offending entry when known.
    """

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
