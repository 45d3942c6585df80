class NCQMError(Exception):
    """Base class for every error raised by the bracket library."""


class ConfigurationError(NCQMError):
    """Raise when jets with different base points or orders are combined."""


class OrderExceededError(NCQMError):
    """Raise when a derivative beyond the order of a jet is requested."""


class SingularDivisorError(NCQMError):
    """Raise when a jet is divided by a jet with a vanishing constant term."""

    def __init__(self, base_point: tuple[float, float]) -> None:
        self.base_point = base_point
        super().__init__(f"Division by a jet with zero constant term at {base_point}")


class SingularProfileError(NCQMError):
    """Raise when 1 + θ f(α r²) vanishes or changes sign."""

    def __init__(self, message: str, point: tuple[float, float]) -> None:
        self.point = point
        super().__init__(f"{message} at (x, y) = {point}")


class SingularStructureError(NCQMError):
    """Raise when the symplectic structure degenerates (d blows up)."""

    def __init__(self, message: str, point: tuple[float, float]) -> None:
        self.point = point
        super().__init__(f"{message} at (x, y) = {point}")


class UnsupportedProfileError(NCQMError):
    """Raise when a closed form is asked for a profile it was not derived for."""


class ConsistencyError(NCQMError):
    """Raise when a runtime check of an implicit identity fails."""


class LszDomainError(NCQMError):
    """Raise when the internal LSZ Lagrangian is evaluated at θ = 0."""


class ConfigError(NCQMError):
    """Raise for invalid run configurations, naming the offending field."""

    def __init__(self, field_path: str, message: str) -> None:
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")
