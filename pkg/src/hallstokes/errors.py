"""Exception types shared across the package."""


class HallStokesError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HallStokesError, ValueError):
    pass


class DomainError(HallStokesError, ValueError):
    pass


class TruncationError(DomainError):
    pass


class SingularConfigurationError(DomainError):
    pass


class WallProximityError(DomainError):
    pass


class RayError(DomainError):
    pass


class OrderingError(DomainError):
    pass


class ExtractionError(HallStokesError, RuntimeError):
    pass


class StiffnessError(HallStokesError, RuntimeError):
    pass


class ResourceError(HallStokesError, RuntimeError):
    pass


class ExperimentError(HallStokesError, RuntimeError):
    pass
