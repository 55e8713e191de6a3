"""Exception types shared across the package."""


class VolterraLevyError(Exception):
    pass


class DomainError(VolterraLevyError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ConfigurationError(VolterraLevyError, ValueError):
    """An object was built with inconsistent parameters."""


class QuadratureError(VolterraLevyError, RuntimeError):
    """Adaptive quadrature did not reach its tolerance within budget."""


class BudgetError(VolterraLevyError, RuntimeError):
    """A computation would exceed its configured work cap."""


class FitQualityError(VolterraLevyError, RuntimeError):
    """A regression used for an estimate has too poor a fit to be trusted."""


class NotFoundError(VolterraLevyError, RuntimeError):
    pass


class NonContractionError(VolterraLevyError, RuntimeError):
    """A fixed point or sewing iteration failed to contract."""


class RegularityError(VolterraLevyError, RuntimeError):
    """A measured regularity constant exceeds its configured bound."""


class LatticeMismatchError(VolterraLevyError, ValueError):
    pass
