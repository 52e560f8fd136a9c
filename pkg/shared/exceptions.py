# error hierarchy shared by the nonloc package


class NonlocalityError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(NonlocalityError, ValueError):
    """Argument outside the domain of an operation (x <= 0 for K_nu, d <= 0, ...)."""


class UnimplementedOrderError(NonlocalityError, NotImplementedError):
    """Closed form requested for an (nu, mu) pair that only has a quadrature route."""

    def __init__(self, nu, mu):
        self.nu = nu
        self.mu = mu
        super().__init__(f"no closed form for A integral with nu={nu}, mu={mu}")


class QuadratureError(NonlocalityError):
    """Adaptive quadrature exhausted its budget above the requested tolerance.

    Carries the best value obtained and its error estimate so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message, value=None, error_estimate=None):
        self.value = value
        self.error_estimate = error_estimate
        super().__init__(message)


class GridResolutionError(NonlocalityError):
    """Two refinements of a radial grid disagree by more than the accepted bound."""

    def __init__(self, message, coarse=None, fine=None):
        self.coarse = coarse
        self.fine = fine
        super().__init__(message)


class ToleranceBreachError(NonlocalityError):
    """A computed quantity missed its analytic reference or acceptance bound."""

    def __init__(self, message, report=None):
        self.report = report or []
        super().__init__(message)
