"""Exception types shared by all modules."""


class WindingError(Exception):
    """Base class for every error raised by this package."""


class DomainError(WindingError, ValueError):
    pass


class InvalidRange(WindingError, ValueError):
    pass


class HypothesisViolated(WindingError, ValueError):
    pass


class DegenerateDenominator(WindingError, ZeroDivisionError):
    pass


class InvalidBins(WindingError, ValueError):
    pass


class NonConvergence(WindingError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance.

    ``label`` names the integral that failed so callers (the CLI in
    particular) can report it.
    """

    def __init__(self, message, *, label=None, estimate=None, error=None):
        super().__init__(message)
        self.label = label
        self.estimate = estimate
        self.error = error


class NonFiniteSample(NonConvergence):
    pass


class EnvelopeViolated(NonConvergence):
    pass


class StepBudgetExceeded(WindingError, RuntimeError):
    def __init__(self, message, *, path_index=None):
        super().__init__(message)
        self.path_index = path_index
