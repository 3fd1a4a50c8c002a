"""Exception hierarchy.  Every library error derives from ``NHWalkError``."""


class NHWalkError(Exception):
    pass


class ConfigurationError(NHWalkError, ValueError):
    """Invalid lattice or run configuration."""


class DomainError(NHWalkError, ValueError):
    """Argument outside the domain of an operation."""


class NumericalError(NHWalkError, ArithmeticError):
    """A numerical tolerance could not be met."""


class IntegrationError(NumericalError):
    pass


class SingularPropagatorError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class BranchError(NumericalError):
    """An eigenphase too close to the branch cut of the matrix logarithm."""


class WindowError(NumericalError):
    """Boundary reflections contaminate a Lyapunov window."""


class GBZError(NumericalError):
    pass


class NonCircularGBZError(GBZError):
    pass


class ScaleError(NumericalError):
    pass


class StabilityError(NumericalError):
    """Density-matrix invariant violated after a step."""


class ConstructionError(NHWalkError):
    """An operator lift disagrees with the Fock-space oracle."""
