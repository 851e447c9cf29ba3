"""Exception types raised by the solver library."""


class DriventlsError(Exception):
    """Base class for all library errors."""


class QuadratureFailure(DriventlsError):
    """An adaptive integration could not meet its error target."""


class DegenerateFrequencies(DriventlsError):
    """Two distinct Floquet frequency labels coincide numerically."""


class NoConvergence(DriventlsError):
    """An iterative solver exhausted its iteration budget."""


class UndrivenDegenerate(DriventlsError):
    """Self-consistency is ill-posed: no drive but finite bath coupling."""


class PolaronDivergence(DriventlsError):
    """The closed-form renormalization factor 1 + F'(0) is too close to zero."""


class SingularSystem(DriventlsError):
    """The residue system kernel does not have dimension one."""


class StepTooCoarse(DriventlsError):
    """Halving the integrator step changed the result beyond tolerance."""


class NotSettled(DriventlsError):
    """A trajectory had not reached its periodic steady state inside the run."""


class ConfigError(DriventlsError):
    """Invalid or inconsistent run configuration."""


class IllConditionedWarning(UserWarning):
    """The residue system condition number is large; results are flagged, not rejected."""
