"""Exception hierarchy shared by every module of the package."""


class SatBackstepError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SatBackstepError, ValueError):
    """Invalid parameters, scenario documents or expressions."""


class JetOrderError(ConfigError):
    """Two jets of different truncation order were combined."""


class InfeasibleConstraintError(ConfigError):
    """The reference leaves the output corridor (alpha or beta not positive)."""


class NumericalFailure(SatBackstepError, ArithmeticError):
    """A non-finite value appeared in an evaluation or integration stage."""

    def __init__(self, message, time=None, stage=None):
        super().__init__(message)
        self.time = time
        self.stage = stage


class DivisionSingularity(NumericalFailure):
    """Jet division by a value whose magnitude is below ``EPS_DIV``."""


class TheoremViolation(SatBackstepError):
    """A guarantee that the closed loop should provide was falsified.

    ``time`` is filled in by the simulator when the violation aborts a run.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SaturationSingularity(TheoremViolation):
    """The plant input left the open interval (u_min, u_max)."""


class SaturationDomainError(SaturationSingularity):
    """The saturation gain was evaluated outside [u_min, u_max]."""


class BarrierViolation(TheoremViolation):
    """The constrained tracking error reached the barrier, |zeta| >= 1."""


class SingularPlantError(TheoremViolation):
    """A control gain g_i(x) came within ``EPS_DIV`` of zero."""


class InvariantViolation(TheoremViolation):
    """An internal sanity inequality failed (e.g. the logarithm inequality behind the barrier bound)."""
