"""Exception hierarchy shared by the model, solvers, algorithms and CLI."""


class BwkError(Exception):
    """Base class for all lab errors."""


class ConfigError(BwkError):
    """Invalid configuration, schema or command-line usage."""


class InstanceError(BwkError):
    """Invalid instance data (budget above horizon, atoms outside [0, 1], bad index)."""


class DegenerateInstanceError(BwkError):
    """A problem-dependent algorithm was asked to run on a degenerate instance."""


class EstimatorError(BwkError):
    """Invalid estimator arguments."""


class LpError(BwkError):
    """Malformed LP input or a solver precondition violation."""


class ApproxFailedError(LpError):
    """The approximate solver could not certify an eps-feasible answer."""


class GenerationFailedError(BwkError):
    """Instance generator exhausted its attempts."""


class InvariantViolation(BwkError):
    """An internal invariant did not hold."""
