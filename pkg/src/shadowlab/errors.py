"""Exception types shared across the toolkit."""


class ShadowlabError(Exception):
    """Base class for all toolkit-specific failures."""


class NotApplicableError(ShadowlabError):
    """A smallness hypothesis of a sufficient condition is violated.

    Carries ``binding``, a short description of the violated inequality.
    """

    def __init__(self, message, binding=None):
        super().__init__(message)
        self.binding = binding


class AdmissibilityError(ShadowlabError):
    """The pseudosolution violates a precondition (size or containment)."""


class ContainmentError(ShadowlabError):
    """An orbit left the prescribed region before the requested horizon."""

    def __init__(self, message, exit_time=None):
        super().__init__(message)
        self.exit_time = exit_time


class HypothesisViolatedError(ShadowlabError):
    """A pointwise hypothesis failed; ``witness`` is an offending sample."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonconvergenceError(ShadowlabError):
    """Fixed-point iteration hit the iteration cap without converging."""

    def __init__(self, message, last_ratio=None, iterations=None):
        super().__init__(message)
        self.last_ratio = last_ratio
        self.iterations = iterations


class StiffnessError(ShadowlabError):
    """Integrator step size underflowed."""


class EvaluationError(ShadowlabError):
    """A right-hand side returned a non-finite value."""


class DomainError(ShadowlabError):
    """Requested time lies outside the maximal existence interval."""


class RegistryError(ShadowlabError):
    """Unknown system name or invalid construction parameters."""


class DataError(ShadowlabError):
    """Input samples are insufficient for the requested measurement."""


class StructureError(ShadowlabError):
    """Operation needs a semilinear split the system does not provide."""


class ConfigError(ShadowlabError):
    """Malformed configuration input."""
