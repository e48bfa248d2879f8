"""Exception hierarchy shared by all ergolab modules.

The CLI maps these onto process exit codes: configuration and parameter
problems exit 2, failed numerical assertions exit 3, margin/domain
violations exit 4.
"""


class ErgolabError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ErgolabError):
    """Malformed or incomplete experiment configuration."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ParameterError(ErgolabError):
    """A numeric parameter violates a stated precondition."""


class ModelMismatchError(ErgolabError):
    """Group elements do not belong to the model they were used with."""


class IntegrationDomainError(ErgolabError):
    """Integrand evaluated to a non-finite value on the window."""


class DegenerateWindowError(ErgolabError):
    """Window too small (or of zero mass) for the requested operation."""


class BoundaryUncertaintyError(ErgolabError):
    """Query point too close to the window edge for a trustworthy answer."""


class NestingViolationError(ErgolabError):
    """A supposedly nested family of partitions fails to be nested."""


class ExhaustedFiltrationError(ErgolabError):
    """No qualifying level exists within the filtration's maximum level."""


class PositivityError(ErgolabError):
    """An orbit class has (numerically) zero mass where positive is required."""


class PreconditionError(ErgolabError):
    """A group element fails the membership precondition of an identity."""


class CriterionInapplicableError(ErgolabError):
    """The requested classifier is only defined for probability carriers."""


class SamplerInapplicableError(ErgolabError):
    """Rejection sampling needs a finite density supremum on the window."""


class NonsingularityError(ErgolabError):
    """The integrability condition for a nonsingular suspension fails."""


class MarginError(ErgolabError):
    """Translated supports escape the working window; enlarge the margin."""


class NumericCheckError(ErgolabError):
    """An invariant asserted by an experiment failed numerically."""
