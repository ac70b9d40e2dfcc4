"""Exception hierarchy shared by the replicated-set designs and the simulator."""


class OrsetLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidReplicaError(OrsetLabError, IndexError):
    """A replica index is outside ``[0, n)``."""


class ConfigurationError(OrsetLabError, ValueError):
    """Inconsistent scenario configuration, e.g. vectors of different lengths."""


class LookupFailure(OrsetLabError, KeyError):
    """An event id or message id is not known."""


class DeliveryContractError(OrsetLabError):
    """An effect was delivered in violation of its delivery precondition."""


class EnumerationLimitError(OrsetLabError):
    """A requested enumeration exceeds the combinatorial guard."""


class InvariantViolation(OrsetLabError):
    """A payload invariant does not hold after a step."""


class ScenarioError(OrsetLabError):
    """A scenario file failed to parse or validate.

    ``index`` names the offending event when there is one.
    """

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"event {index}: {message}"
        super().__init__(message)
        self.index = index
