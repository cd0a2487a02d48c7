"""Exception hierarchy shared by the numerical modules and the CLI."""


class ConfigError(ValueError):
    """Invalid scenario or parameter value; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalError(RuntimeError):
    """A computation failed; ``stage`` names the pipeline stage when known."""

    stage = "numerics"


class StepSizeError(NumericalError):
    stage = "integration"


class WindowError(NumericalError):
    stage = "integration"


class NoPhotonError(NumericalError):
    stage = "photon extraction"


class InfeasibleError(NumericalError):
    stage = "protocol"


class OptimizationError(NumericalError):
    stage = "optimization"


class UnderdeterminedError(InfeasibleError):
    """Every value of the unknown satisfies the condition."""
