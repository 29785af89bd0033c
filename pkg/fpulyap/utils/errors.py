class FpuLyapError(Exception):
    pass


class ModelError(FpuLyapError):
    pass


class PotentialOverflowError(FpuLyapError):
    pass


class IntegrationError(FpuLyapError):
    """Blow-up during integration; carries the time and step where it was detected."""

    def __init__(self, message: str, t: float = float("nan"), step: int = -1) -> None:
        super().__init__(f"{message} (t={t!r}, step={step})")
        self.t = t
        self.step = step


class SamplingError(FpuLyapError):
    pass


class FitError(FpuLyapError):
    pass


class TheoryNotApplicableError(FpuLyapError):
    pass


class CheckpointError(FpuLyapError):
    pass


class ConfigError(FpuLyapError):
    pass
