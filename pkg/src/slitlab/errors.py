"""Exception types shared across the toolkit."""


class SlitlabError(Exception):
    """Base class for all errors raised by this package."""


class UnknownSpeciesError(SlitlabError):
    """Species label not found in the built-in or user-registered table."""


class MasslessSpeciesError(SlitlabError):
    """Operation requires a massive particle (photon sentinel rejected)."""


class GridTooSmallError(SlitlabError):
    """Grid span or sampling violates the anti-aliasing sizing rule."""


class EmptyFieldError(SlitlabError):
    """Field carries no energy (zero transmission or all-zero amplitudes)."""


class ResolutionError(SlitlabError):
    """Requested analysis window is unresolvable at the profile's sampling."""


class NotApplicableError(SlitlabError):
    """Quantity is undefined for this input (e.g. no measurable width)."""


class ModelBoundError(SlitlabError):
    """Deflection-model output violates the narrow-line bound d < lambda*L/dx."""


class ConfigError(SlitlabError):
    """Configuration document failed parsing or validation."""


class PipelineError(SlitlabError):
    """A run failed; carries the name of the failing stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r}: {message}")
        self.stage = stage


class UnitError(ConfigError):
    """Dimensioned field missing or carrying an unknown unit suffix."""
