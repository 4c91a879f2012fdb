"""Exception types raised across the toolkit."""


class FormatError(ValueError):
    """Malformed graph, manifest or config input."""


class CapabilityError(RuntimeError):
    """A computation was requested beyond a documented size budget."""


class GenerationError(RuntimeError):
    """A random graph generator could not satisfy its constraints."""


class SamplingError(ValueError):
    """Triplet sampling is impossible for the given labelled set."""


class SplitError(ValueError):
    """A stratified split cannot be honoured for some class."""


class TrainingError(RuntimeError):
    """Embedder training diverged."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
