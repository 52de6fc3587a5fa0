"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDataError(ValueError):
    """The data do not carry enough information for the requested estimate."""


class DegenerateRequestError(ValueError):
    """The request itself is meaningless (e.g. a zero-size perturbation)."""


class NumericError(FloatingPointError):
    """A non-finite value appeared inside the network."""

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer


class TrainingDivergedError(RuntimeError):
    def __init__(self, message, epoch=None, batch=None, member=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.member = member


class UnreachableDirectionError(RuntimeError):
    """The perturbed network did not move the output of interest in the requested direction."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction
