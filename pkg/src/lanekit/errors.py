"""Exception hierarchy shared by all lanekit modules."""


class LanekitError(Exception):
    """Base class for every error raised by lanekit."""


class TooFewPointsError(LanekitError, ValueError):
    pass


class DuplicatePointError(LanekitError, ValueError):
    pass


class EmptySamplesError(LanekitError, ValueError):
    pass


class InvalidMuError(LanekitError, ValueError):
    pass


class InvalidScaleError(LanekitError, ValueError):
    pass


class EmptyFrameError(LanekitError, ValueError):
    pass


class InvalidSpecError(LanekitError, ValueError):
    pass


class InvalidStyleError(LanekitError, ValueError):
    pass


class NonInvertibleHomographyError(LanekitError, ValueError):
    pass


class EmptyGridError(LanekitError):
    """No seed was found on either side of the vehicle.

    The (all-lost) selection is attached as ``selection`` so callers can
    keep going with a degraded frame.
    """

    def __init__(self, message, selection=None):
        super().__init__(message)
        self.selection = selection


class NoRootError(LanekitError):
    pass


class BothInvalidError(LanekitError):
    pass


class LengthMismatchError(LanekitError, ValueError):
    pass


class ConfigError(LanekitError):
    pass
