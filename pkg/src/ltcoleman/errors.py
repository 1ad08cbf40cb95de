"""Exception hierarchy shared by every module."""


class LTColemanError(Exception):
    """Base class."""


class PrecisionExhausted(LTColemanError):
    """Precision loss exceeded the context's slack budget."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PrecisionAmbiguous(LTColemanError):
    """A zero/non-zero decision cannot be made at the available precision."""


class NoSolution(LTColemanError):
    """An equation has no solution at the requested truncation."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DegreeOverflow(LTColemanError):
    """A polynomial would not fit in the series truncation."""


class ResourceLimit(LTColemanError):
    """Requested object is larger than the configured cap."""


class IdentityFailure(LTColemanError):
    """A post-hoc verification of an identity failed."""
