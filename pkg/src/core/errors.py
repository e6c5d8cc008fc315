"""
Exception hierarchy for the Stackelberg simulator
Every error raised on purpose by the library derives from StackelbergError
"""


class StackelbergError(Exception):
    """Base class for all simulator errors"""
    pass


class ShapeMismatch(StackelbergError, ValueError):
    """Raised when tables or distributions do not have the expected dimensions"""
    pass


class ProfileCapExceeded(StackelbergError):
    """Raised when an exact sum would need more than profile_cap type profiles"""
    pass


class VariableCapExceeded(StackelbergError):
    """Raised when the joint LP reformulation would exceed its variable budget"""
    pass


class HorizonTooSmall(StackelbergError):
    """Raised when the horizon T is smaller than the number of regions UCB must visit"""
    pass


class FeedbackMismatch(StackelbergError):
    """Raised when a learner receives a feedback variant it cannot use"""
    pass


class InstanceValidationError(StackelbergError):
    """Raised when an instance document or table fails validation"""
    pass


class GridTooLarge(StackelbergError):
    """Raised when a brute-force grid search is requested for too many leader actions"""
    pass


class NotClassC(StackelbergError, ValueError):
    """Raised when a distribution is not a member of the +/-epsilon class"""
    pass


# Exit code 2 in the CLI
CAP_ERRORS = (ProfileCapExceeded, VariableCapExceeded, HorizonTooSmall, GridTooLarge)
