"""Exception types shared across the package."""


class AdxError(Exception):
    """Base class for all adx-lab errors."""


class InputError(AdxError):
    """Invalid user input: bad parameters, malformed files, out-of-range bands."""


class ConvergenceError(AdxError):
    """A numerical solve failed to converge within its iteration budget."""


class AllocationError(AdxError):
    """Branch allocation could not cover the target support.

    Attributes carry diagnostics: `smallest_failing_l` is the largest branch
    count attempted, `residual_measure` the bandwidth left unassigned at it.
    """

    def __init__(self, msg, smallest_failing_l, residual_measure):
        super().__init__(msg)
        self.smallest_failing_l = smallest_failing_l
        self.residual_measure = residual_measure
