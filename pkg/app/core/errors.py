"""
Error types raised by the solvers
"""


class LabError(Exception):
    """Base class for every solver error"""


class InputError(LabError, ValueError):
    """Rejected input: malformed arguments or unmet preconditions"""


class OrderMismatchError(InputError):
    """Series operands of different truncation order"""


class SingularReciprocalError(LabError):
    """Reciprocal requested for a series with vanishing constant term"""


class SeriesDomainError(InputError):
    """Real power of a series whose constant term is not positive"""


class DegenerateProfileError(InputError):
    """r/f'(r) requested where f'(0) != 0 or f''(0) == 0"""


class RegimeError(InputError):
    """Operation called outside its exponent regime (p < n, p = n, p > n)"""


class ContractionError(InputError):
    """Series order too low for the fixed-point map to contract"""


class ConvergenceError(LabError):
    """Iteration did not converge within its budget"""


class InvariantViolation(LabError):
    """A mathematical invariant failed on computed output"""


class StiffnessError(LabError):
    """Adaptive step size fell below the configured minimum"""


class DomainError(InputError):
    """Evaluation point outside the domain of the constructed solution"""


class RangeError(LabError):
    """Shooting bracket not found within the admissible central values"""


class BandViolationError(LabError):
    """Fixed-point iterate left the admissible band around the leading term"""


class SingularityError(LabError):
    """Singular endpoint integral failed to converge"""
