class FlatcoreError(Exception):
    """Base class for every error raised by the laboratory"""
    exit_code = 1


class InvalidArgument(FlatcoreError, ValueError):
    """An operation was called outside its admissible inputs"""
    exit_code = 2


class InvalidConfiguration(FlatcoreError, ValueError):
    """A numerical configuration cannot be honoured"""
    exit_code = 2


class OutOfRegime(FlatcoreError, ValueError):
    """Parameters fall outside the regime a formula is stated for"""
    exit_code = 2


class InsufficientData(FlatcoreError, ValueError):
    """Not enough resolved samples to fit"""
    exit_code = 1


class NoSolutionRegime(FlatcoreError):
    """eps is at or beyond the existence threshold eps_a"""
    exit_code = 3

    def __init__(self, eps, eps_a, guard):
        self.eps = eps
        self.eps_a = eps_a
        self.guard = guard
        super().__init__(
            f'eps={eps:.6g} is not below {guard:.2f}*eps_a (eps_a={eps_a:.6g}); '
            f'no solution exists for eps >= eps_a when p = q'
        )


class ConvergenceFailure(FlatcoreError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance"""
    exit_code = 4

    def __init__(self, message, last_iterate=None, report=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.report = report


class VerificationFailure(FlatcoreError):
    """A verification suite reported a failing check"""
    exit_code = 5


class GuardViolation(FlatcoreError):
    """A nondegeneracy guard of an inequality check does not hold"""

    def __init__(self, inequality, count):
        self.inequality = inequality
        self.count = count
        super().__init__(f'{inequality}: guard violated for {count} samples')


def exit_code_for(error):
    """Process exit status for an exception raised inside a command"""
    if isinstance(error, FlatcoreError):
        return error.exit_code
    if isinstance(error, ValueError):
        return 2
    return 1
