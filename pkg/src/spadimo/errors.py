"""Exception hierarchy shared by every module."""


class SpadimoError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(SpadimoError, ValueError):
    pass


class SingularMatrix(SpadimoError, ArithmeticError):
    pass


class DegenerateColumn(SpadimoError, ValueError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column} has zero Qn scale")


class DegenerateWeights(SpadimoError, ValueError):
    pass


class ZeroDirection(SpadimoError, ArithmeticError):
    pass


class ZeroCovariance(SpadimoError, ArithmeticError):
    pass


class EmptySelection(SpadimoError, ArithmeticError):
    pass


class DegenerateComponent(SpadimoError, ArithmeticError):
    pass


class NotOutlying(SpadimoError, ValueError):
    def __init__(self, case, distance_sq=None, cutoff=None):
        self.case = case
        self.distance_sq = distance_sq
        self.cutoff = cutoff
        msg = f"case {case} is not outlying"
        if distance_sq is not None:
            msg += f" (o^2={distance_sq:.6g} < cutoff {cutoff:.6g})"
        super().__init__(msg)


class ParseError(SpadimoError, ValueError):
    def __init__(self, message, lines=()):
        self.lines = tuple(lines)
        super().__init__(message)


class EmptyInput(SpadimoError, ValueError):
    pass


class UsageError(SpadimoError, ValueError):
    pass
