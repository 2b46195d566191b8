"""Exception hierarchy shared by every module of the package."""


class GradCodeError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class NotPrimePower(GradCodeError, ValueError):
    pass


class DivideByZero(GradCodeError, ZeroDivisionError):
    pass


class ZeroVector(GradCodeError, ValueError):
    pass


class InvalidDimension(GradCodeError, ValueError):
    pass


class UnsupportedOrder(GradCodeError, ValueError):
    pass


class NotSymmetric(GradCodeError, ValueError):
    pass


class IndexOutOfRange(GradCodeError, IndexError):
    pass


class NotUniform(GradCodeError, ValueError):
    pass


class NotBalanced(GradCodeError, ValueError):
    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class InvalidResolution(GradCodeError, ValueError):
    pass


class UnverifiedDesign(GradCodeError, ValueError):
    pass


class Indivisible(GradCodeError, ValueError):
    pass


class WrongKind(GradCodeError, TypeError):
    pass


class MethodUnavailable(GradCodeError, ValueError):
    pass


class TooLarge(GradCodeError, ValueError):
    pass


class SingularUpdate(GradCodeError, ArithmeticError):
    pass


class NotInClassC(GradCodeError, ValueError):
    pass


class EtaTooLarge(GradCodeError, ValueError):
    pass
