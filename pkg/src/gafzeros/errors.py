"""Exception hierarchy shared by all gafzeros modules."""


class GafError(Exception):
    """Base class for every error raised by gafzeros."""


class InvalidArgumentError(GafError, ValueError):
    pass


class DomainError(GafError, ValueError):
    """A point lies outside the open unit disk where the kernel is defined."""


class NumericFailure(GafError, ArithmeticError):
    pass


class NotPSDError(NumericFailure):
    def __init__(self, eigenvalue):
        self.eigenvalue = float(eigenvalue)
        super().__init__(f"matrix is not positive semidefinite: eigenvalue {self.eigenvalue:.3e}")


class IllConditionedError(NumericFailure):
    def __init__(self, det):
        self.det = float(det)
        super().__init__(f"Gram matrix of the points is near singular: det = {self.det:.3e}")


class DegenerateKernelError(NumericFailure):
    pass


class SizeLimitError(GafError, ValueError):
    pass
