"""Exception types raised across the package."""


class ShortSolError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ShortSolError, ValueError):
    pass


class DomainError(ShortSolError, ValueError):
    """A real parameter (box aspect, cube scale, ...) is outside its domain."""


class NormalizationError(ShortSolError, ValueError):
    """A congruence row shares a factor with the modulus."""


class DegenerateBasisError(ShortSolError, ValueError):
    pass


class FormulaInapplicableError(ShortSolError, ValueError):
    pass


class SizeLimitError(ShortSolError, RuntimeError):
    """An enumeration guard was exceeded."""


class SamplingError(ShortSolError, RuntimeError):
    pass


class NotFoundError(ShortSolError, LookupError):
    pass
