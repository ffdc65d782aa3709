"""Exception types raised across the package."""


class MomentError(ValueError):
    """Raised when a requested moment (or expectation) is not finite."""

    def __init__(self, what: str = "moment does not exist"):
        super().__init__(what)


class InadmissibleTheta(ValueError):
    pass


class AsymmetricMarginals(ValueError):
    pass


class FamilyDimensionError(ValueError):
    """A dependence family was asked for more coordinates than it defines."""


class SupportError(ValueError):
    pass


class AliasingError(ArithmeticError):
    pass


class TruncationError(ArithmeticError):
    pass


class ConfigError(ValueError):
    pass
