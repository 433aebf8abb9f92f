"""Exception types raised across chaoslab."""


class ChaosLabError(Exception):
    pass


class AlphabetMismatch(ChaosLabError, ValueError):
    pass


class NegativeDistance(ChaosLabError, ValueError):
    pass


class NegativeTolerance(ChaosLabError, ValueError):
    pass


class FactorMismatch(ChaosLabError, ValueError):
    pass


class SignatureMismatch(ChaosLabError, ValueError):
    pass


class BudgetTooLarge(ChaosLabError, ValueError):
    pass


class ExactEqualityUnsupported(ChaosLabError, TypeError):
    pass


class OutsideDomain(ChaosLabError, ValueError):
    pass


class OutsideDisk(OutsideDomain):
    pass


class NoOracle(ChaosLabError, LookupError):
    pass


class MissingFixedPoint(ChaosLabError, ValueError):
    pass


class ConstructorPrecondition(ChaosLabError, ValueError):
    pass


class ConfigParse(ChaosLabError, ValueError):
    def __init__(self, path, field, message):
        self.path = path
        self.field = field
        super().__init__(f"{path}: field {field!r}: {message}")
