"""Exception types shared across the package."""


class PolyconfError(Exception):
    """Base class; ``code`` is the stable identifier used in CLI diagnostics."""

    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class OutOfBox(PolyconfError):
    code = "OutOfBox"


class NotAntichain(PolyconfError):
    code = "NotAntichain"


class WeightsNotSorted(PolyconfError):
    code = "WeightsNotSorted"


class WrongArity(PolyconfError):
    code = "WrongArity"


class InvalidIdeal(PolyconfError):
    code = "InvalidIdeal"


class BracketInDimOne(PolyconfError):
    code = "BracketInDimOne"


class ParseError(PolyconfError):
    code = "ParseError"


class RectangularIdeal(PolyconfError):
    code = "RectangularIdeal"


class NotDecreasingNotBicolored(PolyconfError):
    code = "NotDecreasingNotBicolored"


class UnsupportedCase_11_Dprime(PolyconfError):
    code = "UnsupportedCase_11_Dprime"


class InconsistentRelators(PolyconfError):
    code = "InconsistentRelators"


class BudgetExceeded(PolyconfError):
    code = "BudgetExceeded"

    def __init__(self, message, watermark=None):
        super().__init__(message)
        self.watermark = watermark

    def to_dict(self):
        d = super().to_dict()
        d["watermark"] = self.watermark
        return d
