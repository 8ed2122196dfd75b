"""Exception hierarchy shared by every module."""


class MDLearnError(Exception):
    """Base class for all errors raised by this package."""


class ZeroProbability(MDLearnError, ValueError):
    pass


class IncompatibleModel(MDLearnError, ValueError):
    """A form observed in the data has zero probability under the model."""


class RestrictionContradicted(MDLearnError, ValueError):
    """A form the restricted grammar disallows occurs in the corpus."""


class ZeroFrequency(MDLearnError, ValueError):
    pass


class EmptySample(MDLearnError, ValueError):
    pass


class DegenerateInput(MDLearnError, ValueError):
    pass


class InsufficientData(MDLearnError, ValueError):
    pass


class InvalidFamily(MDLearnError, ValueError):
    pass


class UnsupportedDistribution(MDLearnError, ValueError):
    """No closed form is registered for this parametric distribution."""


class FamilyExhausted(MDLearnError):
    """Every hypothesis was eliminated; the truth is not in the family."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"all hypotheses eliminated at step {step}")


class ParseError(MDLearnError, ValueError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ValidationError(MDLearnError, ValueError):
    pass
