"""Exception hierarchy shared by all modules."""


class ListIdentError(Exception):
    """Base class for library errors."""


class IndexOutOfRange(ListIdentError, IndexError):
    pass


class UndecidableFamily(ListIdentError):
    """The predicate cannot be decided for this collection variant."""


class ConditionNotSatisfied(ListIdentError):
    """An operation needs the k-Angluin condition and it fails."""


class ConditionSatisfied(ListIdentError):
    """An operation needs the k-Angluin condition to fail and it holds."""


class NoDescendant(ListIdentError):
    pass


class InvariantViolation(ListIdentError):
    """A runtime-checked invariant failed; always an implementation bug."""


class ResidueNonEmpty(ListIdentError):
    pass


class DepthTooLarge(ListIdentError):
    pass


class InsufficientPositivePoints(ListIdentError):
    pass


class NonTrivialityUnwitnessed(ListIdentError):
    pass


class ParseError(ListIdentError):
    """Config error; ``errors`` holds one message per offending field."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class InsufficientStream(ListIdentError):
    """The stream ran out before the requested number of bits was extracted."""
