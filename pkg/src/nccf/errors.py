"""Exception types shared across the package."""

import numpy as np


class NotFactorClosed(ValueError):
    """A word set is not closed under taking prefixes and suffixes."""

    def __init__(self, witness, missing):
        self.witness = witness
        self.missing = missing
        from .freewords import format_word

        super().__init__(
            f"{format_word(witness)} is in the set but its factor "
            f"{format_word(missing)} is not"
        )


class ShapeMismatch(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NotIsometry(ValueError):
    pass


class InvalidKey(ValueError):
    pass


class UnsupportedSupport(ValueError):
    """The polynomial has a coefficient on a word outside the segment."""


class SingularResolvent(np.linalg.LinAlgError):
    pass


class ViolationError(AssertionError):
    """An inequality that must hold was violated; carries the offending report.

    A violation always indicates a bug in the numerics, never a mathematical
    counterexample.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
