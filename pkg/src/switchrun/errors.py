"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class WindowRangeError(DomainError):
    """A 1-based window (m, n) does not fit inside a sequence of length N."""

    def __init__(self, m: int, n: int, N: int):
        super().__init__(
            f"window start m={m}, length n={n} does not fit in a sequence "
            f"of N={N} trials (need m >= 1, n >= 1, m + n - 1 <= N)"
        )
        self.m = m
        self.n = n
        self.N = N


class InternalConsistencyError(RuntimeError):
    """A computed quantity violates an identity that must hold.

    Raised e.g. when a probability bound lands outside [0, 1] by more than
    the documented tolerance; this signals a formula transcription bug, not
    bad user input.
    """


class ConfigError(ValueError):
    """An experiment config file cannot be parsed or has invalid values."""
