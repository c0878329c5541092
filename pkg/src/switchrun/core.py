"""Bernoulli trial model and switch-run statistics.

A "switch" is an adjacent pair of trials with different outcomes.  A block
of t trials in which every adjacent pair differs contains t - 1 consecutive
switches; the longest such count over a sequence of N trials is the statistic
M everything else in this package bounds, computes, and simulates.

All operation contracts index trials 1-based (X_1 ... X_N); internal storage
is a 0-based numpy array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, WindowRangeError

# Chunk length for streaming scans; keeps auxiliary memory constant while
# staying long enough that numpy dominates the loop overhead.
_CHUNK = 1 << 20


@dataclass(frozen=True)
class BernoulliParams:
    """Success probability p with the derived quantities every formula uses.

    q = 1 - p, pq = p*q, and lam = 1/sqrt(pq): the base of all logarithms in
    the limit theorems (lam = 2 for a fair coin).  Requires 0 < p < 1 strictly,
    which forces pq <= 1/4 and lam >= 2.
    """

    p: float
    q: float = field(init=False)
    pq: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must satisfy 0 < p < 1 strictly, got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", 1.0 - p)
        object.__setattr__(self, "pq", p * (1.0 - p))
        object.__setattr__(self, "lam", 1.0 / math.sqrt(p * (1.0 - p)))


class BitSequence:
    """An immutable, ordered, finite sequence of 0/1 trial outcomes."""

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise DomainError(f"bits must be one-dimensional, got shape {arr.shape}")
        if arr.dtype == np.uint8:
            u = arr.copy()
            bad = u > 1
        else:
            u = arr.astype(np.uint8)
            # catches values outside {0, 1} including ones mangled by the cast
            bad = (u > 1) | (u != arr)
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainError(f"element at index {i} is {arr[i]!r}, expected 0 or 1")
        u.flags.writeable = False
        self._bits = u

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BitSequence":
        """Adopt a trusted uint8 0/1 array without validation or copy."""
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj._bits = arr
        return obj

    @classmethod
    def from_string(cls, s: str) -> "BitSequence":
        """Parse an ASCII string of '0'/'1' characters."""
        try:
            raw = s.encode("ascii")
        except UnicodeEncodeError as e:
            raise DomainError(f"bit string must be ASCII '0'/'1': {e}") from None
        arr = np.frombuffer(raw, dtype=np.uint8)
        bad = (arr != ord("0")) & (arr != ord("1"))
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainError(f"character {s[i]!r} at position {i} is not '0' or '1'")
        return cls._wrap((arr - ord("0")).astype(np.uint8))

    @property
    def array(self) -> np.ndarray:
        """Read-only uint8 array of the outcomes (0-based)."""
        return self._bits

    @property
    def n(self) -> int:
        return self._bits.size

    def __len__(self) -> int:
        return self._bits.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitSequence):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash(self._bits.tobytes())

    def to_string(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def tolist(self) -> list:
        return self._bits.tolist()

    def window(self, m: int, n: int) -> "BitSequence":
        """The sub-sequence of n trials starting at 1-based trial m."""
        _check_window(m, n, self.n)
        return BitSequence._wrap(self._bits[m - 1 : m - 1 + n])

    def __repr__(self) -> str:
        s = self.to_string()
        if len(s) > 40:
            s = s[:37] + "..."
        return f"BitSequence({s!r}, n={self.n})"


@dataclass(frozen=True)
class SwitchRunStats:
    """Switch totals plus the longest consecutive-switch run.

    longest_run is the number of switches in the best run (a fully
    alternating window of longest_run + 1 trials).  window_start is the
    1-based index of the first trial of the leftmost such window; 1 by
    convention when there is no switch at all.
    """

    total_switches: int
    longest_run: int
    window_start: int


def _check_window(m: int, n: int, N: int) -> None:
    if m < 1 or n < 1 or m + n - 1 > N:
        raise WindowRangeError(m, n, N)


def switch_count(seq: BitSequence, m: int, n: int) -> int:
    """Total switches among the n trials starting at 1-based trial m.

    Returns 0 for n = 1 (a single trial has no adjacent pair).
    """
    _check_window(m, n, len(seq))
    if n == 1:
        return 0
    bits = seq.array
    a = m - 1
    return int(np.count_nonzero(bits[a + 1 : a + n] != bits[a : a + n - 1]))


class RunScan:
    """Streaming accumulator for switch totals and the longest switch run.

    Feed it switch-indicator chunks in order via update(mask, base), where
    base is the 0-based index of the chunk's first switch position (switch
    position j sits between trials j and j+1, 0-based).  Runs crossing chunk
    boundaries are merged; ties in run length resolve to the leftmost run.
    """

    __slots__ = ("total", "best_len", "best_start", "_carry_len", "_carry_start")

    def __init__(self):
        self.total = 0
        self.best_len = 0
        self.best_start = 0
        self._carry_len = 0
        self._carry_start = 0

    def update(self, mask: np.ndarray, base: int) -> None:
        self.total += int(np.count_nonzero(mask))
        edges = np.flatnonzero(np.diff(mask.astype(np.int8), prepend=0, append=0))
        if edges.size == 0:
            # no run touches this chunk; any carried run was already counted
            # as a candidate when it was last extended
            self._carry_len = 0
            return
        starts = edges[0::2]
        ends = edges[1::2]
        lens = ends - starts
        abs_starts = starts + base
        if self._carry_len and starts[0] == 0:
            lens[0] += self._carry_len
            abs_starts[0] = self._carry_start
        k = int(np.argmax(lens))  # leftmost maximum within the chunk
        if lens[k] > self.best_len:
            self.best_len = int(lens[k])
            self.best_start = int(abs_starts[k])
        if ends[-1] == mask.size:
            self._carry_len = int(lens[-1])
            self._carry_start = int(abs_starts[-1])
        else:
            self._carry_len = 0

    def stats(self) -> SwitchRunStats:
        # switch index j corresponds to 1-based trials (j+1, j+2)
        return SwitchRunStats(
            self.total, self.best_len, self.best_start + 1 if self.best_len else 1
        )


def longest_switch_run(seq: BitSequence) -> SwitchRunStats:
    """Longest consecutive-switch run of the whole sequence.

    Single streaming pass over the trials; auxiliary memory is bounded by a
    fixed chunk size regardless of N.  Ties in run length resolve to the
    leftmost window.
    """
    bits = seq.array
    if bits.size <= 1:
        return SwitchRunStats(0, 0, 1)
    scan = RunScan()
    n_sw = bits.size - 1
    for a in range(0, n_sw, _CHUNK):
        b = min(a + _CHUNK, n_sw)
        scan.update(bits[a + 1 : b + 1] != bits[a:b], a)
    return scan.stats()


def windowed_longest(seq: BitSequence, m: int, n_w: int) -> int:
    """Longest switch run within the window of n_w trials starting at m."""
    return longest_switch_run(seq.window(m, n_w)).longest_run


def window_scan_oracle(seq: BitSequence) -> int:
    """Longest switch run by explicit window scanning; test oracle only.

    Tries every window length n from N down to 1 and every start, checking
    whether the window's switch total equals n - 1 (fully alternating).
    Deliberately naive and independent of longest_switch_run.
    """
    N = len(seq)
    if N < 1:
        raise DomainError("window_scan_oracle requires at least one trial")
    x = seq.tolist()
    for n in range(N, 0, -1):
        for a in range(0, N - n + 1):
            s = sum(x[j] != x[j + 1] for j in range(a, a + n - 1))
            if s == n - 1:
                return n - 1
    return 0  # unreachable: every single trial is a trivial window
