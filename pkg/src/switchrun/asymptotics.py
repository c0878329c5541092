"""Threshold and rate functions from the limit theorems for M_N.

Everything is expressed in logarithms to the base lam = 1/sqrt(pq).  The
strong law says M_N / log_lam N -> 1 almost surely; the finer thresholds are

    alpha1(N) = floor(log N - logloglog N + loglog e - log 2 - 1 - eps)
    alpha2(N) = floor(log N - logloglog N + loglog e + 1 + eps)

(all logs base lam): eventually M_N >= alpha1(N), while M_N < alpha2(N)
happens for infinitely many N.  The series criterion classifies sequences
gamma_n = a*log_lam n + b: sum_n (pq)^(gamma_n/2) equals lam^-b * sum n^-a,
a p-series, so it converges iff a > 1 -- and divergence means M_N >=
gamma_N - 1 infinitely often.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import BernoulliParams
from .errors import DomainError


def log_lambda(x: float, params: BernoulliParams) -> float:
    """Logarithm of x to the base lam = 1/sqrt(pq)."""
    if not x > 0:
        raise DomainError(f"log_lambda requires x > 0, got {x!r}")
    return math.log(x) / math.log(params.lam)


def min_admissible_n(params: BernoulliParams) -> int:
    """Smallest N for which the nested logs in alpha1/alpha2 are defined
    (log_lam N > 1 strictly, i.e. N > lam)."""
    return int(math.floor(params.lam)) + 1


@dataclass(frozen=True)
class ThresholdSpec:
    """Inputs to the alpha1/alpha2 thresholds."""

    epsilon: float
    N: int
    params: BernoulliParams

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.N <= self.params.lam:
            raise DomainError(
                f"N={self.N} too small for nested logarithms (need log_lam N > 1); "
                f"minimal admissible N is {min_admissible_n(self.params)}"
            )


def _alpha_core(spec: ThresholdSpec) -> float:
    # log N - logloglog N + loglog e, all base lam
    g = lambda x: log_lambda(x, spec.params)  # noqa: E731
    return g(spec.N) - g(g(g(spec.N))) + g(g(math.e))


def alpha1_unfloored(spec: ThresholdSpec) -> float:
    return _alpha_core(spec) - log_lambda(2.0, spec.params) - 1.0 - spec.epsilon


def alpha2_unfloored(spec: ThresholdSpec) -> float:
    return _alpha_core(spec) + 1.0 + spec.epsilon


def alpha1(spec: ThresholdSpec) -> int:
    """Eventual lower threshold: almost surely M_N >= alpha1 for all large N.

    The unfloored value is evaluated in float and floored as-is; inputs
    within ~1e-12 of an integer boundary are inherently unstable.
    """
    return math.floor(alpha1_unfloored(spec))


def alpha2(spec: ThresholdSpec) -> int:
    """Infinitely-often upper excursion: M_N < alpha2 for infinitely many N."""
    return math.floor(alpha2_unfloored(spec))


def slln_ratio(M: int, N: int, params: BernoulliParams) -> float:
    """The strong-law ratio M / log_lam N; tends to 1 almost surely."""
    if N < 2:
        raise DomainError(f"slln_ratio requires N >= 2, got N={N}")
    if M < 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    return M / log_lambda(N, params)


class SeriesVerdict(enum.Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"


@dataclass(frozen=True)
class GammaFamily:
    """The sequence gamma_n = a * log_lam n + b."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError(f"gamma family needs finite (a, b), got {self}")


def gamma_value(fam: GammaFamily, n: int, params: BernoulliParams) -> float:
    if n < 2:
        raise DomainError(f"gamma_value requires n >= 2, got {n}")
    return fam.a * log_lambda(n, params) + fam.b


def classify_gamma_series(fam: GammaFamily, params: BernoulliParams) -> SeriesVerdict:
    """Convergence of sum_n (pq)^(gamma_n/2) for gamma_n = a*log_lam n + b.

    The sum equals lam^-b * sum_n n^-a, so only the slope matters: it
    converges iff a > 1.  The params argument is kept for signature symmetry;
    the verdict is independent of p.
    """
    del params
    return SeriesVerdict.CONVERGES if fam.a > 1 else SeriesVerdict.DIVERGES
