"""Exact probabilities and rigorous bounds for the longest switch run M_N.

Closed forms:

* p_full_alternation(t): chance that t consecutive trials fully alternate,
  (pq)^floor(t/2) for odd t and twice that for even t.
* p_window2k_reach(K): chance that a window of 2K trials already contains a
  run of K-1 consecutive switches,
      (K+2)(pq)^(K/2) - 2(pq)^K                          for even K,
      (K+1-2Kpq)(pq)^((K-1)/2) - (1-2pq)(pq)^(K-1)       for odd K.
* bounds_mn_less(N, K): the sandwich on P(M_N < K-1) for N >= 2K, obtained
  by raising one minus the two expressions above to floor(N/K)-1 and
  (floor(N/K)-1)/2 respectively.

Exact values come from an absorbing dynamic program over states
(last outcome, current consecutive-switch count); a run reaching K-1
switches is absorbing failure, and the surviving mass after N trials is
P(M_N < K-1).  A brute-force enumeration over all 2^N sequences serves as
the oracle for everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import BernoulliParams
from .errors import DomainError, InternalConsistencyError

#: Probability identities are asserted to this absolute tolerance; a bound
#: further outside [0, 1] than this is treated as a transcription bug.
PROB_TOL = 1e-12

ENUM_MAX_N = 24  # 2^N outcome enumeration budget
ENUM_EXACT_MAX_N = 16  # same, for the exact-rational mode

_MATRIX_POWER_MIN_N = 4096  # below this a stepwise DP is cheaper


def p_full_alternation(t: int, params: BernoulliParams) -> float:
    """P that a window of t trials is fully alternating (t-1 switches)."""
    if t < 1:
        raise DomainError(f"window length t must be >= 1, got {t}")
    base = params.pq ** (t // 2)
    return base if t % 2 else 2.0 * base


def _reach_odd_form(K: int, pq: float) -> float:
    # the odd-K closed form of p_window2k_reach, evaluated for any K
    return (K + 1 - 2 * K * pq) * pq ** ((K - 1) / 2) - (1 - 2 * pq) * pq ** (K - 1)


def _reach_even_form(K: int, pq: float) -> float:
    return (K + 2) * pq ** (K / 2) - 2.0 * pq**K


def p_window2k_reach(K: int, params: BernoulliParams) -> float:
    """P(M >= K-1 inside a window of 2K trials)."""
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    pq = params.pq
    if K % 2 == 0:
        return (K + 2) * pq ** (K // 2) - 2.0 * pq**K
    return (K + 1 - 2 * K * pq) * pq ** ((K - 1) // 2) - (1 - 2 * pq) * pq ** (K - 1)


@dataclass(frozen=True)
class BoundEnvelope:
    """Sandwich bounds on P(M_N < K-1); defined only for N >= 2K."""

    N: int
    K: int
    lower: float
    upper: float


def _checked_unit(value: float, what: str) -> float:
    """Clamp a probability into [0, 1] within PROB_TOL, else raise."""
    if -PROB_TOL <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + PROB_TOL:
        return 1.0
    if not 0.0 <= value <= 1.0:
        raise InternalConsistencyError(
            f"{what} = {value!r} lies outside [0, 1] beyond tolerance {PROB_TOL}; "
            "this indicates a formula transcription bug"
        )
    return value


def bounds_mn_less(N: int, K: int, params: BernoulliParams) -> BoundEnvelope:
    """Lower/upper bounds on P(M_N < K-1) for N >= 2K >= 2.

    Both bounds raise one minus a closed form to a window-count exponent.
    The lower bound needs every possible K-trial run to lie inside one of
    the 2K-wide windows stepped by K, which takes ceil(N/K) - 1 windows;
    with floor(N/K) - 1 the tail of a non-multiple N is uncovered and the
    "bound" can exceed the true probability (e.g. N=5, K=2, p=1/2: the
    floor-count value is 1/8 but P(M_5 < 1) = 1/16).  The exponents agree
    whenever K divides N.  The upper bound only needs the larger of the two
    disjoint window families, (floor(N/K) - 1)/2.

    No silent clamping: a bound outside [0, 1] by more than PROB_TOL raises
    InternalConsistencyError.
    """
    if K < 1 or N < 2 * K:
        raise DomainError(f"bounds require N >= 2K >= 2, got N={N}, K={K}")
    pq = params.pq
    base_lower = _checked_unit(1.0 - _reach_odd_form(K, pq), "lower-bound base")
    base_upper = _checked_unit(1.0 - _reach_even_form(K, pq), "upper-bound base")
    covering = -(-N // K) - 1  # >= 1 when N >= 2K
    disjoint = N // K - 1
    lower = _checked_unit(base_lower**covering, "lower bound")
    upper = _checked_unit(base_upper ** (disjoint / 2), "upper bound")
    return BoundEnvelope(N=N, K=K, lower=lower, upper=upper)


def _dp_init(K: int, params: BernoulliParams):
    # state arrays indexed by current switch-run count c = 0 .. K-2,
    # one per last outcome; mass that would reach c = K-1 is dropped
    s0 = np.zeros(K - 1)
    s1 = np.zeros(K - 1)
    s0[0] = params.q
    s1[0] = params.p
    return s0, s1


def _dp_step(s0, s1, params: BernoulliParams):
    p, q = params.p, params.q
    n0 = np.empty_like(s0)
    n1 = np.empty_like(s1)
    n0[0] = s0.sum() * q  # repeating a 0 resets the run
    n1[0] = s1.sum() * p
    n0[1:] = s1[:-1] * q  # a switch extends the run by one
    n1[1:] = s0[:-1] * p
    return n0, n1


def exact_mn_cdf_profile(n_max: int, K: int, params: BernoulliParams) -> np.ndarray:
    """P(M_n < K-1) for every n = 1 .. n_max, one stepwise DP pass.

    Index i of the result holds the value for n = i + 1.
    """
    if n_max < 1 or K < 1:
        raise DomainError(f"need n_max >= 1 and K >= 1, got n_max={n_max}, K={K}")
    if K == 1:
        return np.zeros(n_max)
    out = np.empty(n_max)
    out[0] = 1.0
    s0, s1 = _dp_init(K, params)
    for i in range(1, n_max):
        s0, s1 = _dp_step(s0, s1, params)
        out[i] = s0.sum() + s1.sum()
    return np.clip(out, 0.0, 1.0)


def _transition_matrix(K: int, params: BernoulliParams) -> np.ndarray:
    p, q = params.p, params.q
    d = K - 1
    T = np.zeros((2 * d, 2 * d))
    for c in range(d):
        T[0, c] += q  # (0, c) --repeat--> (0, 0)
        T[d, d + c] += p  # (1, c) --repeat--> (1, 0)
        if c + 1 < d:
            T[d + c + 1, c] += p  # (0, c) --switch--> (1, c+1)
            T[c + 1, d + c] += q  # (1, c) --switch--> (0, c+1)
    return T


def exact_mn_cdf(N: int, K: int, params: BernoulliParams) -> float:
    """P(M_N < K-1), exactly, via the absorbing DP.

    Uses repeated squaring of the (2K-2)-state transition matrix for large N,
    so N in the tens of millions is cheap.  Returns 0 for K = 1 (M_N >= 0
    always) and 1 when K - 1 > N - 1 (M_N <= N - 1 always).
    """
    if N < 1 or K < 1:
        raise DomainError(f"need N >= 1 and K >= 1, got N={N}, K={K}")
    if K == 1:
        return 0.0
    if K - 1 > N - 1:
        return 1.0
    if N < _MATRIX_POWER_MIN_N:
        return float(exact_mn_cdf_profile(N, K, params)[-1])
    s0, s1 = _dp_init(K, params)
    v = np.concatenate([s0, s1])
    T = _transition_matrix(K, params)
    v = np.linalg.matrix_power(T, N - 1) @ v
    return float(min(1.0, max(0.0, v.sum())))


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of M_N under Bernoulli(p), from full enumeration.

    pmf[m] = P(M_N = m) for m = 0 .. N-1; cdf[K-1] = P(M_N < K-1) for
    K = 1 .. N+1 (so cdf[0] = 0 and cdf[N] = 1).
    """

    N: int
    p: float
    pmf: np.ndarray
    cdf: np.ndarray

    @property
    def cdf_points(self) -> dict[int, float]:
        """Map K -> P(M_N < K-1), K = 1 .. N+1."""
        return {k + 1: float(v) for k, v in enumerate(self.cdf)}

    def to_csv(self) -> str:
        lines = ["K,cdf"]
        lines += [f"{k + 1},{v:.12g}" for k, v in enumerate(self.cdf)]
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {"N": self.N, "p": self.p, "cdf": [float(v) for v in self.cdf]}


@lru_cache(maxsize=32)
def _mn_ones_counts(N: int) -> np.ndarray:
    """counts[m, ones]: number of length-N 0/1 sequences with M = m and
    the given number of ones.  Exact integers; independent of p."""
    counts = np.zeros(N * (N + 1), dtype=np.int64)
    total = 1 << N
    switch_mask = np.uint32((1 << max(N - 1, 0)) - 1)
    chunk = 1 << 22
    for a in range(0, total, chunk):
        x = np.arange(a, min(a + chunk, total), dtype=np.uint32)
        ones = np.bitwise_count(x).astype(np.int64)
        s = (x ^ (x >> np.uint32(1))) & switch_mask
        runlen = np.zeros(x.shape, dtype=np.int64)
        while True:
            alive = s != 0
            if not alive.any():
                break
            runlen[alive] += 1
            s &= s >> np.uint32(1)
        counts += np.bincount(runlen * (N + 1) + ones, minlength=N * (N + 1))
    out = counts.reshape(N, N + 1)
    out.flags.writeable = False
    return out


def _check_enum_budget(N: int, cap: int) -> None:
    if N < 1 or N > cap:
        raise DomainError(f"enumeration supports 1 <= N <= {cap}, got N={N}")


def enumerate_mn_dist(N: int, params: BernoulliParams) -> ExactDistribution:
    """Brute-force law of M_N: every 2^N sequence, weighted p^ones q^zeros."""
    _check_enum_budget(N, ENUM_MAX_N)
    counts = _mn_ones_counts(N)
    ones = np.arange(N + 1)
    weights = params.p**ones * params.q ** (N - ones)
    pmf = counts @ weights
    cdf = np.concatenate(([0.0], np.cumsum(pmf)))
    cdf = np.clip(cdf, 0.0, 1.0)
    return ExactDistribution(N=N, p=params.p, pmf=pmf, cdf=cdf)


def enumerate_mn_cdf_exact(N: int, p: Fraction) -> list[Fraction]:
    """Exact-rational cdf of M_N: entry K-1 is P(M_N < K-1), K = 1 .. N+1.

    Ground-truth mode for pinning closed forms without float noise; the
    enumeration budget is smaller because rational arithmetic is costly.
    """
    _check_enum_budget(N, ENUM_EXACT_MAX_N)
    if not 0 < p < 1:
        raise DomainError(f"p must satisfy 0 < p < 1, got {p}")
    q = 1 - p
    counts = _mn_ones_counts(N)
    weights = [p**o * q ** (N - o) for o in range(N + 1)]
    pmf = [
        sum(int(counts[m, o]) * weights[o] for o in range(N + 1)) for m in range(N)
    ]
    cdf = [Fraction(0)]
    for v in pmf:
        cdf.append(cdf[-1] + v)
    return cdf
