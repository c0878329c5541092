"""Seeded Monte Carlo engine for switch-run experiments.

Determinism contract: every random quantity is a pure function of
(seed, p, N) through the counter-mode splitmix64 stream (see prng).  Batch,
chunked, sliced, threaded, and sequential execution therefore produce
bit-identical results.  Per-trial seeds come from the documented splitting
rule derive_seed(master, grid_index, trial_index).

Aggregation is order-insensitive by construction: fractions use integer
counts, and means use math.fsum (exactly rounded, so independent of
summation order).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .asymptotics import (
    GammaFamily,
    ThresholdSpec,
    alpha1,
    alpha2,
    gamma_value,
    log_lambda,
    slln_ratio,
)
from .core import BernoulliParams, BitSequence, RunScan, SwitchRunStats
from .errors import DomainError
from .prng import (
    GOLDEN,
    MASK64,
    bernoulli_bits,
    bernoulli_threshold,
    derive_seed,
    mix64_array,
    stream_u64,
)

_CHUNK = 1 << 20  # draws per generation chunk (scalar path)
_BATCH_ELEMS = 1 << 22  # max elements per batch matrix chunk
_BATCH_MAX_N = 4096  # above this, per-trial streaming beats the matrix path
_PACKED_MAX_N = 65  # row switch masks fit one u64 up to this length


def simulate_bits_slice(params: BernoulliParams, seed: int, start: int, count: int) -> np.ndarray:
    """Outcomes number start .. start+count-1 of the seeded sequence.

    Bit i is 1 iff the i-th uniform draw of the stream is < p, so any slice
    of a simulated sequence can be regenerated without the rest of it.
    """
    thr = bernoulli_threshold(params.p)
    return bernoulli_bits(stream_u64(seed, start, count), thr).astype(np.uint8)


def simulate_sequence(N: int, params: BernoulliParams, seed: int) -> BitSequence:
    """N IID Bernoulli(p) trials from the documented seeded stream."""
    if N < 1:
        raise DomainError(f"sequence length must be >= 1, got {N}")
    thr = bernoulli_threshold(params.p)
    out = np.empty(N, dtype=np.uint8)
    for a in range(0, N, _CHUNK):
        b = min(a + _CHUNK, N)
        np.less(
            stream_u64(seed, a, b - a) >> np.uint64(11),
            np.uint64(thr),
            out=out[a:b].view(bool),
        )
    return BitSequence._wrap(out)


def _trial_stats(N: int, params: BernoulliParams, seed: int) -> SwitchRunStats:
    """Switch-run stats of simulate_sequence(N, params, seed), streaming.

    Never materializes the whole sequence; auxiliary memory stays at chunk
    size, which keeps N = 10^8 workable.
    """
    thr = bernoulli_threshold(params.p)
    scan = RunScan()
    prev_last = 0
    for a in range(0, N, _CHUNK):
        b = min(a + _CHUNK, N)
        chunk = bernoulli_bits(stream_u64(seed, a, b - a), thr)
        if a == 0:
            if chunk.size > 1:
                scan.update(chunk[1:] != chunk[:-1], 0)
        else:
            mask = np.empty(chunk.size, dtype=bool)
            mask[0] = chunk[0] != prev_last
            np.not_equal(chunk[1:], chunk[:-1], out=mask[1:])
            scan.update(mask, a - 1)
        prev_last = chunk[-1]
    return scan.stats()


def achieving_pattern(N: int, params: BernoulliParams, seed: int) -> str:
    """The leftmost maximal alternating window of a seeded sequence, as a
    '0'/'1' string of longest_run + 1 trials (regenerated slice-wise)."""
    st = _trial_stats(N, params, seed)
    window = simulate_bits_slice(params, seed, st.window_start - 1, st.longest_run + 1)
    return (window + ord("0")).tobytes().decode("ascii")


def _trial_seeds(master: int, grid_index: int, trials: int) -> np.ndarray:
    """Vectorized derive_seed(master, grid_index, t) for t = 0 .. trials-1."""
    s1 = derive_seed(master, grid_index)
    idx = np.arange(1, trials + 1, dtype=np.uint64)
    idx *= np.uint64(GOLDEN)
    idx += np.uint64(s1 & MASK64)
    return mix64_array(idx)


def _longest_run_rows(sw: np.ndarray) -> np.ndarray:
    """Per-row longest run of True in a 2-D boolean matrix (width < 2^15)."""
    if sw.shape[1] == 0:
        return np.zeros(sw.shape[0], dtype=np.int64)
    c = np.cumsum(sw, axis=1, dtype=np.int16)
    anchors = np.where(sw, np.int16(0), c)
    np.maximum.accumulate(anchors, axis=1, out=anchors)
    np.subtract(c, anchors, out=c)
    return c.max(axis=1).astype(np.int64)


def _longest_run_rows_packed(sw: np.ndarray) -> np.ndarray:
    """Per-row longest run of True for masks of at most 64 columns.

    Packs each row into one u64 and repeats m &= m >> 1; the iteration count
    at which a row dies is its longest run.
    """
    rows, width = sw.shape
    out = np.zeros(rows, dtype=np.int64)
    if width == 0:
        return out
    pad = np.zeros((rows, 64 - width), dtype=bool)
    packed = np.packbits(np.concatenate([sw, pad], axis=1), axis=1, bitorder="little")
    m = packed.view("<u8").ravel().copy()
    k = 0
    alive = m != 0
    while alive.any():
        k += 1
        out[alive] = k
        m &= m >> np.uint64(1)
        alive = m != 0
    return out


def _mn_batch(N: int, params: BernoulliParams, seeds: np.ndarray, out: np.ndarray) -> None:
    """Longest-run values for many seeded sequences of common length N."""
    thr = bernoulli_threshold(params.p)
    rows_per_chunk = max(1, _BATCH_ELEMS // max(N, 1))
    col = np.arange(1, N + 1, dtype=np.uint64)
    col *= np.uint64(GOLDEN)
    run_rows = _longest_run_rows_packed if N <= _PACKED_MAX_N else _longest_run_rows
    for a in range(0, seeds.size, rows_per_chunk):
        b = min(a + rows_per_chunk, seeds.size)
        z = seeds[a:b, None] + col[None, :]
        bits = bernoulli_bits(mix64_array(z), thr)
        out[a:b] = run_rows(bits[:, 1:] != bits[:, :-1])


def sample_mn(
    N: int, params: BernoulliParams, trials: int, seed: int, workers: int = 1
) -> np.ndarray:
    """M values of `trials` independent seeded sequences of length N.

    Trial t uses seed derive_seed(seed, t); the result is bit-identical to
    looping simulate_sequence + longest_switch_run, for any workers count.
    """
    if N < 1 or trials < 1:
        raise DomainError(f"need N >= 1 and trials >= 1, got N={N}, trials={trials}")
    idx = np.arange(1, trials + 1, dtype=np.uint64)
    idx *= np.uint64(GOLDEN)
    idx += np.uint64(seed & MASK64)
    seeds = mix64_array(idx)
    out = np.empty(trials, dtype=np.int64)
    if N <= _BATCH_MAX_N:
        _mn_batch(N, params, seeds, out)
        return out
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            ms = list(ex.map(lambda s: _trial_stats(N, params, int(s)).longest_run, seeds))
        out[:] = ms
    else:
        for t, s in enumerate(seeds):
            out[t] = _trial_stats(N, params, int(s)).longest_run
    return out


@lru_cache(maxsize=8)
def _sample_mn_cached(N: int, params: BernoulliParams, trials: int, seed: int) -> np.ndarray:
    out = sample_mn(N, params, trials, seed)
    out.flags.writeable = False
    return out


def estimate_cdf(
    N: int, K: int, params: BernoulliParams, trials: int, seed: int
) -> tuple[float, float]:
    """Monte Carlo estimate of P(M_N < K-1) with a 99% half-width.

    Returns (estimate, half_width) where half_width uses the normal
    approximation 2.576 * sqrt(v / trials) with v = estimate*(1-estimate).
    The per-trial M sample depends on (N, p, trials, seed) only, so a small
    cache lets sweeps over K reuse it; results are unaffected.
    """
    if trials < 100:
        raise DomainError(f"estimate_cdf needs trials >= 100, got {trials}")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    m = _sample_mn_cached(N, params, trials, seed)
    hits = int(np.count_nonzero(m < K - 1))
    est = hits / trials
    return est, 2.576 * math.sqrt(est * (1.0 - est) / trials)


def mn_prefix_profile(seq: BitSequence) -> np.ndarray:
    """M_n for every prefix length n = 1 .. N of one sequence."""
    bits = seq.array
    out = np.zeros(bits.size, dtype=np.int64)
    if bits.size <= 1:
        return out
    sw = bits[1:] != bits[:-1]
    c = np.cumsum(sw, dtype=np.int64)
    anchors = np.where(sw, 0, c)
    np.maximum.accumulate(anchors, out=anchors)
    np.maximum.accumulate(c - anchors, out=out[1:])
    return out


def gamma_hit_scan(
    params: BernoulliParams,
    fam: GammaFamily,
    seed: int,
    n_max: int,
    n_min: int = 2,
) -> int | None:
    """First n in [n_min, n_max] with M_n >= ceil(gamma_n) - 1, else None.

    gamma_n is real-valued, so the threshold integerizes via ceiling; this is
    a documented choice of this artifact.
    """
    if n_min < 2 or n_max < n_min:
        raise DomainError(f"need 2 <= n_min <= n_max, got n_min={n_min}, n_max={n_max}")
    profile = mn_prefix_profile(simulate_sequence(n_max, params, seed))
    n = np.arange(n_min, n_max + 1)
    thresholds = np.ceil(fam.a * (np.log(n) / math.log(params.lam)) + fam.b) - 1
    hits = profile[n_min - 1 :] >= thresholds
    if not hits.any():
        return None
    return int(n_min + np.argmax(hits))


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment: a p, a grid of N values, seeded trials."""

    p: float
    n_grid: tuple[int, ...]
    trials: int
    seed: int
    epsilon: float
    gamma: GammaFamily | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not 0 < self.p < 1:
            raise DomainError(f"p must satisfy 0 < p < 1, got {self.p!r}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not self.n_grid or any(n < 2 for n in self.n_grid):
            raise DomainError(f"every N in the grid must be >= 2, got {self.n_grid}")
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")


@dataclass(frozen=True)
class GridPointResult:
    """Aggregates for one N of an experiment grid.

    Threshold fields are None (with threshold_error set) when N is too small
    for the nested logarithms in alpha1/alpha2.  std_m is the sample standard
    deviation (ddof=1), 0.0 for a single trial.
    """

    N: int
    trials: int
    m_values: tuple[int, ...]
    ratios: tuple[float, ...]
    mean_m: float
    std_m: float
    mean_ratio: float
    alpha1: int | None
    alpha2: int | None
    frac_below_alpha1: float | None
    frac_ge_alpha2: float | None
    threshold_error: str | None
    gamma_threshold: int | None
    frac_gamma_hit: float | None
    pattern: str


@dataclass(frozen=True)
class TrialReport:
    """run_trials output: one GridPointResult per N in the grid."""

    p: float
    seed: int
    epsilon: float
    gamma: GammaFamily | None
    points: tuple[GridPointResult, ...]

    def to_json_obj(self) -> dict:
        return {
            "p": self.p,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "gamma": None if self.gamma is None else {"a": self.gamma.a, "b": self.gamma.b},
            "grid": [
                {
                    "N": pt.N,
                    "trials": pt.trials,
                    "mean_m": pt.mean_m,
                    "std_m": pt.std_m,
                    "mean_ratio": pt.mean_ratio,
                    "alpha1": pt.alpha1,
                    "alpha2": pt.alpha2,
                    "frac_below_alpha1": pt.frac_below_alpha1,
                    "frac_ge_alpha2": pt.frac_ge_alpha2,
                    "threshold_error": pt.threshold_error,
                    "gamma_threshold": pt.gamma_threshold,
                    "frac_gamma_hit": pt.frac_gamma_hit,
                    "pattern": pt.pattern,
                    "m_values": list(pt.m_values),
                    "ratios": list(pt.ratios),
                }
                for pt in self.points
            ],
        }

    def trial_csv(self) -> str:
        """Raw per-trial dump, one row per (grid point, trial)."""
        lines = ["p,N,trial,M,ratio"]
        for pt in self.points:
            for t, (m, r) in enumerate(zip(pt.m_values, pt.ratios)):
                lines.append(f"{self.p:.12g},{pt.N},{t},{m},{r:.12g}")
        return "\n".join(lines) + "\n"


def _grid_point(
    config: ExperimentConfig, params: BernoulliParams, gi: int, N: int, workers: int
) -> GridPointResult:
    trials = config.trials
    seeds = _trial_seeds(config.seed, gi, trials)
    if N <= _BATCH_MAX_N:
        m_arr = np.empty(trials, dtype=np.int64)
        _mn_batch(N, params, seeds, m_arr)
    elif workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            m_arr = np.fromiter(
                ex.map(lambda s: _trial_stats(N, params, int(s)).longest_run, seeds),
                dtype=np.int64,
                count=trials,
            )
    else:
        m_arr = np.fromiter(
            (_trial_stats(N, params, int(s)).longest_run for s in seeds),
            dtype=np.int64,
            count=trials,
        )

    m_values = tuple(int(v) for v in m_arr)
    ratios = tuple(slln_ratio(m, N, params) for m in m_values)
    mean_m = math.fsum(m_values) / trials
    std_m = (
        math.sqrt(math.fsum((m - mean_m) ** 2 for m in m_values) / (trials - 1))
        if trials > 1
        else 0.0
    )
    mean_ratio = math.fsum(ratios) / trials

    a1 = a2 = None
    frac_lo = frac_hi = None
    err = None
    try:
        spec = ThresholdSpec(config.epsilon, N, params)
        a1, a2 = alpha1(spec), alpha2(spec)
        frac_lo = sum(1 for m in m_values if m < a1) / trials
        frac_hi = sum(1 for m in m_values if m >= a2) / trials
    except DomainError as e:
        err = str(e)

    gamma_thr = frac_gamma = None
    if config.gamma is not None:
        gamma_thr = math.ceil(gamma_value(config.gamma, N, params)) - 1
        frac_gamma = sum(1 for m in m_values if m >= gamma_thr) / trials

    # the representative achieving pattern comes from trial 0
    pattern = achieving_pattern(N, params, int(seeds[0]))

    return GridPointResult(
        N=N,
        trials=trials,
        m_values=m_values,
        ratios=ratios,
        mean_m=mean_m,
        std_m=std_m,
        mean_ratio=mean_ratio,
        alpha1=a1,
        alpha2=a2,
        frac_below_alpha1=frac_lo,
        frac_ge_alpha2=frac_hi,
        threshold_error=err,
        gamma_threshold=gamma_thr,
        frac_gamma_hit=frac_gamma,
        pattern=pattern,
    )


def run_trials(config: ExperimentConfig, workers: int = 1) -> TrialReport:
    """Run the experiment grid; bit-identical for any workers count.

    Threshold domain errors (N too small for alpha1/alpha2) are recorded per
    grid point and do not abort the other points.
    """
    params = BernoulliParams(config.p)
    points = tuple(
        _grid_point(config, params, gi, N, workers) for gi, N in enumerate(config.n_grid)
    )
    return TrialReport(
        p=config.p, seed=config.seed, epsilon=config.epsilon, gamma=config.gamma, points=points
    )
