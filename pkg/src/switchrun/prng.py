"""Counter-mode splitmix64: the deterministic randomness source.

Draw number i (0-based) of the stream with seed s is

    mix64((s + (i + 1) * GOLDEN) mod 2^64)

where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the splitmix64 output
function (Steele, Lea & Flood's SplittableRandom finalizer, as published in
Vigna's public-domain splitmix64.c):

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

This is exactly the output sequence of sequential splitmix64 seeded with s,
but any slice of the stream is computable directly, so chunked, sliced, and
parallel generation are all bit-identical to sequential generation.

Reference test vector: seed 0 produces
0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...

Uniform doubles use the conventional 53-bit rule u = (x >> 11) * 2^-53,
giving u in [0, 1); a Bernoulli(p) bit is u < p.  Sub-streams are derived by
folding indices into the seed: derive_seed(s, k1, k2, ...) applies
s <- mix64(s + (k + 1) * GOLDEN) once per index.  Cryptographic quality is a
non-goal; statistical quality of splitmix64 is well documented.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Scalar splitmix64 finalizer (pure-Python reference)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over a uint64 array (in place)."""
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MUL1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MUL2)
    z ^= z >> np.uint64(31)
    return z


def derive_seed(master: int, *indices: int) -> int:
    """Fold grid/trial indices into a master seed, one mix per index."""
    s = master & MASK64
    for k in indices:
        s = mix64((s + (k + 1) * GOLDEN) & MASK64)
    return s


def stream_u64(seed: int, start: int, count: int) -> np.ndarray:
    """Raw draws number start .. start+count-1 of the stream, as uint64."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    idx *= np.uint64(GOLDEN)
    idx += np.uint64(seed & MASK64)
    return mix64_array(idx)


def stream_unit(seed: int, start: int, count: int) -> np.ndarray:
    """Uniform [0, 1) doubles for the same stream positions."""
    return u64_to_unit(stream_u64(seed, start, count))


def u64_to_unit(x: np.ndarray) -> np.ndarray:
    """53-bit uniform conversion, (x >> 11) * 2^-53."""
    return (x >> np.uint64(11)) * 2.0**-53


def bernoulli_threshold(p: float) -> int:
    """Integer threshold equivalent to the float Bernoulli rule.

    (x >> 11) * 2^-53 < p  holds iff  (x >> 11) < ceil(p * 2^53): the product
    is an exact float (53-bit integer times a power of two) so the float
    comparison agrees with the real one, and p * 2^53 is itself computed
    exactly.  Comparing raw integers skips the float conversion entirely.
    """
    return math.ceil(p * 2.0**53)


def bernoulli_bits(x: np.ndarray, threshold: int) -> np.ndarray:
    """Bernoulli draws from raw u64s via the integer threshold, as bool."""
    return (x >> np.uint64(11)) < np.uint64(threshold)
