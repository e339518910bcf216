"""Counter-based random streams.

All sampling draws from a Philox stream keyed by (seed, trial_id), so
trials are independent and byte-reproducible under any parallel schedule.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed, trial_id=0):
    key = np.array([seed & _MASK64, trial_id & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def randbelow(rng, n):
    """Uniform integer in [0, n); n may exceed 64 bits."""
    if n <= 0:
        raise ValueError("randbelow needs n >= 1")
    if n <= 1 << 63:
        return int(rng.integers(0, n))
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    shift = 8 * nbytes - nbits
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> shift
        if x < n:
            return x


def shuffled(rng, items):
    """Uniformly permuted copy of a sequence."""
    order = rng.permutation(len(items))
    return [items[i] for i in order]
