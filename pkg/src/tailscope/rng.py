"""Counter-based random streams.

Every replicate draws from its own Philox stream.  The Philox key is derived
from the master seed once; the replicate index is written into the high words
of the 256-bit counter, so replicate streams never overlap and can be
generated in any order (or on any thread) with bit-identical results.
"""

from __future__ import annotations

import functools
import os

import numpy as np

_MASK64 = (1 << 64) - 1

# Streams start 2**128 counter steps apart.
_COUNTER_WORD = 2


@functools.lru_cache(maxsize=256)
def _philox_key(master_seed: int) -> tuple[int, int]:
    seq = np.random.SeedSequence(master_seed & _MASK64)
    k0, k1 = seq.generate_state(2, dtype=np.uint64)
    return int(k0), int(k1)


def replicate_generator(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Return the generator for stream ``(master_seed, replicate_index)``."""
    if replicate_index < 0:
        raise ValueError("replicate_index must be nonnegative")
    k0, k1 = _philox_key(int(master_seed))
    counter = np.zeros(4, dtype=np.uint64)
    counter[_COUNTER_WORD] = replicate_index & _MASK64
    counter[_COUNTER_WORD + 1] = (replicate_index >> 64) & _MASK64
    key = np.array([k0, k1], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def thread_count() -> int:
    """Worker threads allowed for replicate-level parallelism.

    Reads ``TAILSCOPE_THREADS``; defaults to the CPU count.
    """
    raw = os.environ.get("TAILSCOPE_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            value = 1
        return max(1, value)
    return max(1, os.cpu_count() or 1)
