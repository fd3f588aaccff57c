"""Counter-based random substreams.

Every substream is a Philox generator keyed by the run seed; the stream path
(e.g. ``(TAG_TRIAL, k)``) selects a disjoint region of the 256-bit counter
space. Trial ``k`` therefore draws the same numbers no matter which worker
runs it or in what order.
"""

import numpy as np

TAG_CODEBOOK = 1
TAG_TRIAL = 2
TAG_AUX = 3

_MASK64 = (1 << 64) - 1


def substream(seed, tag, index=0):
    """Return a Generator for substream ``(seed, tag, index)``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    key = seed & ((1 << 128) - 1)
    # Low two words are consumed by draws; high words identify the stream.
    counter = np.array([0, 0, index & _MASK64, tag & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
