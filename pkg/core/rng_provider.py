"""
Seeded random streams.

Every random draw in the project comes from get_rng(seed, *stream), where the
stream is a tuple of small nonnegative integers naming its purpose (split
index, grid cell, ...). Identical (seed, stream) pairs always give identical
generators, independent of evaluation order or worker process.
"""

import numpy as np

# stream tags
STREAM_GENERATE = 1
STREAM_TRAIN = 2
STREAM_CELL = 3


def _sequence(seed: int, stream) -> np.random.SeedSequence:
    entropy = [int(seed)] + [int(s) for s in stream]
    if any(e < 0 for e in entropy):
        raise ValueError(f"Seeds and stream ids must be nonnegative, got {entropy}")
    return np.random.SeedSequence(entropy)


def get_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(_sequence(seed, stream))


def derive_seed(seed: int, *stream: int) -> int:
    """A 32-bit integer seed for a named sub-stream."""
    return int(_sequence(seed, stream).generate_state(1)[0])
