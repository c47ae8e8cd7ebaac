"""Named random substreams derived from a single root seed.

Every stochastic choice in the package draws from a generator created here,
so a single root seed pins down datasets, subsampling, bootstrap resamples
and the random baseline policy independently of each other.

Stream derivation: ``SeedSequence([root_seed, stream_id, *key])`` where the
stream ids are the module-level constants below and ``key`` is an optional
tuple of integers (e.g. a world index). This mapping is part of the file
provenance contract.
"""

from __future__ import annotations

import numpy as np

STREAM_WORLDS = 1
STREAM_SPLIT = 2
STREAM_SUBSAMPLE = 3
STREAM_BOOTSTRAP = 4
STREAM_RANDOM_POLICY = 5
STREAM_SCENARIO = 6

STREAM_NAMES = {
    STREAM_WORLDS: "worlds",
    STREAM_SPLIT: "split",
    STREAM_SUBSAMPLE: "subsample",
    STREAM_BOOTSTRAP: "bootstrap",
    STREAM_RANDOM_POLICY: "random-policy",
    STREAM_SCENARIO: "scenario",
}


def substream(seed: int, stream: int, *key: int) -> np.random.Generator:
    """Generator for the given named stream; deterministic across platforms."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), *map(int, key)]))
