"""Deterministic random streams.

All randomness in the package comes from numpy's PCG64 bit generator
seeded through ``SeedSequence([seed, stream])``.  PCG64 and SeedSequence
are fully specified (O'Neill 2014; numpy NEP 19), so a weight or noise
stream is reproducible from the pair ``(seed, stream)`` alone.

Stream numbers in use:

* ``0``: network initialisation (Nguyen-Widrow draws).
* ``1 + k``: the k-th synthetic image (see :mod:`oagrade.synth`).
* ``GRADCHECK_STREAM + trial``: random models/patterns for gradient checks.
"""

import numpy as np

INIT_STREAM = 0
GRADCHECK_STREAM = 1_000_000


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))
