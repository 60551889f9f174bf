"""Counter-based random streams.

Every stream is a Philox generator keyed by a SeedSequence built from the
master seed plus a tuple of integer labels (stream tag, replication index,
row index, ...).  The numbers a stream produces depend only on its labels, so
results never depend on how work is scheduled across threads.
"""

import numpy as np

# stream tags; keep values stable, they are part of the reproducibility contract
WEIGHTS = 1
EDGES = 2
HUB = 3
PAYOFF = 4
BOUNDS = 5
CRUDE = 6


def stream(seed, *labels):
    """Return an independent ``numpy.random.Generator`` for ``(seed, *labels)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


def uniforms_open(rng, size):
    """Uniforms on (0, 1]; safe to feed into inverse-tail transforms."""
    return 1.0 - rng.random(size)
