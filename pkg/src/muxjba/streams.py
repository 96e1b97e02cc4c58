"""Counter-based random streams.

Every random draw in a simulation comes from a generator keyed by the
master seed plus a tuple of integer counters (experiment, condition, point,
cell, shot, purpose). Streams therefore never depend on the order in which
shots are executed or on how they are split across worker threads.
"""

import numpy as np

SCHEME = "numpy SeedSequence(entropy=master_seed, spawn_key=(experiment, condition, point, cell, shot, purpose)) -> PCG64"

# purpose codes
QUBIT = 0
FIELD = 1
SPLIT = 2

EXPERIMENT_CODES = {
    "scurve": 1,
    "rabi": 2,
    "simultaneous": 3,
    "crosstalk": 4,
    "iqcloud": 5,
    "switching": 6,
    "calibration": 7,
    "budget": 8,
}


def stream(master_seed, *key):
    """Generator for the counter tuple ``key`` under ``master_seed``."""
    if master_seed is None:
        master_seed = 0
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed):
    """Normalize a seed argument to a non-negative int below 2**64."""
    if seed is None:
        return 0
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed
