from typing import Dict

import numpy as np

STREAMS = ("limits", "cancels", "arrivals", "flow", "fraction", "refill", "calibration", "noise")


def spawn_streams(seed: int) -> Dict[str, np.random.Generator]:
    """Independent generators, one per random process, from a single seed.

    Streams are keyed by position in ``STREAMS`` so adding a process at the
    end leaves the draws of the existing ones untouched.
    """
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}
