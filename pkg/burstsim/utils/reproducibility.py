import numpy as np
from burstsim.utils.logging import logger
from typing import *


def seeded_rng(seed: int) -> np.random.Generator:
    """build the random stream for one simulation instance

    Every stochastic draw of a simulation comes from the generator returned here;
    nothing in burstsim touches the global ``random`` or ``numpy.random`` state.

    Args:
        seed (:obj:`int`): unsigned 64-bit seed.
    """
    if seed is None or seed < 0 or seed >= 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer, got {!r}".format(seed))
    logger.debug(f"random stream seeded with {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))
