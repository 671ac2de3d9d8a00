"""Package-level random generator used for parameter initialization.

Reseed with :func:`manual_seed` before building a model to make weight
initialization reproducible.
"""

import numpy as np

_generator = np.random.default_rng(0)


def manual_seed(seed: int) -> None:
    """Reseed the global initialization generator."""
    global _generator
    _generator = np.random.default_rng(seed)


def default_generator() -> np.random.Generator:
    return _generator
