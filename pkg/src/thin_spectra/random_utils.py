"""
Utility file containing random value generation routines.

Every draw goes through one module-level `numpy.random.Generator`, so a single
`set_seed` call makes a whole run reproducible.
"""

import numpy as np

_generator = np.random.default_rng()


def set_seed(seed):
    """Reseed the shared generator (``None`` draws fresh entropy)."""
    global _generator
    _generator = np.random.default_rng(seed)


def generate_float(min=-1.0, max=1.0):
    return float(_generator.uniform(min, max))


def generate_int(min=0, max=100):
    return int(_generator.integers(min, max, endpoint=True))


def generate_array_float64(size=(5,), min=-1.0, max=1.0):
    return _generator.uniform(min, max, size)


def generate_free_values(family, n_letters, min=-1.0, max=1.0):
    """Free parameters for ``n_letters`` letters of ``family``."""
    return generate_array_float64((n_letters, len(family.free_masks())), min, max)
