"""
Various utility functions: environment configuration, memory checks and worker pools
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor

import psutil

from .exceptions import LcmOverflow

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "bytes2human",
    "get_envar_as_boolean",
    "get_envar_as_int",
    "get_envar_as_float",
    "get_available_memory",
    "check_memory_allocation",
    "default_workers",
    "parallel_map",
    "lcm_capped",
    "lcm_cap",
]


def bytes2human(n):
    """Convert bytes to human-readable format

    Taken from the `psutil` library which references
    http://code.activestate.com/recipes/578019

    Parameters
    ----------
    n : int
        Number to convert

    Returns
    -------
    readable : str
        A string with units attached.

    Examples
    --------
    >>> bytes2human(10000)
    '9.8K'

    >>> bytes2human(100001221)
    '95.4M'
    """
    symbols = ("K", "M", "G", "T", "P", "E", "Z", "Y")
    prefix = {}
    for i, s in enumerate(symbols):
        prefix[s] = 1 << (i + 1) * 10
    for s in reversed(symbols):
        if n >= prefix[s]:
            value = float(n) / prefix[s]
            return f"{value:.1f}{s}"
    return f"{n}B"


def get_envar_as_boolean(name, default=False):
    """Interpret an environmental as a boolean flag

    Truth is any numeric value that is not 0 or
    any of the following case-insensitive strings:

    ('true', 't', 'yes', 'y')

    Parameters
    ----------
    name : str
        The name of the environmental variable to retrieve

    default : bool
        If the environmental variable cannot be accessed, use as the default.
    """
    truths = ("true", "t", "yes", "y")
    falses = ("false", "f", "no", "n")
    if name in os.environ:
        value = os.environ[name]
        try:
            value = bool(int(value))
        except ValueError:
            value_lowcase = value.lower()
            if value_lowcase not in truths + falses:
                raise ValueError(f'Cannot convert value "{value}" to boolean unambiguously.')
            return value_lowcase in truths
        return value

    log.debug(f'Environmental "{name}" cannot be found. Using default value of "{default}".')
    return default


def _get_envar_as(name, default, kind):
    if name in os.environ:
        value = os.environ[name]
        try:
            return kind(float(value)) if kind is int else kind(value)
        except ValueError:
            raise ValueError(f'Cannot convert value "{value}" of "{name}" to {kind.__name__}.')

    log.debug(f'Environmental "{name}" cannot be found. Using default value of "{default}".')
    return default


def get_envar_as_int(name, default):
    """Interpret an environmental as an integer, e.g. ``THIN_SPECTRA_LCM_CAP=1e6``."""
    return _get_envar_as(name, default, int)


def get_envar_as_float(name, default):
    return _get_envar_as(name, default, float)


def get_available_memory(include_swap=True):
    """Retrieve available memory

    Parameters
    ----------
    include_swap : bool
        Include available swap in the calculation.

    Returns
    -------
    available : numbers.Number
        The amount available.
    """
    available = psutil.virtual_memory().available
    if include_swap:
        available += psutil.swap_memory().free
    return available


def check_memory_allocation(n_bytes, allowed=None, include_swap=True):
    """Check whether an array of ``n_bytes`` fits in memory

    Parameters
    ----------
    n_bytes : int
        Predicted footprint.

    allowed : numbers.Number or None
        Fraction of available memory that may be used.
        If None, the environmental variable ``THIN_SPECTRA_ALLOWED_MEMORY``
        is retrieved. If undefined, no limit is applied.

    include_swap : bool
        Include available swap in the calculation.

    Returns
    -------
    fits : bool
    """
    if allowed is None:
        allowed = get_envar_as_float("THIN_SPECTRA_ALLOWED_MEMORY", None)

    available = get_available_memory(include_swap=include_swap)
    log.debug(f"Requested {bytes2human(n_bytes)} available system memory {bytes2human(available)}")

    if n_bytes > available:
        log.warning(f"Allocation of {bytes2human(n_bytes)} is more than system available {bytes2human(available)}")

    if allowed and n_bytes > allowed * available:
        log.debug(f"Allocation greater than allowed memory {bytes2human(allowed * available)}")
        return False
    return True


def default_workers():
    """
    Worker count from ``THIN_SPECTRA_WORKERS`` (default 1); 0 means one per physical core.
    """
    workers = get_envar_as_int("THIN_SPECTRA_WORKERS", 1)
    if workers <= 0:
        workers = psutil.cpu_count(logical=False) or 1
    return workers


def parallel_map(func, items, workers=None):
    """
    Map ``func`` over ``items`` preserving order.

    With one worker this runs in-process; otherwise a process pool is used,
    so ``func`` must be a picklable module-level callable.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    log.debug(f"Dispatching {len(items)} tasks to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def lcm_cap():
    return get_envar_as_int("THIN_SPECTRA_LCM_CAP", 10**6)


def lcm_capped(values, cap=None):
    """
    Least common multiple of positive integers, refusing to exceed ``cap``.

    Examples
    --------
    >>> lcm_capped([4, 6])
    12
    """
    if cap is None:
        cap = lcm_cap()
    result = 1
    for value in values:
        result = result * int(value) // math.gcd(result, int(value))
        if result > cap:
            raise LcmOverflow(f"lcm of {list(values)} exceeds the cap of {cap}")
    return result
