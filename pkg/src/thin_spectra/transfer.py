"""
Schrödinger transfer matrices over words and the discriminant.

For a potential ``v_1 ... v_q`` the transfer matrix is the ordered product
``T(v_q, E) ... T(v_1, E)`` with ``T(v, E) = [[E - v, -1], [1, 0]]``, so
``T(x y) = T(y) T(x)``.
"""

import logging
import math

import numpy as np

from .intervals import EnergyWindow
from .sl2 import RENORM_EVERY, Mat2
from .words import aggregate

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "EnergyGrid",
    "potential",
    "transfer_single",
    "transfer_word",
    "transfer_word_scaled",
    "discriminant",
    "discriminant_derivative",
    "discriminant_sweep",
]

# Products are rescaled once an entry passes this size; the exponent is tracked separately.
_RESCALE_ABOVE = 1e100
_LOG_MAX = math.log(np.finfo(float).max)


class EnergyGrid:
    """
    Strictly increasing energies, optionally tied to the window they sample.
    """

    __slots__ = ("_points", "window")

    def __init__(self, points, window=None):
        points = np.asarray(points, dtype=float).ravel()
        if points.size > 1 and not np.all(np.diff(points) > 0):
            raise ValueError("EnergyGrid points must be strictly increasing")
        points.flags.writeable = False
        self._points = points
        self.window = window

    @classmethod
    def uniform(cls, lo, hi, n):
        if n < 2:
            raise ValueError("A uniform grid needs at least two points")
        return cls(np.linspace(lo, hi, n), EnergyWindow.from_bounds(lo, hi))

    @classmethod
    def covering(cls, window, step):
        """Grid of spacing at most ``step`` over every interval of ``window``, endpoints included."""
        if step <= 0:
            raise ValueError("grid step must be positive")
        pieces = []
        for lo, hi in window:
            n = max(2, int(math.ceil((hi - lo) / step)) + 1)
            pieces.append(np.linspace(lo, hi, n) if hi > lo else np.array([lo]))
        points = np.unique(np.concatenate(pieces)) if pieces else np.empty(0)
        return cls(points, window)

    @property
    def points(self):
        return self._points

    def __len__(self):
        return self._points.size

    def __iter__(self):
        return iter(self._points.tolist())


def potential(x, lam=1.0):
    """Aggregated potential of ``x`` scaled by the coupling ``lam``."""
    return lam * aggregate(x)


def transfer_single(v, E):
    """
    Examples
    --------
    >>> transfer_single(0.0, 2.0)
    Mat2(a11=2.0, a12=-1.0, a21=1.0, a22=0.0)
    """
    return Mat2(E - v, -1.0, 1.0, 0.0)


def transfer_word_scaled(x, E, lam=1.0):
    """
    Transfer matrix as ``exp(log_scale) * M``.

    Returns
    -------
    M : Mat2
        Normalized product; unimodular when ``log_scale == 0``.
    log_scale : float
    """
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for count, v in enumerate(potential(x, lam).tolist(), start=1):
        e = E - v
        a, b, c, d = e * a - c, e * b - d, a, b
        size = max(abs(a), abs(b), abs(c), abs(d))
        if size > _RESCALE_ABOVE:
            a, b, c, d = a / size, b / size, c / size, d / size
            log_scale += math.log(size)
        elif log_scale == 0.0 and count % RENORM_EVERY == 0:
            det = a * d - b * c
            if det > 0.0:
                root = math.sqrt(det)
                a, b, c, d = a / root, b / root, c / root, d / root
    return Mat2(a, b, c, d), log_scale


def _unscale(value, log_scale):
    if log_scale == 0.0 or value == 0.0:
        return value
    magnitude = math.log(abs(value)) + log_scale
    if magnitude > _LOG_MAX:
        return math.copysign(math.inf, value)
    return value * math.exp(log_scale)


def transfer_word(x, E, lam=1.0):
    """
    Ordered product ``T(lam x_q, E) ... T(lam x_1, E)`` over the aggregated potential.

    Entries overflow to ``inf`` only when the true product exceeds double range.
    """
    m, log_scale = transfer_word_scaled(x, E, lam)
    return Mat2(*(_unscale(v, log_scale) for v in m))


def discriminant(x, E, lam=1.0):
    """
    ``D(x, E) = tr T(x, E)``.

    Examples
    --------
    >>> discriminant([2.0, 0.0], 1.0)
    -3.0
    """
    m, log_scale = transfer_word_scaled(x, E, lam)
    return _unscale(m.trace, log_scale)


def discriminant_derivative(x, E, lam=1.0):
    """
    Discriminant and the logarithm of its energy derivative.

    The derivative of the product is propagated alongside it
    (``d(T M) = dT M + T dM`` with ``dT/dE = [[1, 0], [0, 0]]``) and both are
    rescaled together, so ``log|D'(E)|`` stays accurate when ``D'`` itself
    would overflow.

    Returns
    -------
    value : float
        ``D(E)``, possibly ``+-inf``.
    log_abs_derivative : float
        ``log |D'(E)|`` (``-inf`` where the derivative vanishes).
    """
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    da, db, dc, dd = 0.0, 0.0, 0.0, 0.0
    log_scale = 0.0
    for v in potential(x, lam).tolist():
        e = E - v
        da, db, dc, dd = a + e * da - dc, b + e * db - dd, da, db
        a, b, c, d = e * a - c, e * b - d, a, b
        size = max(abs(a), abs(b), abs(c), abs(d), abs(da), abs(db), abs(dc), abs(dd))
        if size > _RESCALE_ABOVE:
            a, b, c, d = a / size, b / size, c / size, d / size
            da, db, dc, dd = da / size, db / size, dc / size, dd / size
            log_scale += math.log(size)
    derivative = da + dd
    log_abs_derivative = math.log(abs(derivative)) + log_scale if derivative != 0.0 else -math.inf
    return _unscale(a + d, log_scale), log_abs_derivative


def discriminant_sweep(x, grid, lam=1.0):
    """
    Discriminant at every energy of ``grid`` (an `EnergyGrid` or array), vectorized over energies.
    """
    energies = grid.points if isinstance(grid, EnergyGrid) else np.asarray(grid, dtype=float).ravel()
    a = np.ones_like(energies)
    b = np.zeros_like(energies)
    c = np.zeros_like(energies)
    d = np.ones_like(energies)
    log_scale = np.zeros_like(energies)
    # one step grows entries by at most a factor 1 + |E - v|
    for v in potential(x, lam).tolist():
        e = energies - v
        a, b, c, d = e * a - c, e * b - d, a, b
        size = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
        big = size > _RESCALE_ABOVE
        if np.any(big):
            a[big] /= size[big]
            b[big] /= size[big]
            c[big] /= size[big]
            d[big] /= size[big]
            log_scale[big] += np.log(size[big])
    trace = a + d
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        magnitude = np.log(np.abs(trace)) + log_scale
        values = np.where(magnitude > _LOG_MAX, np.sign(trace) * np.inf, trace * np.exp(np.minimum(log_scale, _LOG_MAX)))
    return np.where(trace == 0.0, 0.0, values)
