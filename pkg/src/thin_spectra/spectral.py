"""
Floquet spectral data of periodic discrete Schrödinger operators.

The spectrum of a period-q operator is the set where ``|D(E)| <= 2``; it consists
of q bands whose edges are the eigenvalues of the periodic (``D = 2``) and
antiperiodic (``D = -2``) q x q truncations of the operator.
"""

import logging
import math
import warnings

import numpy as np
from astropy.table import Table
from scipy import linalg

from .exceptions import BandPairingWarning, DegenerateInput, NotInteriorOfBand
from .intervals import EnergyWindow
from .sl2 import TOL_HYP, conjugator, hs_norm_sq, log_spectral_radius
from .transfer import discriminant, discriminant_derivative, discriminant_sweep, potential, transfer_word, transfer_word_scaled
from .util import check_memory_allocation
from .words import cyclic_shift

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "BandSet",
    "band_edges",
    "in_spectrum",
    "measure_in_window",
    "lyapunov",
    "ids",
    "ids_derivative_conjugacy",
]

# Bands narrower than this (relative to max(1, |E|)) are re-measured from D'.
THIN_BAND_WIDTH = 1e-8

# Post-hoc sign-pattern validation is skipped above this period.
VALIDATE_MAX_PERIOD = 4096

_SIGN_TOL = 1e-6
_LARGE_PERIOD = 2**15


class BandSet:
    """
    The q closed bands ``[E_j-, E_j+]`` of a period-q operator, in increasing order.

    Parameters
    ----------
    bands : array-like, shape (q, 2)
    """

    __slots__ = ("_bands",)

    def __init__(self, bands):
        bands = np.array(bands, dtype=float).reshape(-1, 2)
        if bands.shape[0] == 0:
            raise DegenerateInput("A band set needs at least one band")
        if np.any(bands[:, 1] < bands[:, 0]):
            raise ValueError("Band with upper edge below its lower edge")
        bands = bands[np.argsort(bands[:, 0], kind="stable")]
        bands.flags.writeable = False
        self._bands = bands

    @property
    def bands(self):
        return self._bands

    @property
    def period(self):
        return self._bands.shape[0]

    def __len__(self):
        return self.period

    def __iter__(self):
        return iter((float(lo), float(hi)) for lo, hi in self._bands)

    def __repr__(self):
        return f"BandSet(q={self.period}, hull=[{self._bands[0, 0]:g}, {self._bands[-1, 1]:g}])"

    @property
    def measure(self):
        return float(np.sum(self._bands[:, 1] - self._bands[:, 0]))

    def contains(self, energy):
        return bool(np.any((self._bands[:, 0] <= energy) & (energy <= self._bands[:, 1])))

    def as_window(self):
        return EnergyWindow(self._bands)

    def gaps(self):
        """Open gaps, including the two unbounded ones, as ``(lo, hi)`` pairs."""
        gaps = [(-math.inf, float(self._bands[0, 0]))]
        upper = self._bands[0, 1]
        for lo, hi in self._bands[1:]:
            if lo > upper:
                gaps.append((float(upper), float(lo)))
            upper = max(upper, hi)
        gaps.append((float(upper), math.inf))
        return gaps

    def gap_containing(self, energy):
        """The open gap containing ``energy``, or None when ``energy`` is in the spectrum."""
        if self.contains(energy):
            return None
        for lo, hi in self.gaps():
            if lo < energy < hi:
                return lo, hi
        return None

    def to_tree(self):
        return {"period": self.period, "bands": self._bands.tolist()}

    @classmethod
    def from_tree(cls, tree):
        bands = cls(tree["bands"])
        if "period" in tree and int(tree["period"]) != bands.period:
            raise ValueError(f"period {tree['period']} does not match {bands.period} bands")
        return bands

    def to_table(self):
        table = Table(
            [np.arange(1, self.period + 1), self._bands[:, 0], self._bands[:, 1]],
            names=("band_index", "E_minus", "E_plus"),
        )
        table["E_minus"].info.format = ".17g"
        table["E_plus"].info.format = ".17g"
        return table

    @classmethod
    def from_table(cls, table):
        order = np.argsort(np.asarray(table["band_index"]))
        return cls(np.column_stack([np.asarray(table["E_minus"], dtype=float)[order], np.asarray(table["E_plus"], dtype=float)[order]]))


def _cyclic_order(q):
    """Ordering 0, 1, q-1, 2, q-2, ... that makes a cyclic tridiagonal matrix pentadiagonal."""
    order = [0]
    lo, hi = 1, q - 1
    while lo <= hi:
        order.append(lo)
        lo += 1
        if lo <= hi:
            order.append(hi)
            hi -= 1
    return np.array(order)


def _bloch_eigenvalues(values, corner):
    """
    Eigenvalues of the q x q truncation with hopping 1 and corner coupling ``corner``.
    """
    q = values.size
    if q == 2:
        off = 1.0 + corner
        return linalg.eigvalsh(np.array([[values[0], off], [off, values[1]]]))

    order = _cyclic_order(q)
    position = np.empty(q, dtype=int)
    position[order] = np.arange(q)

    first = np.append(np.arange(q - 1), q - 1)
    second = np.append(np.arange(1, q), 0)
    weights = np.ones(q)
    weights[-1] = corner

    banded = np.zeros((3, q))
    banded[0] = values[order]
    p, r = position[first], position[second]
    banded[np.abs(p - r), np.minimum(p, r)] = weights
    return linalg.eigvals_banded(banded, lower=True)


def _refine_thin_bands(values, bands):
    """Replace widths below eigen-solver resolution by ``4 / |D'(center)|``."""
    widths = bands[:, 1] - bands[:, 0]
    centers = 0.5 * (bands[:, 0] + bands[:, 1])
    thin = widths < THIN_BAND_WIDTH * np.maximum(1.0, np.abs(centers))
    if not np.any(thin):
        return bands
    refined = bands.copy()
    for j in np.flatnonzero(thin):
        _, log_slope = discriminant_derivative(values, centers[j])
        half = 2.0 * math.exp(-log_slope) if math.isfinite(log_slope) else 0.5 * widths[j]
        refined[j] = centers[j] - half, centers[j] + half
    log.debug(f"Re-measured {int(thin.sum())} thin bands from the discriminant slope")
    return refined


def _sign_pattern_ok(values, bands):
    widths = bands[:, 1] - bands[:, 0]
    scale = np.maximum(1.0, np.abs(bands[:, 0]))
    wide = widths > THIN_BAND_WIDTH * scale
    midpoints, inside = [], []
    if np.any(wide):
        midpoints.append(0.5 * (bands[wide, 0] + bands[wide, 1]))
        inside.append(np.ones(int(wide.sum()), dtype=bool))
    gap_lo, gap_hi = bands[:-1, 1], bands[1:, 0]
    open_gap = gap_hi - gap_lo > THIN_BAND_WIDTH * np.maximum(1.0, np.abs(gap_lo))
    if np.any(open_gap):
        midpoints.append(0.5 * (gap_lo[open_gap] + gap_hi[open_gap]))
        inside.append(np.zeros(int(open_gap.sum()), dtype=bool))
    if not midpoints:
        return True
    trace = np.abs(discriminant_sweep(values, np.concatenate(midpoints)))
    inside = np.concatenate(inside)
    return bool(np.all(trace[inside] <= 2.0 + _SIGN_TOL) and np.all(trace[~inside] >= 2.0 - _SIGN_TOL))


def _bisection_refine(values, bands, iterations=60):
    """
    Re-locate every edge as the crossing of ``|D| = 2`` in a small bracket around it.
    """
    edges = bands.ravel().copy()
    scale = 1e-6 * np.maximum(1.0, np.abs(edges))
    # Lower edges have the spectrum to their right, upper edges to their left.
    inside_right = np.tile([True, False], bands.shape[0])
    lo = edges - scale
    hi = edges + scale
    f_lo = np.abs(discriminant_sweep(values, lo)) - 2.0
    f_hi = np.abs(discriminant_sweep(values, hi)) - 2.0
    bracketed = np.sign(f_lo) != np.sign(f_hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid = np.abs(discriminant_sweep(values, mid)) - 2.0
        outside = f_mid > 0.0
        move_lo = np.where(inside_right, outside, ~outside)
        lo = np.where(bracketed & move_lo, mid, lo)
        hi = np.where(bracketed & ~move_lo, mid, hi)
    edges = np.where(bracketed, 0.5 * (lo + hi), edges)
    return np.sort(edges).reshape(-1, 2)


def band_edges(x, lam=1.0, validate=True):
    """
    The q bands of the periodic operator with potential ``lam * x``.

    Parameters
    ----------
    x : Word or sequence of float
    lam : float
        Coupling applied to the aggregated potential.
    validate : bool
        Check the sign pattern of the discriminant on band and gap midpoints and
        fall back to bisection refinement when it is violated.

    Returns
    -------
    BandSet

    Raises
    ------
    DegenerateInput
        If the potential is empty.

    Examples
    --------
    >>> band_edges([0.0]).bands.tolist()
    [[-2.0, 2.0]]
    """
    values = potential(x, lam)
    q = values.size
    if q == 0:
        raise DegenerateInput("band_edges needs a nonempty potential")
    if q == 1:
        return BandSet([[values[0] - 2.0, values[0] + 2.0]])

    if q >= _LARGE_PERIOD and not check_memory_allocation(8 * 6 * q):
        log.warning(f"Band edges for period {q} may not fit in the allowed memory")
    edges = np.sort(np.concatenate([_bloch_eigenvalues(values, 1.0), _bloch_eigenvalues(values, -1.0)]))
    bands = _refine_thin_bands(values, edges.reshape(q, 2))

    if validate and q <= VALIDATE_MAX_PERIOD and not _sign_pattern_ok(values, bands):
        warnings.warn(f"Band pairing failed the sign check for period {q}; refining edges by bisection", BandPairingWarning)
        bands = _refine_thin_bands(values, _bisection_refine(values, bands))

    log.debug(f"Computed {q} bands spanning [{bands[0, 0]:.6g}, {bands[-1, 1]:.6g}]")
    return BandSet(bands)


def in_spectrum(x, E, lam=1.0):
    return abs(discriminant(x, E, lam)) <= 2.0 + TOL_HYP


def measure_in_window(bands, K):
    """
    Lebesgue measure of the bands inside the window ``K``.

    Examples
    --------
    >>> measure_in_window(BandSet([[-2, 2]]), EnergyWindow([[0, 1]]))
    1.0
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    return K.measure_of(bands.bands)


def lyapunov(x, E, lam=1.0):
    """
    ``(1/L) log spr T(x, E)`` with L the aggregated length; zero on the spectrum.
    """
    length = potential(x, lam).size
    if length == 0:
        raise DegenerateInput("lyapunov needs a nonempty potential")
    m, log_scale = transfer_word_scaled(x, E, lam)
    return max(0.0, log_spectral_radius(m, log_scale) / length)


def ids(x, E, lam=1.0, bands=None):
    """
    Integrated density of states of the periodic operator at ``E``.

    Inside band j (counted from 1) the value is ``(j - 1)/q`` plus
    ``arccos(-s_j D(E) / 2) / (q pi)``, where ``s_j = (-1)**(q - j)`` is the sign
    of ``D`` at the upper edge of the band.
    """
    values = potential(x, lam)
    if bands is None:
        bands = band_edges(values)
    edges = bands.bands
    q = bands.period
    if E <= edges[0, 0]:
        return 0.0
    if E >= edges[-1, 1]:
        return 1.0
    full = int(np.count_nonzero(edges[:, 1] <= E))
    if full < q and E > edges[full, 0]:
        sign = -1.0 if (q - full - 1) % 2 else 1.0
        argument = min(1.0, max(-1.0, -sign * discriminant(values, E) / 2.0))
        return (full + math.acos(argument) / math.pi) / q
    return full / q


def ids_derivative_conjugacy(x, E, lam=1.0):
    """
    Derivative of the IDS from the conjugators of all cyclic shifts.

    ``(1 / (4 pi q)) sum_j ||M(shift^j x, E)||_HS^2``

    Raises
    ------
    NotInteriorOfBand
        If ``|D(E)|`` is not below ``2 - tol``.
    """
    values = potential(x, lam)
    q = values.size
    trace = discriminant(values, E)
    if not abs(trace) < 2.0 - TOL_HYP:
        raise NotInteriorOfBand(f"|D({E})| = {abs(trace)} is not inside a band")
    total = 0.0
    for shift in range(q):
        total += hs_norm_sq(conjugator(transfer_word(cyclic_shift(values, shift), E)))
    return total / (4.0 * math.pi * q)
