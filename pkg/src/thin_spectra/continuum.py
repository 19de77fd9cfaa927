"""
Transfer matrices of continuum Schrödinger operators ``-u'' + lam phi u = E u``.

Potentials are piecewise constant on a uniform subgrid of each cell, so a cell's
transfer matrix is an exact product of free blocks at shifted energies. The
free blocks are written through the entire functions ``c(z) = cos(sqrt(z))``
and ``s(z) = sin(sqrt(z)) / sqrt(z)``, which cover negative ``z`` without complex
square roots.

The thin-spectrum construction carries over: `continuum_gap_cover` covers a
window by gaps of words built from copies of a base word shifted by
``+-epsilon/2``, and `continuum_decay_experiment` measures the spectrum of the
assembled words.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DepthExhausted, NotFoundWithinBound, NTooSmall, WindowEmpty
from .intervals import EnergyWindow
from .sl2 import TOL_HYP, Mat2, chain_product
from .thin import _fit_decay, _greedy_cover
from .transfer import EnergyGrid
from .util import lcm_capped

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "CellPotential",
    "ContinuumWord",
    "entire_c",
    "entire_s",
    "free_transfer",
    "transfer_ode",
    "transfer_rk4",
    "transfer_concat",
    "continuum_bands",
    "continuum_measure",
    "continuum_sieve_trace",
    "continuum_sieve_gap",
    "repeat_trace",
    "continuum_repeat_gap",
    "shift_word",
    "repeat_word",
    "continuum_distance",
    "continuum_open_gap",
    "ContinuumCover",
    "ContinuumTrace",
    "continuum_gap_cover",
    "assemble_continuum_word",
    "continuum_decay_experiment",
]

# Below this |z| the entire functions switch to their Taylor polynomials.
SERIES_BELOW = 1e-4
EDGE_TOL = 1e-9
SIEVE_SCAN_POINTS = 2048


def _as_output(value):
    return float(value) if np.ndim(value) == 0 else value


def entire_c(z):
    """
    ``cos(sqrt(z))``, continued to ``cosh(sqrt(-z))`` for negative ``z``.

    Examples
    --------
    >>> entire_c(0.0)
    1.0
    """
    z = np.asarray(z, dtype=float)
    root = np.sqrt(np.abs(z))
    with np.errstate(over="ignore"):
        value = np.where(z >= 0, np.cos(root), np.cosh(root))
    series = 1.0 - z / 2.0 + z * z / 24.0 - z**3 / 720.0
    return _as_output(np.where(np.abs(z) < SERIES_BELOW, series, value))


def entire_s(z):
    """
    ``sin(sqrt(z)) / sqrt(z)``, continued to ``sinh(sqrt(-z)) / sqrt(-z)`` for negative ``z``.
    """
    z = np.asarray(z, dtype=float)
    root = np.sqrt(np.abs(z))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        value = np.where(z >= 0, np.sin(root), np.sinh(root)) / root
    series = 1.0 - z / 6.0 + z * z / 120.0 - z**3 / 5040.0
    return _as_output(np.where(np.abs(z) < SERIES_BELOW, series, value))


@dataclass(frozen=True)
class CellPotential:
    """
    A potential on ``[0, length)``, constant on each of ``len(samples)`` equal subcells.
    """

    length: float
    samples: tuple = (0.0,)

    def __post_init__(self):
        if not self.length > 0 or not math.isfinite(self.length):
            raise ValueError(f"cell length must be positive, got {self.length}")
        samples = tuple(float(v) for v in np.atleast_1d(self.samples))
        if not samples:
            raise ValueError("a cell needs at least one sample")
        if not all(math.isfinite(v) for v in samples):
            raise ValueError("cell samples must be finite")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def constant(cls, length, value=0.0):
        return cls(length, (value,))

    @property
    def n_sub(self):
        return len(self.samples)

    @property
    def step(self):
        return self.length / self.n_sub

    def value_at(self, x):
        index = min(self.n_sub - 1, max(0, int(x // self.step)))
        return self.samples[index]

    def to_tree(self):
        return {"a": self.length, "samples": list(self.samples)}

    @classmethod
    def from_tree(cls, tree):
        return cls(float(tree["a"]), tuple(tree["samples"]))


@dataclass(frozen=True)
class ContinuumWord:
    """A nonempty concatenation of cells."""

    cells: tuple

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise ValueError("a continuum word needs at least one cell")
        object.__setattr__(self, "cells", cells)

    @property
    def length(self):
        return sum(cell.length for cell in self.cells)

    def __len__(self):
        return len(self.cells)

    def to_tree(self):
        return {"kind": "continuum_word", "cells": [cell.to_tree() for cell in self.cells]}

    @classmethod
    def from_tree(cls, tree):
        return cls(tuple(CellPotential.from_tree(cell) for cell in tree["cells"]))


def free_transfer(a, E):
    """
    Transfer matrix of ``-u'' = E u`` across an interval of length ``a``.

    Examples
    --------
    >>> free_transfer(1.0, 0.0)
    Mat2(a11=1.0, a12=1.0, a21=-0.0, a22=1.0)
    """
    if not a > 0:
        raise ValueError(f"interval length must be positive, got {a}")
    z = a * a * E
    c = entire_c(z)
    s = entire_s(z)
    return Mat2(c, a * s, -a * E * s, c)


def transfer_ode(phi, E, lam=1.0):
    """Exact transfer matrix of a piecewise-constant cell: one free block per subcell."""
    h = phi.step
    return chain_product([free_transfer(h, E - lam * v) for v in phi.samples])


def transfer_rk4(phi, E, lam=1.0, steps=4096):
    """
    Fixed-step classical Runge-Kutta integration of the fundamental matrix.

    Each step takes the potential from the subcell containing its midpoint, so
    ``steps`` should be a multiple of ``phi.n_sub``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    h = phi.length / steps
    Y = np.eye(2)
    for n in range(steps):
        A = np.array([[0.0, 1.0], [lam * phi.value_at((n + 0.5) * h) - E, 0.0]])
        k1 = A @ Y
        k2 = A @ (Y + 0.5 * h * k1)
        k3 = A @ (Y + 0.5 * h * k2)
        k4 = A @ (Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return Mat2.from_array(Y)


def transfer_concat(w, E, lam=1.0):
    """``B(phi_n, E) ... B(phi_1, E)``: the first cell acts first."""
    return chain_product([transfer_ode(cell, E, lam) for cell in w.cells])


def _trace(w, E, lam):
    return transfer_concat(w, E, lam).trace


def _excess(w, E, lam):
    return abs(_trace(w, E, lam)) - 2.0 - TOL_HYP


def _bisect_edge(w, lam, inside, outside):
    """Refine the boundary between an energy in the spectrum and one outside it."""
    for _ in range(200):
        if abs(outside - inside) <= 0.1 * EDGE_TOL:
            break
        mid = 0.5 * (inside + outside)
        if _excess(w, mid, lam) <= 0.0:
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def _bisect_into_band(w, lam, lo, hi, trace_lo):
    """
    An energy of the spectrum between ``lo`` and ``hi``, where the trace changes sign.

    The discriminant is monotone across each band, so a sign change between two
    energies outside the spectrum brackets a whole band.
    """
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        trace = _trace(w, mid, lam)
        if abs(trace) <= 2.0:
            return mid
        if (trace > 0) == (trace_lo > 0):
            lo, trace_lo = mid, trace
        else:
            hi = mid
    return 0.5 * (lo + hi)


def continuum_bands(w, E_range, lam=1.0, grid=2048):
    """
    Energies in ``E_range`` where ``|tr B(w, E)| <= 2``.

    The trace is scanned on ``grid`` points and every change of membership is
    refined by bisection to 1e-9. A sign change of the trace between two
    energies outside the spectrum marks a band narrower than the grid spacing;
    it is located by bisection on the trace and refined the same way.

    Returns
    -------
    EnergyWindow
    """
    if grid < 2:
        raise ValueError("grid needs at least two points")
    lo, hi = (float(v) for v in E_range)
    if not hi > lo:
        raise ValueError("E_range must be an increasing pair")
    energies = np.linspace(lo, hi, grid).tolist()
    traces = [_trace(w, E, lam) for E in energies]
    inside = [abs(t) - 2.0 - TOL_HYP <= 0.0 for t in traces]

    bands = []
    start = lo if inside[0] else None
    for i in range(1, grid):
        if inside[i] == inside[i - 1]:
            if not inside[i] and (traces[i] > 0) != (traces[i - 1] > 0):
                within = _bisect_into_band(w, lam, energies[i - 1], energies[i], traces[i - 1])
                bands.append((_bisect_edge(w, lam, within, energies[i - 1]), _bisect_edge(w, lam, within, energies[i])))
            continue
        if inside[i]:
            start = _bisect_edge(w, lam, energies[i], energies[i - 1])
        else:
            bands.append((start, _bisect_edge(w, lam, energies[i - 1], energies[i])))
            start = None
    if start is not None:
        bands.append((start, hi))
    log.debug(f"{len(bands)} continuum bands in [{lo}, {hi}]")
    return EnergyWindow(bands)


def continuum_measure(w, window, lam=1.0, grid=2048):
    """Lebesgue measure of the spectrum inside ``window``."""
    if not isinstance(window, EnergyWindow):
        window = EnergyWindow(window)
    return sum(continuum_bands(w, piece, lam, grid).measure for piece in window if piece[1] > piece[0])


def continuum_sieve_trace(M, a, E, lam):
    """
    Trace of ``M B(lam chi_[0, a), E)`` for ``M = B(psi, E) = [[alpha, beta], [gamma, delta]]``.

    ``(alpha + delta) c + a (gamma - beta (E - lam)) s`` with ``c, s`` evaluated at ``a^2 (E - lam)``.
    """
    z = a * a * (E - lam)
    return (M.a11 + M.a22) * entire_c(z) + a * (M.a21 - M.a12 * (E - lam)) * entire_s(z)


def continuum_sieve_gap(psi, a, E, lam_max, scan=SIEVE_SCAN_POINTS):
    """
    A coupling ``lam`` in ``[0, lam_max]`` with ``|tr B((lam chi_[0, a)) psi, E)| > 3``.

    Raises
    ------
    NotFoundWithinBound
    """
    if lam_max < 0:
        raise ValueError("lam_max must be nonnegative")
    M = transfer_concat(psi, E) if isinstance(psi, ContinuumWord) else transfer_ode(psi, E)
    couplings = np.linspace(0.0, lam_max, scan) if lam_max > 0 else np.zeros(1)
    for lam in couplings.tolist():
        if abs(continuum_sieve_trace(M, a, E, lam)) > 3.0:
            return lam
    raise NotFoundWithinBound(lam_max)


def repeat_trace(a, n, E, lam):
    """Trace of the free block of length ``a n`` at energy ``E - lam``: ``2 c(a^2 n^2 (E - lam))``."""
    return 2.0 * entire_c(a * a * n * n * (E - lam))


def continuum_repeat_gap(a, n, E, lam_max):
    """
    A coupling making the ``n``-fold repeated cell hyperbolic at ``E``.

    Any ``lam > E`` works; ``E + 1`` (at least 0) is returned, clamped to ``lam_max``.

    Examples
    --------
    >>> continuum_repeat_gap(1.0, 2, 0.0, 5.0)
    1.0
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    lam = min(max(E + 1.0, 0.0), lam_max)
    if not abs(repeat_trace(a, n, E, lam)) > 2.0 + TOL_HYP:
        raise NotFoundWithinBound(lam_max)
    return float(lam)



def shift_word(w, delta):
    """``w`` with ``delta`` added to every sample."""
    return ContinuumWord(tuple(CellPotential(cell.length, tuple(v + delta for v in cell.samples)) for cell in w.cells))


def repeat_word(w, k):
    """``w`` concatenated with itself ``k`` times."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return ContinuumWord(w.cells * k)


def continuum_distance(x, y, cap=None):
    """
    Uniform distance between the periodic extensions of two words on matching cells.

    Cell ``i`` of each extension must have the same length and subgrid; the
    distance is the largest sample difference over one common period.

    Raises
    ------
    ValueError
        If the cell layouts differ.
    LcmOverflow
    """
    period = lcm_capped([len(x), len(y)], cap)
    distance = 0.0
    for i in range(period):
        a, b = x.cells[i % len(x)], y.cells[i % len(y)]
        if a.length != b.length or a.n_sub != b.n_sub:
            raise ValueError(f"cell {i} differs in layout: {a.length}/{a.n_sub} against {b.length}/{b.n_sub}")
        distance = max(distance, max(abs(u - v) for u, v in zip(a.samples, b.samples)))
    return distance


def _words_of_length(m, node_budget):
    """Sign patterns for products of ``m`` copies: every pattern within budget, else the runs ``+^i -^(m-i)``."""
    if 2**m <= node_budget:
        return itertools.product((True, False), repeat=m)
    return ((True,) * i + (False,) * (m - i) for i in range(m + 1))


def continuum_open_gap(x, E, epsilon, lam=1.0, depth_cap=16, *, allow_input=True, node_budget=4096):
    """
    A word within ``epsilon`` of ``x`` whose transfer matrix is hyperbolic at ``E``.

    ``x`` itself is returned when it is already hyperbolic and ``allow_input``
    holds. Otherwise products of ``m`` copies of ``x`` shifted by ``+-epsilon/2``
    are searched for ``m = 1, 2, 4, ...`` up to ``depth_cap``.

    Raises
    ------
    DepthExhausted
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if allow_input and _excess(x, E, lam) > 0.0:
        return x
    up, down = shift_word(x, 0.5 * epsilon), shift_word(x, -0.5 * epsilon)
    blocks = {True: transfer_concat(up, E, lam), False: transfer_concat(down, E, lam)}
    m = 1
    while m <= depth_cap:
        for pattern in _words_of_length(m, node_budget):
            if abs(chain_product([blocks[sign] for sign in pattern]).trace) > 2.0 + TOL_HYP:
                cells = tuple(cell for sign in pattern for cell in (up if sign else down).cells)
                log.debug(f"E={E:.6g}: hyperbolic product of {m} copies")
                return ContinuumWord(cells)
        m *= 2
    raise DepthExhausted(depth_cap, f"no hyperbolic product of up to {depth_cap} copies at E={E}")


def _gap_around(w, E, lam, step, lo_bound, hi_bound):
    """The spectral gap of ``w`` containing ``E``, clipped to ``[lo_bound, hi_bound]``."""
    edges = []
    for direction, bound in ((-1.0, lo_bound), (1.0, hi_bound)):
        outside, trace = E, _trace(w, E, lam)
        edge = bound
        while (bound - outside) * direction > 0:
            trial = bound if abs(bound - outside) <= step else outside + direction * step
            trial_trace = _trace(w, trial, lam)
            if abs(trial_trace) <= 2.0 + TOL_HYP:
                edge = _bisect_edge(w, lam, trial, outside)
                break
            if (trial_trace > 0) != (trace > 0):
                within = _bisect_into_band(w, lam, outside, trial, trace)
                edge = _bisect_edge(w, lam, within, outside)
                break
            outside, trace = trial, trial_trace
        edges.append(edge)
    return edges[0], edges[1]


class ContinuumCover(NamedTuple):
    """Gap-opening words lifted to ``copies`` copies of the base word, with the gap each one covers."""

    words: tuple
    gaps: tuple
    copies: int

    @property
    def m(self):
        return len(self.words)


class ContinuumTrace(NamedTuple):
    N: int
    u: int
    length: float
    measure: float
    c0: float = None

    def to_tree(self):
        return {"N": self.N, "u": self.u, "length": self.length, "measure": self.measure, "c0": self.c0}


def continuum_gap_cover(x, K, epsilon, lam=1.0, grid_step=0.05, depth_cap=16, *, max_refinements=1024):
    """
    Cover ``K`` by spectral gaps of words within ``epsilon`` of ``x``.

    Gaps are opened on a ``grid_step`` grid of ``K`` and chosen greedily, as for
    discrete words; every member is then repeated up to the largest number of
    copies of ``x`` among the members.

    Raises
    ------
    WindowEmpty
    CoverageFailure
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    if K.is_empty:
        raise WindowEmpty("Cannot cover an empty window")
    lo_bound, hi_bound = K.hull()
    lo_bound, hi_bound = lo_bound - grid_step, hi_bound + grid_step
    scan = 0.25 * grid_step

    def candidate(energy, allow_input=True):
        try:
            word = continuum_open_gap(x, energy, epsilon, lam, depth_cap, allow_input=allow_input)
        except DepthExhausted:
            log.debug(f"No continuum gap opened at E={energy:.6g}")
            return None
        lo, hi = _gap_around(word, energy, lam, scan, lo_bound, hi_bound)
        return lo, hi, word

    def patch(energy):
        for allow_input in (True, False):
            found = candidate(energy, allow_input)
            if found is not None and found[0] < energy < found[1]:
                return found
        return None

    grid = EnergyGrid.covering(K, grid_step)
    candidates = [c for c in (candidate(energy) for energy in grid) if c is not None]
    chosen = _greedy_cover(K, candidates, patch, max_refinements)

    multiples = [len(word) // len(x) for _, _, word in chosen]
    copies = lcm_capped(multiples)
    words = tuple(repeat_word(word, copies // k) for (_, _, word), k in zip(chosen, multiples))
    cover = ContinuumCover(words, tuple((lo, hi) for lo, hi, _ in chosen), copies)
    log.info(f"Continuum cover of {K!r}: {cover.m} words of {copies} copies")
    return cover


def assemble_continuum_word(cover, x, N):
    """
    ``c_1^u ... c_m^u x^(N - m t u)`` with ``u`` maximal subject to ``m t u <= N``.

    Raises
    ------
    NTooSmall
    """
    mt = cover.m * cover.copies
    u = N // mt
    if u < 1:
        raise NTooSmall(f"N={N} is below m t = {mt}")
    cells = tuple(cell for word in cover.words for cell in word.cells * u) + x.cells * (N - mt * u)
    return ContinuumWord(cells)


def continuum_decay_experiment(cover, x, K, N_list, lam=1.0, grid=2048):
    """
    Spectral measure inside ``K`` of the assembled continuum words for each ``N``.

    ``c0`` is minus the least-squares slope of ``log(measure)`` against ``N`` and
    is shared by every trace; it is None, with a FitWarning, when fewer than two
    measures are positive.

    Returns
    -------
    list of ContinuumTrace
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    N_list = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    rows = []
    for N in N_list:
        word = assemble_continuum_word(cover, x, N)
        measure = continuum_measure(word, K, lam, grid)
        log.debug(f"continuum N={N}: measure {measure:.6g}")
        rows.append((N, N // (cover.m * cover.copies), word.length, measure))
    slope = _fit_decay(N_list, [row[3] for row in rows])
    c0 = None if slope is None else -slope
    return [ContinuumTrace(*row, c0) for row in rows]
