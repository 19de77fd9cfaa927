"""
Thin-spectrum construction.

A finite family of gap-opening words covering an energy window is normalized to
a common period and assembled into ``c_1^u ... c_m^u a^(N - m t u)``; the
spectral measure of the assembled word inside the window decays exponentially in
``N``. `run_stages` iterates the construction with shrinking distance budgets and
growing windows, and `box_dimension_estimate` measures how thin the result is.
"""

import logging
import math
import warnings
from typing import NamedTuple

import numpy as np
from astropy.modeling import fitting, models

from .exceptions import (
    BlockMismatch,
    CoverageFailure,
    DepthExhausted,
    ExceptionalEnergy,
    FitWarning,
    NTooSmall,
    StageBudgetExceeded,
    WindowEmpty,
)
from .gaps import exceptional_set, open_gap
from .intervals import EnergyWindow
from .spectral import band_edges, lyapunov, measure_in_window
from .transfer import EnergyGrid
from .util import get_envar_as_int, lcm_capped, parallel_map
from .words import Word, concat, sharp_power, word_distance

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "CoverMember",
    "GapCover",
    "ThinTrace",
    "StageState",
    "build_gap_cover",
    "assemble_thin_word",
    "lyapunov_floor",
    "decay_experiment",
    "run_stages",
    "verify_stages",
    "box_dimension_estimate",
    "max_word_length",
]

LYAPUNOV_GRID_POINTS = 64


def max_word_length():
    """Stage word-length cap in letters, from ``THIN_SPECTRA_MAX_WORD_LENGTH``."""
    return get_envar_as_int("THIN_SPECTRA_MAX_WORD_LENGTH", 10**5)


class CoverMember(NamedTuple):
    """A word together with the part of its gap (for ``coupling``) that the cover uses."""

    word: Word
    coupling: float
    gap: tuple

    def to_tree(self):
        return {"word": self.word.to_tree(), "coupling": self.coupling, "gap": list(self.gap)}

    @classmethod
    def from_tree(cls, tree):
        return cls(Word.from_tree(tree["word"]), float(tree["coupling"]), tuple(float(v) for v in tree["gap"]))


class GapCover:
    """
    Gap-opening words whose gaps cover a window for every coupling of a grid.

    All member words have ``common_period * base_period`` letters.
    """

    def __init__(self, members, common_period, base_period):
        self.members = list(members)
        self.common_period = int(common_period)
        self.base_period = int(base_period)

    @property
    def words(self):
        """Distinct member words in order of first appearance."""
        unique = []
        for member in self.members:
            if member.word not in unique:
                unique.append(member.word)
        return unique

    @property
    def m(self):
        return len(self.words)

    @property
    def block_size(self):
        return self.members[0].word.block_size

    def __repr__(self):
        return f"GapCover(m={self.m}, t={self.common_period}, p={self.base_period}, members={len(self.members)})"

    def to_tree(self):
        return {
            "kind": "gap_cover",
            "common_period": self.common_period,
            "base_period": self.base_period,
            "members": [member.to_tree() for member in self.members],
        }

    @classmethod
    def from_tree(cls, tree):
        return cls([CoverMember.from_tree(m) for m in tree["members"]], tree["common_period"], tree["base_period"])


class ThinTrace(NamedTuple):
    """Spectral measure of one assembled word, per coupling."""

    N: int
    u: int
    word_length: int
    measures: dict
    lyapunov_floor: float
    c0: float = None
    rate_reference: float = None

    def rows(self):
        """CSV rows ``(N, u, lambda, measure)``."""
        return [(self.N, self.u, lam, measure) for lam, measure in sorted(self.measures.items())]

    def to_tree(self):
        return {
            "N": self.N,
            "u": self.u,
            "word_length": self.word_length,
            "measures": [{"coupling": lam, "measure": m} for lam, m in sorted(self.measures.items())],
            "lyapunov_floor": self.lyapunov_floor,
            "c0": self.c0,
            "rate_reference": self.rate_reference,
        }

    @classmethod
    def from_tree(cls, tree):
        measures = {float(item["coupling"]): float(item["measure"]) for item in tree["measures"]}
        return cls(
            int(tree["N"]),
            int(tree["u"]),
            int(tree["word_length"]),
            measures,
            float(tree["lyapunov_floor"]),
            tree.get("c0"),
            tree.get("rate_reference"),
        )


class StageState(NamedTuple):
    """One stage of the iterated construction."""

    stage: int
    word: Word
    epsilon: float
    eta: float
    period: int
    window: EnergyWindow
    measures: dict
    multiplier: int = 1
    distance: float = 0.0

    def to_tree(self):
        return {
            "stage": self.stage,
            "word": self.word.to_tree(),
            "epsilon": self.epsilon,
            "eta": self.eta,
            "period": self.period,
            "window": self.window.to_tree(),
            "measures": [{"coupling": lam, "measure": m} for lam, m in sorted(self.measures.items())],
            "multiplier": self.multiplier,
            "distance": self.distance,
        }

    @classmethod
    def from_tree(cls, tree):
        return cls(
            int(tree["stage"]),
            Word.from_tree(tree["word"]),
            float(tree["epsilon"]),
            float(tree["eta"]),
            int(tree["period"]),
            EnergyWindow.from_tree(tree["window"]),
            {float(item["coupling"]): float(item["measure"]) for item in tree["measures"]},
            int(tree.get("multiplier", 1)),
            float(tree.get("distance", 0.0)),
        )


def _gap_candidate(args):
    """Open a gap at one energy and return ``(lo, hi, word)`` for the gap around it, or None."""
    a, energy, epsilon, family, depth_cap, allow_input = args
    try:
        certificate = open_gap(a, energy, epsilon, family, depth_cap, allow_input=allow_input, dyadic=True)
    except DepthExhausted:
        log.debug(f"No gap opened at E={energy:.6g}")
        return None
    gap = band_edges(certificate.word, family.coupling).gap_containing(energy)
    if gap is None:
        return None
    return gap[0], gap[1], certificate.word


def _patch(a, energy, epsilon, family, depth_cap):
    """A candidate whose gap strictly contains ``energy``, trying ``a`` itself before its neighbours."""
    for allow_input in (True, False):
        candidate = _gap_candidate((a, energy, epsilon, family, depth_cap, allow_input))
        if candidate is not None and candidate[0] < energy < candidate[1]:
            return candidate
    return None


def _greedy_cover(window, candidates, patch, max_refinements):
    """
    Choose candidate gaps covering ``window`` left to right.

    At each frontier the candidate containing it that reaches furthest right is
    taken; when none contains the frontier a new candidate is requested there.
    """
    chosen = []
    refinements = 0
    for k_lo, k_hi in window:
        frontier = k_lo
        while True:
            containing = [c for c in candidates if c[0] < frontier < c[1]]
            if not containing:
                if refinements >= max_refinements:
                    raise CoverageFailure(f"cover stuck at E={frontier} after {refinements} refinements")
                refinements += 1
                candidate = patch(frontier)
                if candidate is None:
                    raise CoverageFailure(f"no gap can be opened around E={frontier}")
                candidates.append(candidate)
                continue
            best = max(containing, key=lambda c: c[1])
            chosen.append(best)
            if best[1] > k_hi:
                break
            frontier = best[1]
    if refinements:
        log.debug(f"Greedy cover needed {refinements} adaptive refinements")
    return chosen


def build_gap_cover(a, K, epsilon, couplings, family, grid_step, depth_cap=20, *, max_refinements=4096, workers=None):
    """
    Build a finite cover of ``K`` by gaps of words within ``epsilon`` of ``a``.

    For each coupling, `open_gap` is called on a ``grid_step`` grid of ``K`` and
    the gaps around the grid energies are selected greedily; when the frontier
    cannot advance, a gap is opened at the frontier itself. Member words are then
    lifted to the least common multiple of their periods.

    Parameters
    ----------
    a : Word
    K : EnergyWindow
    epsilon : float
    couplings : list of float
    family : Family
    grid_step : float
    depth_cap : int
    max_refinements : int
        Frontier patches allowed per coupling.
    workers : int, optional
        Process count for the grid sweep.

    Returns
    -------
    GapCover

    Raises
    ------
    ExceptionalEnergy
        If ``K`` comes within ``grid_step`` of the family's exceptional set.
    CoverageFailure
    LcmOverflow
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    if K.is_empty:
        raise WindowEmpty("Cannot cover an empty window")
    if not couplings:
        raise ValueError("At least one coupling is required")
    exceptional = exceptional_set(family)
    if K.min_distance_to(exceptional.roots) <= grid_step:
        raise ExceptionalEnergy(f"window {K!r} comes within {grid_step} of the exceptional set {list(exceptional.roots)}")

    grid = EnergyGrid.covering(K, grid_step)
    hull_lo, hull_hi = K.hull()
    members = []
    for lam in couplings:
        scaled = family.with_coupling(lam)
        tasks = [(a, energy, epsilon, scaled, depth_cap, True) for energy in grid]
        candidates = [c for c in parallel_map(_gap_candidate, tasks, workers) if c is not None]
        log.debug(f"coupling {lam}: {len(candidates)} gaps from {len(grid)} grid energies")

        chosen = _greedy_cover(
            K, candidates, lambda energy, scaled=scaled: _patch(a, energy, epsilon, scaled, depth_cap), max_refinements
        )
        for lo, hi, word in chosen:
            gap = (max(lo, hull_lo - grid_step), min(hi, hull_hi + grid_step))
            members.append(CoverMember(word, float(lam), gap))

    p = len(a)
    multiples = []
    for member in members:
        if len(member.word) % p:
            raise BlockMismatch(f"member of {len(member.word)} letters is not a multiple of the base period {p}")
        multiples.append(len(member.word) // p)
    t = lcm_capped(multiples)
    lifted = [CoverMember(sharp_power(m.word, t // k), m.coupling, m.gap) for m, k in zip(members, multiples)]
    cover = GapCover(lifted, t, p)
    log.info(f"Built {cover!r} over {K!r}")
    return cover


def assemble_thin_word(cover, a, N):
    """
    ``c_1^u ... c_m^u a^(N - m t u)`` with ``u`` maximal subject to ``m t u <= N``.

    The result has ``N`` times as many letters as ``a``.

    Raises
    ------
    NTooSmall
        If ``N < m t``.
    """
    words = cover.words
    m, t = len(words), cover.common_period
    if N < m * t:
        raise NTooSmall(f"N={N} is below m*t={m * t}")
    u = N // (m * t)
    parts = [sharp_power(word, u) for word in words]
    rest = N - m * t * u
    if rest:
        parts.append(sharp_power(a, rest))
    return concat(*parts)


def _window_grid(K, n=LYAPUNOV_GRID_POINTS):
    lo, hi = K.hull()
    points = [E for E in np.linspace(lo, hi, n).tolist() if K.contains(E)]
    return points or [0.5 * (a + b) for a, b in K]


def lyapunov_floor(cover, K, couplings):
    """
    Smallest, over a grid of ``K`` and the couplings, of the largest member Lyapunov exponent.
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    floor = math.inf
    for lam in couplings:
        for energy in _window_grid(K):
            floor = min(floor, max(lyapunov(word, energy, lam) for word in cover.words))
    return floor


def _measure_task(args):
    word, lam, K = args
    return measure_in_window(band_edges(word, lam), K)


def _fit_decay(Ns, measures):
    """Slope of ``log(measure)`` against ``N``; None with a FitWarning when fewer than two measures are positive."""
    points = [(N, math.log(m)) for N, m in zip(Ns, measures) if m > 0]
    if len(points) < 2:
        warnings.warn(f"Only {len(points)} positive measures; decay rate not fitted", FitWarning, stacklevel=3)
        return None
    x, y = np.array(points).T
    line = fitting.LinearLSQFitter()(models.Linear1D(), x, y)
    return float(line.slope.value)


def decay_experiment(cover, a, K, N_list, couplings, workers=None):
    """
    Spectral measure inside ``K`` of the assembled words for each ``N`` and coupling.

    The decay rate ``c0`` is minus the least-squares slope of ``log(max measure)``
    against ``N``. Every returned trace carries the same ``c0`` and the reference
    rate ``k p t L_min / 2`` built from the Lyapunov floor.

    Returns
    -------
    list of ThinTrace
    """
    if not isinstance(K, EnergyWindow):
        K = EnergyWindow(K)
    N_list = [int(N) for N in N_list]
    if any(b <= a_ for a_, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    words = {N: assemble_thin_word(cover, a, N) for N in N_list}
    tasks = [(words[N], lam, K) for N in N_list for lam in couplings]
    results = iter(parallel_map(_measure_task, tasks, workers))
    measures = {N: {float(lam): next(results) for lam in couplings} for N in N_list}

    floor = lyapunov_floor(cover, K, couplings)
    slope = _fit_decay(N_list, [max(measures[N].values()) for N in N_list])
    c0 = None if slope is None else -slope
    reference = 0.5 * a.block_size * len(a) * cover.common_period * floor
    mt = cover.m * cover.common_period

    traces = []
    for N in N_list:
        traces.append(ThinTrace(N, N // mt, N * len(a) * a.block_size, measures[N], floor, c0, reference))
        log.debug(f"N={N}: measures {measures[N]}")
    return traces


def _stage_measures(word, window, couplings):
    return {float(lam): measure_in_window(band_edges(word, lam), window) for lam in couplings}


def run_stages(
    x0,
    epsilon0,
    stages,
    family,
    couplings,
    eta0,
    *,
    grid_step=0.05,
    depth_cap=20,
    eta_decay=0.5,
    safety=0.9,
    word_length_cap=None,
    workers=None,
):
    """
    Iterate the thin-spectrum construction for ``stages`` stages.

    Stage ``l`` uses the window ``F_l = [-1/eta_l, 1/eta_l]`` minus the
    ``eta_l``-balls around the exceptional set, the budget

        ``epsilon_l = safety * min(epsilon_(l-1), min_lambda M_(l-1) / 4) / 2``

    where ``M_(l-1)`` is the previous stage's spectral measure in ``F_(l-1)``, and
    the smallest doubling ``N`` from ``m t`` for which every coupling's measure is
    below both ``exp(-sqrt(p_l))`` and the previous stage's measure. Stage
    ``l`` covers ``F_l`` on a grid of step ``min(grid_step, eta_l / 2)``.

    Raises
    ------
    ValueError
        Unless ``0 < epsilon0 < 1``.
    WindowEmpty
        If a window misses the spectrum.
    StageBudgetExceeded
        If a stage word would exceed ``word_length_cap`` letters.
    """
    if not 0 < epsilon0 < 1:
        raise ValueError(f"epsilon0 must lie in (0, 1), got {epsilon0}")
    if stages < 0:
        raise ValueError("stages must be nonnegative")
    if word_length_cap is None:
        word_length_cap = max_word_length()
    roots = exceptional_set(family).roots

    window = EnergyWindow.excluding(eta0, roots)
    measures = _stage_measures(x0, window, couplings)
    if window.is_empty or min(measures.values()) <= 0:
        raise WindowEmpty(f"F_0 for eta={eta0} does not meet the spectrum of x0")
    states = [StageState(0, x0, float(epsilon0), float(eta0), len(x0), window, measures)]

    for stage in range(1, stages + 1):
        previous = states[-1]
        epsilon = safety * 0.5 * min(previous.epsilon, 0.25 * min(previous.measures.values()))
        eta = previous.eta * eta_decay
        window = EnergyWindow.excluding(eta, roots)
        if window.is_empty:
            raise WindowEmpty(f"F_{stage} is empty for eta={eta}")

        # the grid must stay strictly inside the eta-balls around the exceptional set
        step = min(grid_step, 0.5 * eta)
        cover = build_gap_cover(previous.word, window, epsilon, couplings, family, step, depth_cap, workers=workers)
        N = cover.m * cover.common_period
        while True:
            length = N * previous.period
            if length > word_length_cap:
                raise StageBudgetExceeded(f"stage {stage} needs more than {word_length_cap} letters (tried {length})")
            word = assemble_thin_word(cover, previous.word, N)
            measures = _stage_measures(word, window, couplings)
            target = math.exp(-math.sqrt(length))
            log.debug(f"stage {stage}, N={N}: measures {measures}, target {target:.3g}")
            if all(measures[lam] < min(target, previous.measures[lam]) for lam in measures):
                break
            N *= 2

        if min(measures.values()) <= 0:
            raise WindowEmpty(f"spectrum of stage {stage} misses F_{stage}")
        distance = word_distance(previous.word, word)
        states.append(StageState(stage, word, epsilon, eta, length, window, measures, N, distance))
        log.info(f"Stage {stage}: period {length}, epsilon {epsilon:.3g}, measures {measures}")
    return states


def verify_stages(states, couplings=None):
    """
    Independently check the stage inequalities.

    Measures and distances are recomputed from the stored words and windows.

    Returns
    -------
    list of str
        Descriptions of violated inequalities; empty when every stage is valid.
    """
    violations = []
    if not states:
        return violations
    if couplings is None:
        couplings = sorted(states[0].measures)
    measures = [_stage_measures(state.word, state.window, couplings) for state in states]

    for index in range(1, len(states)):
        state, previous = states[index], states[index - 1]
        label = f"stage {state.stage}"
        bound = 0.5 * min(previous.epsilon, 0.25 * min(measures[index - 1].values()))
        if not state.epsilon < bound:
            violations.append(f"{label}: epsilon {state.epsilon} is not below {bound}")
        if not state.epsilon < previous.epsilon / 2:
            violations.append(f"{label}: epsilon {state.epsilon} is not below half the previous budget")
        if state.period != len(state.word):
            violations.append(f"{label}: period {state.period} differs from the word length {len(state.word)}")
        if state.period % previous.period:
            violations.append(f"{label}: period {state.period} is not a multiple of {previous.period}")
        distance = word_distance(previous.word, state.word)
        if not distance < state.epsilon:
            violations.append(f"{label}: distance {distance} is not below epsilon {state.epsilon}")
        target = math.exp(-math.sqrt(state.period))
        for lam in couplings:
            if not measures[index][lam] < target:
                violations.append(f"{label}, coupling {lam}: measure {measures[index][lam]} is not below {target}")
            if not measures[index][lam] < measures[index - 1][lam]:
                violations.append(f"{label}, coupling {lam}: measure did not decrease")
    return violations


def _cover_count(intervals, epsilon):
    """Exact minimal number of length-``epsilon`` intervals covering a union of closed intervals."""
    count = 0
    covered_to = -math.inf
    for lo, hi in intervals:
        if hi <= covered_to + 1e-9 * epsilon:
            continue
        start = max(lo, covered_to)
        n = max(1, math.ceil((hi - start) / epsilon - 1e-9))
        count += n
        covered_to = start + n * epsilon
    return count


def box_dimension_estimate(bands, window, eps_list):
    """
    Box-counting slope of the bands inside ``window``.

    Counts are exact for a finite union of intervals (greedy left-to-right
    cover). The slope is the least-squares fit of ``log N(eps)`` against
    ``log(1/eps)``; with a single scale it is their ratio.

    Examples
    --------
    >>> from thin_spectra.spectral import BandSet
    >>> box_dimension_estimate(BandSet([[0, 1]]), EnergyWindow([[0, 1]]), [0.1, 0.01])[1]
    [10, 100]
    """
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps):
        raise ValueError("eps_list must contain positive scales")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if not isinstance(window, EnergyWindow):
        window = EnergyWindow(window)
    covered = window.intersect(bands.bands)
    counts = [_cover_count(covered, e) for e in eps]

    if min(counts) == 0:
        return 0.0, counts
    x = np.log(1.0 / np.array(eps))
    y = np.log(np.array(counts, dtype=float))
    if len(eps) == 1:
        slope = float(y[0] / x[0]) if x[0] != 0 else 0.0
    else:
        slope = float(fitting.LinearLSQFitter()(models.Linear1D(), x, y).slope.value)
    return slope, counts
