"""
Opening spectral gaps inside one-parameter families.

Given a word ``x`` and an energy ``E`` away from the family's exceptional set,
`open_gap` finds a nearby word in the family semigroup whose transfer matrix is
hyperbolic at ``E``; ``E`` then lies in a gap of the corresponding periodic operator.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .exceptions import BlockMismatch, DepthExhausted, ExceptionalEnergy, NotFound, UnsupportedFamily
from .sl2 import TOL_HYP, Mat2, TraceClass, classify, commutator_norm, mul
from .transfer import discriminant, transfer_word
from .words import FullLine, Letter, PolymerFamily, SieveFamily, Word, concat, word_distance

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "ExceptionalSet",
    "GapCertificate",
    "exceptional_set",
    "letter_trace",
    "letter_hyperbolic_search",
    "affine_trace_solve",
    "open_gap",
]

EXCEPTIONAL_MARGIN = 1e-6
_ROOT_TOL = 1e-12
_DEDUPE_TOL = 1e-8
_COMMUTATOR_MIN = 1e-8
_MAX_PERTURBED_LETTERS = 16
_MAX_PAIRS = 4


class ExceptionalSet(NamedTuple):
    """Sorted roots of the exceptional polynomial with their residuals ``|f(root)|``."""

    roots: tuple
    source: str
    residuals: tuple = ()

    def distance(self, energy):
        if not self.roots:
            return math.inf
        return min(abs(energy - root) for root in self.roots)

    def to_tree(self):
        return {"roots": list(self.roots), "source": self.source, "residuals": list(self.residuals)}


class GapCertificate(NamedTuple):
    """A word hyperbolic at ``energy``, and how far it is from the input word."""

    word: Word
    energy: float
    trace: float
    distance_to_input: float
    coupling: float = 1.0

    def verify(self, epsilon=None, original=None):
        """
        Recompute the trace (and, given ``original``, the distance) independently.
        """
        trace = discriminant(self.word, self.energy, self.coupling)
        if not abs(trace) > 2.0 + TOL_HYP:
            return False
        if epsilon is not None:
            distance = self.distance_to_input if original is None else word_distance(original, self.word)
            if not distance < epsilon:
                return False
        return True

    def to_tree(self):
        return {
            "word": self.word.to_tree(),
            "energy": self.energy,
            "trace": self.trace,
            "distance": self.distance_to_input,
            "coupling": self.coupling,
        }

    @classmethod
    def from_tree(cls, tree):
        return cls(Word.from_tree(tree["word"]), float(tree["energy"]), float(tree["trace"]), float(tree["distance"]), float(tree.get("coupling", 1.0)))


def _entry11(values, energy):
    return transfer_word(values, energy).a11


def _polish_root(values, seed):
    """Bisection on a sign change bracketing ``seed``; returns the seed when none is found."""
    for half_width in (1e-9, 1e-7, 1e-5):
        lo, hi = seed - half_width * max(1.0, abs(seed)), seed + half_width * max(1.0, abs(seed))
        f_lo = _entry11(values, lo)
        f_hi = _entry11(values, hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if (f_lo < 0.0) != (f_hi < 0.0):
            break
    else:
        return seed
    while hi - lo > _ROOT_TOL * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        f_mid = _entry11(values, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exceptional_set(family):
    """
    Energies where gap opening degenerates for ``family``.

    For ``SieveFamily(n, b)`` these are the real zeros of
    ``E -> T(0^(n-1) b, E)_11``. That entry is the characteristic polynomial of the
    Jacobi matrix with diagonal ``0^(n-1) b``, so its roots are real and simple; the
    eigenvalues seed a bisection polish and each root carries its residual.

    Polymer and full-line families have an empty exceptional set.

    Raises
    ------
    UnsupportedFamily
    """
    if isinstance(family, (FullLine, PolymerFamily)):
        return ExceptionalSet((), f"{type(family).__name__}: empty")
    if not isinstance(family, SieveFamily):
        raise UnsupportedFamily(f"No exceptional set available for {family!r}")
    if not family.b:
        return ExceptionalSet((), "SieveFamily with empty tail: empty")

    values = family.coupling * family.exceptional_word()
    source = f"T(0^{family.n - 1} b, E)_11 with b={list(family.b)}, coupling={family.coupling}"
    if values.size == 1:
        seeds = values.copy()
    else:
        seeds = linalg.eigvalsh_tridiagonal(values, np.ones(values.size - 1))
    bound = 2.0 + 2.0 * float(np.max(np.abs(values))) + 2.0
    roots = sorted(_polish_root(values, float(seed)) for seed in seeds if abs(seed) <= bound)
    deduped = []
    for root in roots:
        if not deduped or root - deduped[-1] > _DEDUPE_TOL:
            deduped.append(root)
    residuals = tuple(abs(_entry11(values, root)) for root in deduped)
    log.debug(f"Exceptional set of {source}: {deduped}")
    return ExceptionalSet(tuple(deduped), source, residuals)


def letter_trace(family, letter, energy):
    return discriminant(np.asarray(letter, dtype=float), energy, family.coupling)


def affine_trace_solve(M, E, bound=math.inf):
    """
    Solve for ``v`` with ``|tr(M T(v, E))| = 3``.

    The trace ``M11 (E - v) + M12 - M21`` is affine in ``v``; of the two solutions
    the one of smaller magnitude is returned.

    Returns
    -------
    float or None
        None when the slope ``-M11`` vanishes or the solution exceeds ``bound``.

    Examples
    --------
    >>> affine_trace_solve(Mat2(1.0, -1.0, 1.0, 0.0), 1.0)
    2.0
    """
    if abs(M.a11) <= 1e-10:
        return None
    offset = M.a11 * E + M.a12 - M.a21
    best = None
    for target in (3.0, -3.0):
        v = (offset - target) / M.a11
        if best is None or abs(v) < abs(best):
            best = v
    if abs(best) > bound:
        return None
    return best


def letter_hyperbolic_search(family, E):
    """
    A single letter of ``family`` whose transfer matrix is hyperbolic at ``E``.

    Raises
    ------
    NotFound
        If ``E`` lies on the exceptional set.
    """
    lam = family.coupling
    if isinstance(family, (FullLine, PolymerFamily)) or (isinstance(family, SieveFamily) and not family.b):
        v = (E - 3.0) / lam
        letter = np.full(family.block_size, v)
    elif isinstance(family, SieveFamily):
        if exceptional_set(family).distance(E) <= 1e-8:
            raise NotFound(f"E={E} lies on the exceptional set")
        M = transfer_word(lam * family.exceptional_word(), E)
        w = affine_trace_solve(M, E)
        if w is None:
            raise NotFound(f"trace is constant in the free letter at E={E}")
        letter = family.make_letter([w / lam])
    else:
        raise UnsupportedFamily(f"No letter search available for {family!r}")

    if not abs(letter_trace(family, letter, E)) > 2.0 + TOL_HYP:
        raise NotFound(f"no hyperbolic letter at E={E}")
    return Letter(tuple(float(v) for v in letter))


def _perturbations(x, family, epsilon):
    """Family words within ``0.75 epsilon`` of ``x``: uniform shifts first, then single-parameter moves."""
    delta = epsilon / 4.0
    amplitudes = [3.0 * delta, 2.0 * delta, delta]
    candidates = []
    for amplitude in amplitudes:
        for sign in (1.0, -1.0):
            candidates.append((family.shift_all(x, sign * amplitude), amplitude))

    n_letters = len(x)
    if n_letters <= _MAX_PERTURBED_LETTERS:
        indices = range(n_letters)
    else:
        indices = np.unique(np.linspace(0, n_letters - 1, _MAX_PERTURBED_LETTERS).astype(int)).tolist()
    n_parameters = len(family.free_masks())
    for amplitude in amplitudes:
        for index in indices:
            for parameter in range(n_parameters):
                for sign in (1.0, -1.0):
                    candidates.append((family.perturb(x, index, parameter, sign * amplitude), amplitude))

    seen = set()
    unique = []
    for word, amplitude in candidates:
        if word not in seen:
            seen.add(word)
            unique.append((word, amplitude))
    return unique


def _is_hyperbolic(M):
    return classify(M) is TraceClass.HYPERBOLIC


def _semigroup_search(first, second, depth_cap, dyadic, node_budget):
    """
    Find a product of ``first`` and ``second`` that is hyperbolic.

    Each length m is searched twice: the structured words ``first^i second^(m-i)``,
    then (while the layer fits in ``node_budget``) every word of length m in
    breadth-first order, skipping matrices already seen. Returns the letter
    choices (0 for ``first``, 1 for ``second``) or None.
    """
    powers = [[Mat2.identity()], [Mat2.identity()]]
    layer = [((), Mat2.identity())]
    seen = set()
    for length in range(1, depth_cap + 1):
        powers[0].append(mul(first, powers[0][-1]))
        powers[1].append(mul(second, powers[1][-1]))
        accept = not dyadic or length & (length - 1) == 0

        if accept:
            for count in range(length, -1, -1):
                # word first^count second^(length - count): the second block acts last
                product = mul(powers[1][length - count], powers[0][count])
                if _is_hyperbolic(product):
                    return (0,) * count + (1,) * (length - count)

        if layer is None or 2 * len(layer) > node_budget:
            layer = None
            continue
        next_layer = []
        for choices, product in layer:
            for choice, factor in ((0, first), (1, second)):
                candidate = mul(factor, product)
                key = tuple(round(v, 9) for v in candidate)
                if dyadic:
                    key = (length,) + key
                if key in seen:
                    continue
                seen.add(key)
                if accept and _is_hyperbolic(candidate):
                    return choices + (choice,)
                next_layer.append((choices + (choice,), candidate))
        layer = next_layer
        log.debug(f"Semigroup search layer {length}: {len(layer)} nodes")
    return None


def open_gap(x, E, epsilon, family, depth_cap=20, *, allow_input=True, dyadic=False, node_budget=2**16):
    """
    Find a word near ``x`` in the family semigroup that is hyperbolic at ``E``.

    The three situations are handled in turn: ``x`` already hyperbolic (returned
    as is); ``x`` elliptic, where nearby elliptic words that do not commute
    generate a semigroup searched for a hyperbolic product; and ``|tr| = 2``,
    where ``x`` is first wiggled off the parabolic locus. Perturbations move the
    family's free parameters by multiples of ``epsilon / 4`` and every candidate
    stays within ``0.75 epsilon`` of ``x``.

    Parameters
    ----------
    x : Word
    E : float
    epsilon : float
        Distance budget.
    family : Family
        Supplies the free coordinates and the coupling.
    depth_cap : int
        Longest semigroup word tried, in units of perturbed copies of ``x``.
    allow_input : bool
        When False, ``x`` itself is never returned.
    dyadic : bool
        Only accept semigroup words whose length is a power of two.
    node_budget : int
        Largest breadth-first layer enumerated exhaustively.

    Returns
    -------
    GapCertificate

    Raises
    ------
    ExceptionalEnergy
        If ``E`` is within 1e-6 of the exceptional set.
    DepthExhausted
        If no hyperbolic word is found up to ``depth_cap``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if x.block_size != family.block_size:
        raise BlockMismatch(f"word block size {x.block_size} does not match family block size {family.block_size}")
    lam = family.coupling
    if exceptional_set(family).distance(E) <= EXCEPTIONAL_MARGIN:
        raise ExceptionalEnergy(f"E={E} is within {EXCEPTIONAL_MARGIN} of the exceptional set")

    def certificate(word):
        trace = discriminant(word, E, lam)
        return GapCertificate(word, float(E), float(trace), word_distance(x, word), float(lam))

    base = transfer_word(x, E, lam)
    base_class = classify(base)
    if base_class is TraceClass.HYPERBOLIC and allow_input:
        return certificate(x)

    pool = [(x, base)] if base_class is TraceClass.ELLIPTIC else []
    for word, _ in _perturbations(x, family, epsilon):
        matrix = transfer_word(word, E, lam)
        word_class = classify(matrix)
        if word_class is TraceClass.HYPERBOLIC:
            log.debug(f"Perturbation opens a gap at E={E:.6g} directly")
            return certificate(word)
        if word_class is TraceClass.ELLIPTIC:
            pool.append((word, matrix))

    pairs = []
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            norm = commutator_norm(pool[i][1], pool[j][1])
            if norm > _COMMUTATOR_MIN:
                pairs.append((norm, i, j))
    pairs.sort(key=lambda item: -item[0])

    for norm, i, j in pairs[:_MAX_PAIRS]:
        choices = _semigroup_search(pool[i][1], pool[j][1], depth_cap, dyadic, node_budget)
        if choices is not None:
            word = concat(*(pool[j][0] if choice else pool[i][0] for choice in choices))
            log.debug(f"Semigroup word of {len(choices)} blocks opens a gap at E={E:.6g} (commutator {norm:.3g})")
            return certificate(word)

    log.debug(f"No hyperbolic word near x at E={E:.6g} with {len(pairs)} noncommuting pairs")
    raise DepthExhausted(depth_cap)
