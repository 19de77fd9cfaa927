"""
The word semigroup over block alphabets and the one-parameter families of letters.

A `Word` is a finite sequence of letters, each letter a block of ``k`` reals.
Concatenation is written ``concat(x, y)`` and the m-fold repeat ``sharp_power(x, m)``;
aggregation flattens the blocks into one potential on ``len(x) * k`` sites.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .exceptions import BlockMismatch, UnsupportedFamily
from .util import lcm_capped

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "Letter",
    "Word",
    "Family",
    "SieveFamily",
    "PolymerFamily",
    "FullLine",
    "parse_family",
    "family_from_tree",
    "concat",
    "sharp_power",
    "aggregate",
    "sieve",
    "repeat_blocks",
    "insert_between",
    "cyclic_shift",
    "word_distance",
]


class Letter(NamedTuple):
    values: tuple

    @property
    def block_size(self):
        return len(self.values)


class Word:
    """
    Immutable word of letters sharing one block size.

    Parameters
    ----------
    letters : array-like, shape (n_letters, block_size)
        Rows are letters.
    """

    __slots__ = ("_values",)

    def __init__(self, letters):
        values = np.array(letters, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise ValueError("A word needs at least one letter of positive block size")
        if not np.all(np.isfinite(values)):
            raise ValueError("Word entries must be finite")
        values.flags.writeable = False
        self._values = values

    @classmethod
    def from_values(cls, values, block_size=1):
        """Build a word from its aggregated potential."""
        values = np.asarray(values, dtype=float).ravel()
        if block_size < 1 or values.size % block_size:
            raise BlockMismatch(f"{values.size} values cannot be split into blocks of {block_size}")
        return cls(values.reshape(-1, block_size))

    @property
    def values(self):
        """Read-only array of shape ``(len(self), block_size)``."""
        return self._values

    @property
    def block_size(self):
        return self._values.shape[1]

    @property
    def letters(self):
        return tuple(Letter(tuple(float(v) for v in row)) for row in self._values)

    def letter(self, index):
        return Letter(tuple(float(v) for v in self._values[index]))

    def __len__(self):
        return self._values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(np.array_equal(self._values, other._values))

    def __hash__(self):
        return hash((self._values.shape, self._values.tobytes()))

    def __repr__(self):
        if len(self) <= 6:
            body = ", ".join("(" + ",".join(f"{v:g}" for v in row) + ")" for row in self._values)
        else:
            body = f"{len(self)} letters"
        return f"Word[{body}; k={self.block_size}]"

    def to_tree(self):
        return {"block_size": int(self.block_size), "letters": self._values.tolist()}

    @classmethod
    def from_tree(cls, tree):
        letters = tree["letters"]
        block_size = int(tree["block_size"])
        if any(len(letter) != block_size for letter in letters):
            raise BlockMismatch(f"every letter must have {block_size} entries")
        return cls(np.asarray(letters, dtype=float).reshape(-1, block_size))


def _check_blocks(x, y):
    if x.block_size != y.block_size:
        raise BlockMismatch(f"block sizes differ: {x.block_size} != {y.block_size}")


def concat(*words):
    """
    Concatenate words left to right.

    Examples
    --------
    >>> concat(Word([1]), Word([2])) == Word([1, 2])
    True
    """
    if not words:
        raise ValueError("concat needs at least one word")
    for other in words[1:]:
        _check_blocks(words[0], other)
    return Word(np.concatenate([w.values for w in words], axis=0))


def sharp_power(x, m):
    if m < 1:
        raise ValueError(f"sharp_power requires m >= 1, got {m}")
    return Word(np.tile(x.values, (m, 1)))


def aggregate(x):
    """Flatten a word (or a plain sequence of reals) into its potential."""
    if isinstance(x, Word):
        return x.values.ravel()
    return np.asarray(x, dtype=float).ravel()


def insert_between(v, b):
    """Letters ``(v_j, b_1, ..., b_{k-1})`` with ``k = 1 + len(b)``."""
    v = np.asarray(v, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    letters = np.empty((v.size, 1 + b.size))
    letters[:, 0] = v
    letters[:, 1:] = b
    return Word(letters)


def sieve(v, k):
    """
    The potential with ``k - 1`` zeros inserted after every entry of ``v``.

    Examples
    --------
    >>> sieve([5], 2).to_tree()
    {'block_size': 2, 'letters': [[5.0, 0.0]]}
    """
    if k < 1:
        raise ValueError(f"sieve requires k >= 1, got {k}")
    return insert_between(v, np.zeros(k - 1))


def repeat_blocks(v, k):
    """Each entry of ``v`` repeated ``k`` times as one letter."""
    if k < 1:
        raise ValueError(f"repeat_blocks requires k >= 1, got {k}")
    v = np.asarray(v, dtype=float).ravel()
    return Word(np.repeat(v[:, None], k, axis=1))


def cyclic_shift(v, j):
    """
    Rotate ``x_1 ... x_q`` to ``x_{j+1} ... x_q x_1 ... x_j``.

    Examples
    --------
    >>> cyclic_shift([1, 2, 3], 1).tolist()
    [2.0, 3.0, 1.0]
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        return v
    return np.roll(v, -(j % v.size))


def word_distance(x, y, cap=None):
    """
    Uniform distance between the periodic extensions of two words.

    The letter metric is the max-norm over block coordinates; the supremum is
    taken over one common period of ``lcm(len(x), len(y))`` letters.

    Raises
    ------
    BlockMismatch
    LcmOverflow
        If the common period exceeds ``cap`` letters (default 10**6, see
        ``THIN_SPECTRA_LCM_CAP``).
    """
    _check_blocks(x, y)
    nx, ny = len(x), len(y)
    if nx == ny:
        return float(np.max(np.abs(x.values - y.values)))
    period = lcm_capped([nx, ny], cap)
    index = np.arange(period)
    return float(np.max(np.abs(x.values[index % nx] - y.values[index % ny])))


@dataclass(frozen=True)
class Family:
    """
    A one-parameter family of letters together with a coupling constant.

    Subclasses describe which block coordinates are free; the remaining
    coordinates are fixed by the family.
    """

    coupling: float = field(default=1.0, kw_only=True)

    def __post_init__(self):
        if self.coupling == 0 or not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite and nonzero")

    @property
    def block_size(self):
        raise NotImplementedError

    def free_masks(self):
        """One 0/1 mask per free parameter, each of length ``block_size``."""
        raise NotImplementedError

    def make_letter(self, free):
        """Letter values from the free parameters."""
        raise NotImplementedError

    def free_values(self, letter_values):
        masks = self.free_masks()
        values = np.asarray(letter_values, dtype=float)
        return np.array([values[np.argmax(mask)] for mask in masks])

    def with_coupling(self, coupling):
        return replace(self, coupling=float(coupling))

    def contains(self, word):
        if word.block_size != self.block_size:
            return False
        rebuilt = np.array([self.make_letter(self.free_values(row)) for row in word.values])
        return bool(np.array_equal(rebuilt, word.values))

    def word(self, free_rows):
        """Word whose j-th letter is built from ``free_rows[j]``."""
        return Word(np.array([self.make_letter(np.atleast_1d(row)) for row in free_rows]))

    def perturb(self, word, letter_index, parameter, delta):
        letters = np.array(word.values)
        letters[letter_index] += delta * self.free_masks()[parameter]
        return Word(letters)

    def shift_all(self, word, delta):
        total = np.sum(self.free_masks(), axis=0)
        return Word(word.values + delta * total)

    def to_tree(self):
        raise NotImplementedError


@dataclass(frozen=True)
class SieveFamily(Family):
    """Letters ``(x_1, ..., x_n, b_1, ..., b_m)`` with free ``x`` and fixed ``b``."""

    n: int = 1
    b: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        if self.n < 1:
            raise ValueError(f"SieveFamily requires n >= 1, got {self.n}")
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))

    @property
    def block_size(self):
        return self.n + len(self.b)

    def free_masks(self):
        return [np.eye(self.block_size)[i] for i in range(self.n)]

    def make_letter(self, free):
        free = np.asarray(free, dtype=float).ravel()
        if free.size == 1 and self.n > 1:
            free = np.concatenate([free, np.zeros(self.n - 1)])
        return np.concatenate([free, np.asarray(self.b, dtype=float)])

    def exceptional_word(self):
        """The fixed tail ``0^(n-1) b`` whose transfer matrix defines the exceptional set."""
        return np.concatenate([np.zeros(self.n - 1), np.asarray(self.b, dtype=float)])

    def to_tree(self):
        return {"kind": "sieve", "n": self.n, "b": list(self.b), "coupling": self.coupling}


@dataclass(frozen=True)
class PolymerFamily(Family):
    """Letters ``(x, x, ..., x)`` of length ``n``."""

    n: int = 1

    def __post_init__(self):
        super().__post_init__()
        if self.n < 1:
            raise ValueError(f"PolymerFamily requires n >= 1, got {self.n}")

    @property
    def block_size(self):
        return self.n

    def free_masks(self):
        return [np.ones(self.n)]

    def make_letter(self, free):
        return np.full(self.n, float(np.asarray(free, dtype=float).ravel()[0]))

    def to_tree(self):
        return {"kind": "polymer", "n": self.n, "coupling": self.coupling}


@dataclass(frozen=True)
class FullLine(Family):
    """Every real is a letter (block size 1)."""

    @property
    def block_size(self):
        return 1

    def free_masks(self):
        return [np.ones(1)]

    def make_letter(self, free):
        return np.asarray(free, dtype=float).ravel()[:1]

    def to_tree(self):
        return {"kind": "free", "coupling": self.coupling}


_FAMILY_PATTERN = re.compile(r"^(?P<kind>free|polymer|sieve)(?::(?P<args>.*))?$")


def parse_family(text, coupling=1.0):
    """
    Parse ``free``, ``polymer:n=2`` or ``sieve:n=1,b=0;0.5``.

    Sieve tails are separated by ``;`` so the argument list stays comma separated.

    Examples
    --------
    >>> parse_family("sieve:n=1,b=0")
    SieveFamily(coupling=1.0, n=1, b=(0.0,))
    """
    match = _FAMILY_PATTERN.match(text.strip())
    if match is None:
        raise UnsupportedFamily(f"Unrecognized family specification: {text!r}")
    kind = match["kind"]
    args = {}
    if match["args"]:
        for item in match["args"].split(","):
            key, _, value = item.partition("=")
            args[key.strip()] = value.strip()
    try:
        if kind == "free":
            return FullLine(coupling=coupling)
        if kind == "polymer":
            return PolymerFamily(n=int(args.get("n", 1)), coupling=coupling)
        tail = args.get("b", "")
        b = tuple(float(v) for v in tail.split(";") if v.strip())
        return SieveFamily(n=int(args.get("n", 1)), b=b, coupling=coupling)
    except ValueError as err:
        raise UnsupportedFamily(f"Invalid family specification {text!r}: {err}") from err


def family_from_tree(tree):
    kind = tree["kind"]
    coupling = float(tree.get("coupling", 1.0))
    if kind == "free":
        return FullLine(coupling=coupling)
    if kind == "polymer":
        return PolymerFamily(n=int(tree["n"]), coupling=coupling)
    if kind == "sieve":
        return SieveFamily(n=int(tree["n"]), b=tuple(tree.get("b", ())), coupling=coupling)
    raise UnsupportedFamily(f"Unrecognized family kind: {kind!r}")
