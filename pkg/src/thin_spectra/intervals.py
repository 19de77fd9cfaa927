"""
Finite unions of closed energy intervals
"""

import logging

import numpy as np

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = ["EnergyWindow", "merge_intervals", "overlap_length"]


def merge_intervals(intervals):
    """
    Sort closed intervals and merge the ones that overlap or touch.

    Examples
    --------
    >>> merge_intervals([(3, 4), (0, 1), (1, 2)]).tolist()
    [[0.0, 2.0], [3.0, 4.0]]
    """
    array = np.asarray(intervals, dtype=float).reshape(-1, 2)
    if array.size == 0:
        return np.empty((0, 2))
    if np.any(array[:, 1] < array[:, 0]):
        raise ValueError("Interval with upper end below its lower end")
    array = array[np.argsort(array[:, 0], kind="stable")]
    merged = [list(array[0])]
    for lo, hi in array[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return np.array(merged)


def overlap_length(intervals, window):
    """
    Total length of the intersection of two interval arrays.

    ``intervals`` may overlap each other (bands touching at closed gaps); ``window``
    must be disjoint. Cost is ``O(len(intervals) * len(window))`` with numpy.
    """
    a = np.asarray(intervals, dtype=float).reshape(-1, 2)
    b = np.asarray(window, dtype=float).reshape(-1, 2)
    if a.size == 0 or b.size == 0:
        return 0.0
    lo = np.maximum(a[:, None, 0], b[None, :, 0])
    hi = np.minimum(a[:, None, 1], b[None, :, 1])
    return float(np.sum(np.clip(hi - lo, 0.0, None)))


class EnergyWindow:
    """
    Sorted, disjoint closed intervals ``[lo, hi]``.

    An empty window is allowed; operations on it return zero measure.
    """

    __slots__ = ("_intervals",)

    def __init__(self, intervals=()):
        merged = merge_intervals(intervals)
        merged.flags.writeable = False
        self._intervals = merged

    @classmethod
    def from_bounds(cls, lo, hi):
        return cls([(lo, hi)])

    @classmethod
    def excluding(cls, eta, roots):
        """
        ``[-1/eta, 1/eta]`` minus the open ``eta``-balls around ``roots``.
        """
        if eta <= 0:
            raise ValueError("eta must be positive")
        pieces = [[-1.0 / eta, 1.0 / eta]]
        for root in sorted(float(r) for r in roots):
            next_pieces = []
            for lo, hi in pieces:
                if root + eta <= lo or root - eta >= hi:
                    next_pieces.append([lo, hi])
                    continue
                if root - eta > lo:
                    next_pieces.append([lo, root - eta])
                if root + eta < hi:
                    next_pieces.append([root + eta, hi])
            pieces = next_pieces
        return cls(pieces)

    @property
    def intervals(self):
        return self._intervals

    def __len__(self):
        return self._intervals.shape[0]

    def __iter__(self):
        return iter((float(lo), float(hi)) for lo, hi in self._intervals)

    def __eq__(self, other):
        if not isinstance(other, EnergyWindow):
            return NotImplemented
        return bool(np.array_equal(self._intervals, other._intervals))

    def __repr__(self):
        return f"EnergyWindow({self._intervals.tolist()})"

    @property
    def is_empty(self):
        return len(self) == 0

    @property
    def measure(self):
        return float(np.sum(self._intervals[:, 1] - self._intervals[:, 0]))

    def hull(self):
        if self.is_empty:
            raise ValueError("Empty window has no hull")
        return float(self._intervals[0, 0]), float(self._intervals[-1, 1])

    def contains(self, energy):
        lo = self._intervals[:, 0]
        hi = self._intervals[:, 1]
        return bool(np.any((lo <= energy) & (energy <= hi)))

    def intersect(self, other):
        if isinstance(other, EnergyWindow):
            other = other.intervals
        other = np.asarray(other, dtype=float).reshape(-1, 2)
        pieces = []
        for lo, hi in self._intervals:
            for olo, ohi in other:
                a, b = max(lo, olo), min(hi, ohi)
                if a <= b:
                    pieces.append((a, b))
        return EnergyWindow(pieces)

    def measure_of(self, intervals):
        """Lebesgue measure of ``intervals`` inside the window."""
        return overlap_length(intervals, self._intervals)

    def min_distance_to(self, points):
        """Smallest distance between the window and any of ``points`` (inf if none)."""
        points = np.asarray(points, dtype=float).ravel()
        if points.size == 0 or self.is_empty:
            return np.inf
        lo = self._intervals[:, 0][None, :]
        hi = self._intervals[:, 1][None, :]
        p = points[:, None]
        gap = np.maximum(np.maximum(lo - p, p - hi), 0.0)
        return float(gap.min())

    def to_tree(self):
        return {"intervals": self._intervals.tolist()}

    @classmethod
    def from_tree(cls, tree):
        return cls(tree["intervals"])
