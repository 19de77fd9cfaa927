"""
Real 2x2 unimodular matrices: products, traces, classification and conjugation to rotations.
"""

import enum
import logging
import math
from typing import NamedTuple

import numpy as np

from .exceptions import NotElliptic

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


__all__ = [
    "TOL_HYP",
    "TOL_DET",
    "RENORM_EVERY",
    "Mat2",
    "TraceClass",
    "FixedPoint",
    "mul",
    "classify",
    "spectral_radius",
    "log_spectral_radius",
    "mobius_action",
    "mobius_fixed_point",
    "conjugator",
    "hs_norm_sq",
    "commutator_norm",
    "chain_product",
]

TOL_HYP = 1e-9
TOL_DET = 1e-9
RENORM_EVERY = 64


class Mat2(NamedTuple):
    """
    A real 2x2 matrix ``[[a11, a12], [a21, a22]]``.

    Values built from transfer matrices are unimodular; the type itself does not
    enforce it so that scaled products can be represented too.
    """

    a11: float
    a12: float
    a21: float
    a22: float

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array, dtype=float)
        if array.shape != (2, 2):
            raise ValueError(f"Expected a 2x2 array, got shape {array.shape}")
        return cls(*(float(v) for v in array.ravel()))

    def to_array(self):
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def trace(self):
        return self.a11 + self.a22

    @property
    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def inverse(self):
        d = self.det
        return Mat2(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def scale(self, factor):
        return Mat2(self.a11 * factor, self.a12 * factor, self.a21 * factor, self.a22 * factor)

    def power(self, n):
        if n < 0:
            raise ValueError("power requires n >= 0")
        return chain_product([self] * n)

    def __matmul__(self, other):
        return mul(self, other)


class TraceClass(enum.Enum):
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"
    PLUS_MINUS_IDENTITY = "PlusMinusIdentity"


class FixedPoint(NamedTuple):
    """Upper half-plane point ``re + i im`` with ``im > 0``."""

    re: float
    im: float

    @property
    def z(self):
        return complex(self.re, self.im)


def mul(A, B):
    """
    Matrix product ``A B``.

    Examples
    --------
    >>> mul(Mat2(0, -1, 1, 0), Mat2(0, -1, 1, 0))
    Mat2(a11=-1, a12=0, a21=0, a22=-1)
    """
    return Mat2(
        A.a11 * B.a11 + A.a12 * B.a21,
        A.a11 * B.a12 + A.a12 * B.a22,
        A.a21 * B.a11 + A.a22 * B.a21,
        A.a21 * B.a12 + A.a22 * B.a22,
    )


def _is_plus_minus_identity(A, tol):
    for sign in (1.0, -1.0):
        if (
            abs(A.a11 - sign) <= tol
            and abs(A.a22 - sign) <= tol
            and abs(A.a12) <= tol
            and abs(A.a21) <= tol
        ):
            return True
    return False


def classify(A, tol_hyp=TOL_HYP):
    """
    Classify a unimodular matrix by its trace.

    Parameters
    ----------
    A : Mat2
    tol_hyp : float
        Absolute tolerance on ``|trace| - 2``.

    Returns
    -------
    TraceClass
    """
    t = abs(A.trace)
    if t > 2.0 + tol_hyp:
        return TraceClass.HYPERBOLIC
    if t < 2.0 - tol_hyp:
        return TraceClass.ELLIPTIC
    if _is_plus_minus_identity(A, tol_hyp):
        return TraceClass.PLUS_MINUS_IDENTITY
    return TraceClass.PARABOLIC


def _radius_from_trace(t):
    t = abs(t)
    if t <= 2.0:
        return 1.0
    return 0.5 * t * (1.0 + math.sqrt(1.0 - 4.0 / (t * t)))


def spectral_radius(A):
    """
    Spectral radius of a unimodular matrix.

    Examples
    --------
    >>> round(spectral_radius(Mat2(3, -1, 1, 0)), 5)
    2.61803
    >>> spectral_radius(Mat2.identity())
    1.0
    """
    return _radius_from_trace(A.trace)


def log_spectral_radius(A, log_scale=0.0):
    """
    ``log spr(exp(log_scale) * A)`` for a matrix that need not be unimodular.

    ``A`` is the normalized part of a rescaled product; its eigenvalues solve
    ``x**2 - tr x + det = 0``.
    """
    t = A.trace
    d = A.det
    disc = t * t - 4.0 * d
    if disc < 0.0:
        radius = math.sqrt(max(d, 0.0))
    else:
        radius = 0.5 * (abs(t) + math.sqrt(disc))
    if radius <= 0.0:
        return -math.inf
    return log_scale + math.log(radius)


def mobius_action(A, z):
    """``(a z + b) / (c z + d)`` for complex ``z``."""
    return (A.a11 * z + A.a12) / (A.a21 * z + A.a22)


def mobius_fixed_point(A):
    """
    The fixed point of an elliptic matrix in the upper half-plane.

    Solves ``c z**2 + (d - a) z - b = 0`` and returns the root with positive
    imaginary part.

    Raises
    ------
    NotElliptic
    """
    if classify(A) is not TraceClass.ELLIPTIC:
        raise NotElliptic(f"matrix with trace {A.trace} has no fixed point in the upper half-plane")
    a, b, c, d = A
    re = (a - d) / (2.0 * c)
    im = math.sqrt(4.0 * A.det - A.trace**2) / (2.0 * abs(c))
    return FixedPoint(re, im)


def conjugator(A):
    """
    The unimodular matrix ``M`` with ``M A M^-1`` in SO(2).

    ``M = Im(z)^(-1/2) [[1, -Re(z)], [0, Im(z)]]`` with ``z`` the upper fixed point.
    """
    z = mobius_fixed_point(A)
    scale = 1.0 / math.sqrt(z.im)
    return Mat2(scale, -z.re * scale, 0.0, z.im * scale)


def hs_norm_sq(A):
    return A.a11**2 + A.a12**2 + A.a21**2 + A.a22**2


def commutator_norm(A, B):
    """Frobenius norm of ``AB - BA``."""
    ab = mul(A, B)
    ba = mul(B, A)
    return math.sqrt(hs_norm_sq(Mat2(ab.a11 - ba.a11, ab.a12 - ba.a12, ab.a21 - ba.a21, ab.a22 - ba.a22)))


def chain_product(factors):
    """
    Ordered product ``factors[-1] ... factors[0]`` (the first factor acts first).

    Every ``RENORM_EVERY`` factors the running product is divided by the square
    root of its determinant, which keeps unimodular chains unimodular.
    """
    result = Mat2.identity()
    for count, factor in enumerate(factors, start=1):
        result = mul(factor, result)
        if count % RENORM_EVERY == 0:
            d = result.det
            if d > 0.0 and math.isfinite(d):
                result = result.scale(1.0 / math.sqrt(d))
    return result
