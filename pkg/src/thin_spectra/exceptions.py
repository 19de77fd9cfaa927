"""
Typed errors and warnings raised by the spectral algorithms
"""

__all__ = [
    "ThinSpectraError",
    "NotElliptic",
    "BlockMismatch",
    "LcmOverflow",
    "DegenerateInput",
    "NotInteriorOfBand",
    "UnsupportedFamily",
    "NotFound",
    "ExceptionalEnergy",
    "DepthExhausted",
    "CoverageFailure",
    "NTooSmall",
    "StageBudgetExceeded",
    "WindowEmpty",
    "NotFoundWithinBound",
    "BandPairingWarning",
    "FitWarning",
]


class ThinSpectraError(Exception):
    """Base class for every algorithmic failure the package reports."""


class NotElliptic(ThinSpectraError):
    pass


class BlockMismatch(ThinSpectraError):
    pass


class LcmOverflow(ThinSpectraError):
    pass


class DegenerateInput(ThinSpectraError):
    pass


class NotInteriorOfBand(ThinSpectraError):
    pass


class UnsupportedFamily(ThinSpectraError):
    pass


class NotFound(ThinSpectraError):
    pass


class ExceptionalEnergy(ThinSpectraError):
    pass


class DepthExhausted(ThinSpectraError):
    """
    The semigroup search hit its length cap without finding a hyperbolic word.

    This is a resource limit, not a proof that no such word exists.
    """

    def __init__(self, depth_cap, message=None):
        self.depth_cap = depth_cap
        super().__init__(message or f"no hyperbolic word found up to depth {depth_cap}")


class CoverageFailure(ThinSpectraError):
    pass


class NTooSmall(ThinSpectraError):
    pass


class StageBudgetExceeded(ThinSpectraError):
    pass


class WindowEmpty(ThinSpectraError):
    pass


class NotFoundWithinBound(ThinSpectraError):
    def __init__(self, lam_max, message=None):
        self.lam_max = lam_max
        super().__init__(message or f"no gap-opening coupling found in [0, {lam_max}]")


class BandPairingWarning(Warning):
    pass


class FitWarning(Warning):
    pass
