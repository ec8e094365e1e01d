"""Exception and warning types shared across the toolkit.

Every error carries enough context in its message to reproduce the
offending call; numeric thresholds are reported alongside the observed
value so that logs stay useful without a debugger.
"""

from __future__ import annotations


class FracKitError(Exception):
    """Base class for all toolkit errors."""


class AliasWarning(UserWarning):
    """Spectral content at the Nyquist frequency is not negligible.

    Raised as a warning, not an error: the requested operation is still
    performed, but high-frequency content will wrap around and pollute
    the result.
    """


class SingularityError(FracKitError):
    """Principal-value evaluation requested at a point where the input
    is detected to be non-smooth (second differences do not stabilize)."""


class TailError(FracKitError):
    """Input does not decay at the box edge, so treating it as compactly
    supported inside the box is unjustified."""


class CalibrationError(FracKitError):
    """Closed-form kernel constant and quadrature cross-check disagree."""


class FactorizationError(FracKitError):
    """Composite of order-reducing factors fails to match the target
    multiplier beyond the allowed residual."""


class ResidualError(FracKitError):
    """Solver residual stayed above tolerance after the refinement retry."""


class OrderError(FracKitError):
    """Operation requested outside its valid range of fractional orders."""


class FitError(FracKitError):
    """Boundary-window least-squares fit does not explain the data well
    enough for the fitted quantity to be trusted."""


class TraceFitError(FitError):
    """Weighted boundary trace could not be fitted to tolerance."""


class SingularMatrixError(FracKitError):
    """Dense interval operator (or a shifted copy) is numerically singular."""


class SpectrumIntersectionError(FracKitError):
    """A resolvent scan point lies on (or too close to) the spectrum."""


class EigenvalueCollisionError(FracKitError):
    """Requested eigenvalue is too close to its neighbour for the
    eigenvector to be well defined."""


class IntegrabilityError(FracKitError):
    """Requested grid norm diverges for the given boundary class."""


class AmbiguousClassError(FracKitError):
    """Boundary-class fit cannot decide between two candidate exponents."""
