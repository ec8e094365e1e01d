"""Boundary-window least-squares fits.

Weighted traces and boundary exponents are continuum limits; on a grid
they are extrapolated from a window of near-boundary samples.  The
window starts at 2h (the first sample or two sit inside the scheme's
collar) and ends well before the far field, and the models are low
order on purpose: the quantities being fitted are limits, and higher
order models chase noise.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "FitWindow",
    "quotient_limit_fit",
    "exponent_fit",
    "power_model_fit",
    "richardson_limit",
]


class FitWindow:
    """Distances and samples of u along the inward direction from a boundary point.

    ``direction=+1`` walks toward increasing x (half-line boundary at 0,
    interval endpoint -1); ``direction=-1`` walks toward decreasing x
    (interval endpoint +1).
    """

    def __init__(self, x, values, boundary, direction, d_min, d_max):
        x = np.asarray(x, dtype=np.float64)
        d = direction * (x - boundary)
        keep = (d >= d_min) & (d <= d_max)
        if keep.sum() < 6:
            raise ValueError(
                f"fit window [{d_min:g}, {d_max:g}] from {boundary:g} holds "
                f"{int(keep.sum())} samples; need at least 6"
            )
        order = np.argsort(d[keep])
        self.d = d[keep][order]
        self.values = np.asarray(values)[keep][order]


def quotient_limit_fit(
    window: FitWindow, mu: float, extra_powers: tuple = ()
) -> tuple[complex, float, float]:
    """Limit of values/d^mu at d -> 0 from a quadratic model in d.

    Returns (limit, fit_residual, scale) where fit_residual is the rms
    misfit of the model and scale = max(|limit|, sup|quotient|) gives a
    denominator that stays usable when the limit itself vanishes.
    ``extra_powers`` appends fractional columns d^p for quotients known
    to carry non-polynomial corrections (powers already present in the
    polynomial basis are skipped).
    """
    q = window.values / window.d**mu
    columns = [np.ones_like(window.d), window.d, window.d**2]
    seen = [0.0, 1.0, 2.0]
    for p in extra_powers:
        if min(abs(p - k) for k in seen) > 1e-9:
            columns.append(window.d**p)
            seen.append(p)
    basis = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(basis, q, rcond=None)
    misfit = basis @ coef - q
    resid = float(np.sqrt(np.mean(np.abs(misfit) ** 2)))
    scale = max(abs(coef[0]), float(np.abs(q).max()))
    return complex(coef[0]), resid, scale


def quotient_model_fit(window: FitWindow, mu: float) -> np.ndarray:
    """Quadratic-in-d model coefficients (c0, c1, c2) of values/d^mu."""
    q = window.values / window.d**mu
    basis = np.column_stack([np.ones_like(window.d), window.d, window.d**2])
    coef, *_ = np.linalg.lstsq(basis, q, rcond=None)
    return coef


def exponent_fit(window: FitWindow, extra_powers: tuple = ()) -> float:
    """Leading power alpha in values ~ d^alpha (c + O(d)) near d = 0.

    Fits log|values| against {1, log d, d}; the linear term absorbs the
    smooth modulation so the log-slope is not biased by it.  Known
    non-polynomial corrections of the modulation can be absorbed too by
    listing their powers in ``extra_powers`` (duplicates of the default
    columns are skipped).
    """
    mag = np.abs(window.values)
    floor = mag.max() * 1e-13
    keep = mag > floor
    if keep.sum() < 6:
        raise ValueError("window values vanish; no exponent to fit")
    d, mag = window.d[keep], mag[keep]
    columns = [np.ones_like(d), np.log(d), d]
    for p in extra_powers:
        if min(abs(p - k) for k in (0.0, 1.0)) > 1e-9:
            columns.append(d**p)
    basis = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(basis, np.log(mag), rcond=None)
    return float(coef[1])


def richardson_limit(
    x,
    values,
    boundary: float,
    direction: int,
    mu: float,
    d_min: float,
    d_max: float,
    levels: int = 4,
    extra_powers: tuple = (),
) -> tuple[complex, float, int]:
    """Window-halving sequence of quotient limits, Richardson extrapolated.

    Each halving of d_max shrinks the quadratic model's cubic-order bias
    by 8; successive extrapolations cancel the cubic, then quartic, then
    quintic terms.  Returns (limit, worst_rel, levels_used) where
    worst_rel is the largest fit residual relative to the quotient scale
    over the window sequence; the caller decides what threshold turns
    that into a class-membership failure.  Raises ValueError when not
    even the widest window holds enough samples.
    """
    limits = []
    worst_rel = 0.0
    d = d_max
    for _ in range(levels):
        try:
            window = FitWindow(x, values, boundary, direction, d_min, d)
        except ValueError:
            break
        limit, resid, scale = quotient_limit_fit(window, mu, extra_powers)
        limits.append(limit)
        if scale > 0:
            worst_rel = max(worst_rel, resid / scale)
        d /= 2.0
    if not limits:
        raise ValueError(
            f"no usable fit window at {boundary:g}: need at least 6 samples in "
            f"[{d_min:g}, {d_max:g}]"
        )
    extrap = np.asarray(limits, dtype=np.complex128)
    order = 3.0
    while len(extrap) > 1:
        extrap = (2.0**order * extrap[1:] - extrap[:-1]) / (2.0**order - 1.0)
        order += 1.0
    return complex(extrap[0]), worst_rel, len(limits)


def power_model_fit(window: FitWindow, mu: float) -> tuple[np.ndarray, float]:
    """Fit values ~ d^mu (c0 + c1 d + c2 d^2); return (coefficients, rel misfit).

    The misfit is relative to the rms of the windowed samples, so
    candidate exponents can be ranked on a common scale.
    """
    basis = np.column_stack([window.d**mu, window.d ** (mu + 1), window.d ** (mu + 2)])
    coef, *_ = np.linalg.lstsq(basis, window.values, rcond=None)
    misfit = basis @ coef - window.values
    denom = float(np.sqrt(np.mean(np.abs(window.values) ** 2)))
    rel = float(np.sqrt(np.mean(np.abs(misfit) ** 2)) / denom) if denom > 0 else 0.0
    return coef, rel
