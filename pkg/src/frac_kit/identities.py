"""Bilinear boundary identities and boundary-class bookkeeping.

Both identities trade an interior integral against weighted boundary
traces.  The interior part is integrated by trapezoid on the window
[-1+delta, 1-delta] with delta = 10h; the remaining boundary layers
are integrated in closed form after replacing each factor by its
fitted power model d^mu (c0 + c1 d + c2 d^2), which is what keeps the
quadrature honest when integrands behave like d^{2a-1} or d^{a-1} at
the endpoints.  Operator images on the open interval are exact by
construction (rhs + shift * values), never re-applied matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma
from typing import Sequence, Union

import numpy as np
import scipy.integrate

from .errors import AmbiguousClassError, IntegrabilityError, TraceFitError
from .fitting import FitWindow, power_model_fit, quotient_model_fit, richardson_limit
from .halfline import CLASS_A
from .interval import IntervalMesh, IntervalSolution

__all__ = [
    "IdentityReport",
    "ClassificationReport",
    "check_pohozaev",
    "check_green",
    "classify_e_mu",
]

REL_GAP_FLOOR = 1e-14
_FIT_WINDOW = 0.25
_LAYER_NODES = 10
_TRACE_RTOL = 1e-2
_MODEL_MISFIT_TOL = 5e-2


@dataclass
class IdentityReport:
    """Two sides of a checked identity and their gap.

    rel_gap is abs_gap / max(|lhs|, |rhs|, 1e-14), so identities whose
    both sides vanish report a zero gap instead of 0/0 noise.
    """

    identity: str
    a: float
    m: int
    lhs: complex
    rhs: complex
    abs_gap: float
    rel_gap: float
    inputs_summary: str

    def as_dict(self) -> dict:
        def _plain(z):
            z = complex(z)
            return z.real if z.imag == 0.0 else [z.real, z.imag]

        return {
            "identity": self.identity,
            "a": self.a,
            "m": self.m,
            "lhs": _plain(self.lhs),
            "rhs": _plain(self.rhs),
            "abs_gap": self.abs_gap,
            "rel_gap": self.rel_gap,
            "inputs_summary": self.inputs_summary,
        }


def _make_report(identity, a, m, lhs, rhs, summary) -> IdentityReport:
    lhs = complex(lhs)
    rhs = complex(rhs)
    gap = abs(lhs - rhs)
    rel = gap / max(abs(lhs), abs(rhs), REL_GAP_FLOOR)
    return IdentityReport(identity, a, m, lhs, rhs, gap, rel, summary)


def _check_pair(u: IntervalSolution, v: IntervalSolution, a) -> None:
    if not isinstance(u, IntervalSolution) or not isinstance(v, IntervalSolution):
        raise TypeError("identity checks take interval solutions")
    if u.mesh.m != v.mesh.m:
        raise ValueError(f"mesh sizes differ: {u.mesh.m} vs {v.mesh.m}")
    if u.a != v.a:
        raise ValueError(f"orders differ: {u.a} vs {v.a}")
    if a is not None and float(a) != u.a:
        raise ValueError(f"stated order {a:g} does not match the solutions' {u.a:g}")


def _summary(name: str, u: IntervalSolution, v: IntervalSolution) -> str:
    def _one(tag, s):
        return (
            f"{tag}: {s.class_tag}, shift={complex(s.shift):g}, "
            f"sup|rhs|={float(np.abs(s.rhs).max()):.3g}"
        )

    return f"{name} at a={u.a:g}, m={u.mesh.m}; {_one('u', u)}; {_one('v', v)}"


def _image(sol: IntervalSolution) -> np.ndarray:
    """Operator image of the solution on the open interval."""
    return sol.rhs + sol.shift * sol.values


def _endpoint_window(sol: IntervalSolution, boundary: float, direction: int) -> FitWindow:
    h = sol.mesh.h
    try:
        return FitWindow(
            sol.mesh.x, sol.values, boundary, direction, 2.0 * h, _FIT_WINDOW
        )
    except ValueError as exc:
        raise TraceFitError(f"no usable fit window at {boundary:+g}: {exc}") from exc


def _gated_quotient(sol: IntervalSolution, boundary: float, direction: int, mu: float) -> np.ndarray:
    """Quadratic model of values/d^mu with a misfit gate."""
    window = _endpoint_window(sol, boundary, direction)
    coef = quotient_model_fit(window, mu)
    q = window.values / window.d**mu
    basis = np.column_stack([np.ones_like(window.d), window.d, window.d**2])
    misfit = float(np.sqrt(np.mean(np.abs(basis @ coef - q) ** 2)))
    scale = max(float(np.abs(q).max()), REL_GAP_FLOOR)
    if misfit > _MODEL_MISFIT_TOL * scale:
        raise TraceFitError(
            f"quotient model misfit {misfit:.3e} exceeds "
            f"{_MODEL_MISFIT_TOL:g} * scale {scale:.3e} at {boundary:+g} (mu={mu:g})"
        )
    return coef


def _smooth_model(mesh: IntervalMesh, data: np.ndarray, boundary: float, direction: int) -> np.ndarray:
    """Quadratic-in-d model of smooth node data near an endpoint."""
    h = mesh.h
    window = FitWindow(mesh.x, data, boundary, direction, 0.5 * h, 12.5 * h)
    basis = np.column_stack([np.ones_like(window.d), window.d, window.d**2])
    coef, *_ = np.linalg.lstsq(basis, window.values, rcond=None)
    return coef


def _gamma0_trace(sol: IntervalSolution, boundary: float, direction: int, mu: float) -> complex:
    h = sol.mesh.h
    try:
        limit, worst_rel, _ = richardson_limit(
            sol.mesh.x, sol.values, boundary, direction, mu, 2.0 * h, _FIT_WINDOW
        )
    except ValueError as exc:
        raise TraceFitError(f"no usable fit window at {boundary:+g}: {exc}") from exc
    if worst_rel > _TRACE_RTOL:
        raise TraceFitError(
            f"trace fit residual {worst_rel:.3e} exceeds {_TRACE_RTOL:g} "
            f"at {boundary:+g} (mu={mu:g})"
        )
    return limit


def _power_series_integral(coeffs: Sequence, start_power: float, upper: float) -> complex:
    """Integral over (0, upper] of sum_k coeffs[k] d^(start_power+k).

    A term at power <= -1 is dropped when its coefficient is pure fit
    noise and rejected otherwise: a genuinely non-integrable product
    means the inputs left the admissible class.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    neglect = 1e-7 * float(np.abs(coeffs).max()) + 1e-13
    total = 0.0 + 0.0j
    for k, c in enumerate(coeffs):
        p = start_power + k
        if p <= -1.0 + 1e-9:
            if abs(c) > neglect:
                raise IntegrabilityError(
                    f"layer integrand carries {abs(c):.3g} * d^{p:g}, "
                    "not integrable at the endpoint"
                )
            continue
        total += c * upper ** (p + 1.0) / (p + 1.0)
    return total


def check_pohozaev(u: IntervalSolution, v: IntervalSolution, a: float = None) -> IdentityReport:
    """Interior integral of Pu dv + du Pv against the d^a boundary products.

    The right-hand side weights each endpoint by the interior normal
    (+1 at -1, -1 at +1) and carries the constant gamma(a+1)^2; both
    solutions must be real and of the homogeneous class, whose d^a
    structure makes the integrand's endpoint behavior d^{2a-1}
    integrable but too singular for plain trapezoid, hence the model
    layers.
    """
    _check_pair(u, v, a)
    for tag, s in (("u", u), ("v", v)):
        if s.class_tag != CLASS_A:
            raise ValueError(f"{tag} is not a homogeneous-class solution ({s.class_tag})")
        if np.iscomplexobj(s.values) or complex(s.shift).imag != 0.0:
            raise ValueError(f"{tag} must be real for the derivative identity")
    a, mesh = u.a, u.mesh
    h, x, m = mesh.h, mesh.x, mesh.m
    delta = _LAYER_NODES * h

    image_u = np.real(_image(u))
    image_v = np.real(_image(v))
    du = np.empty(m)
    dv = np.empty(m)
    du[1:-1] = (u.values[2:] - u.values[:-2]) / (2.0 * h)
    dv[1:-1] = (v.values[2:] - v.values[:-2]) / (2.0 * h)
    du[[0, -1]] = dv[[0, -1]] = 0.0  # masked out below
    keep = (x >= -1.0 + delta - 1e-12) & (x <= 1.0 - delta + 1e-12)
    integrand = image_u * dv + du * image_v
    lhs = scipy.integrate.trapezoid(integrand[keep], x[keep])

    for boundary, direction in ((-1.0, 1), (1.0, -1)):
        cu = np.real(_gated_quotient(u, boundary, direction, a))
        cv = np.real(_gated_quotient(v, boundary, direction, a))
        fu = _smooth_model(mesh, image_u, boundary, direction)
        fv = _smooth_model(mesh, image_v, boundary, direction)
        # d/dd of d^a (c0 + c1 d + c2 d^2) = d^{a-1} (a c0 + (a+1) c1 d + ...)
        dpu = np.array([a * cu[0], (a + 1.0) * cu[1], (a + 2.0) * cu[2]])
        dpv = np.array([a * cv[0], (a + 1.0) * cv[1], (a + 2.0) * cv[2]])
        series = np.convolve(fu, dpv) + np.convolve(dpu, fv)
        lhs += direction * np.real(_power_series_integral(series, a - 1.0, delta))

    g0 = {}
    for boundary, direction in ((-1.0, 1), (1.0, -1)):
        g0[boundary] = (
            _gamma0_trace(u, boundary, direction, a),
            _gamma0_trace(v, boundary, direction, a),
        )
    const = gamma(a + 1.0) ** 2
    rhs = const * (
        g0[-1.0][0] * g0[-1.0][1] - g0[1.0][0] * g0[1.0][1]
    )
    return _make_report("pohozaev", a, m, lhs, np.real(rhs), _summary("pohozaev", u, v))


def check_green(u: IntervalSolution, v: IntervalSolution, a: float = None) -> IdentityReport:
    """Antisymmetric interior integral against Dirichlet/Neumann traces.

    LHS integrates Pu conj(v) - u conj(Pv); RHS sums, over both
    endpoints, gamma1(u/d^{a-1}) conj gamma0(v/d^{a-1}) minus
    gamma0 conj gamma1, times gamma(a) gamma(a+1).  gamma1 is the
    interior-normal derivative of the fitted quotient, so no extra
    orientation signs appear.  Inputs may be homogeneous (vanishing
    gamma0) or blow-up solutions; when both blow up at a shared
    endpoint with distinct shifts the product term d^{2a-2} stops
    being integrable for a <= 1/2 and the check refuses.
    """
    _check_pair(u, v, a)
    a, mesh = u.a, u.mesh
    h, x, m = mesh.h, mesh.x, mesh.m
    delta = _LAYER_NODES * h
    mu = a - 1.0

    image_u = _image(u)
    image_v = _image(v)
    keep = (x >= -1.0 + delta - 1e-12) & (x <= 1.0 - delta + 1e-12)
    integrand = image_u * np.conj(v.values) - u.values * np.conj(image_v)
    lhs = complex(scipy.integrate.trapezoid(integrand[keep], x[keep]))

    models = {}
    for boundary, direction in ((-1.0, 1), (1.0, -1)):
        cu = _gated_quotient(u, boundary, direction, mu)
        cv = _gated_quotient(v, boundary, direction, mu)
        fu = _smooth_model(mesh, np.asarray(u.rhs), boundary, direction)
        fv = _smooth_model(mesh, np.asarray(v.rhs), boundary, direction)
        models[boundary] = (cu, cv)
        # d^{a-1}(f_u conj(Qv) - Qu conj(f_v)) from the smooth data parts
        series = np.convolve(fu, np.conj(cv)) - np.convolve(cu, np.conj(fv))
        lhs += _power_series_integral(series, mu, delta)
        # shifts put lambda u, lambda v into the images; the singular
        # product survives only through the shift difference
        shift_gap = complex(u.shift) - np.conj(complex(v.shift))
        if shift_gap != 0.0:
            # leading coefficients below fit noise are structural zeros
            # (the function is one class higher at this endpoint), not
            # genuine blow-up strength
            cu_eff, cv_eff = cu.astype(complex), cv.astype(complex)
            for c in (cu_eff, cv_eff):
                if abs(c[0]) < 1e-3 * np.abs(c).max():
                    c[0] = 0.0
            cross = shift_gap * np.convolve(cu_eff, np.conj(cv_eff))
            if np.abs(cross).max() > REL_GAP_FLOOR * 1e3:
                lhs += _power_series_integral(cross, 2.0 * mu, delta)

    const = gamma(a) * gamma(a + 1.0)
    rhs = 0.0 + 0.0j
    for boundary in (-1.0, 1.0):
        cu, cv = models[boundary]
        rhs += cu[1] * np.conj(cv[0]) - cu[0] * np.conj(cv[1])
    rhs *= const
    if not (np.iscomplexobj(u.values) or np.iscomplexobj(v.values)
            or complex(u.shift).imag or complex(v.shift).imag):
        lhs, rhs = lhs.real, rhs.real
    return _make_report("green", a, m, lhs, rhs, _summary("green", u, v))


@dataclass
class ClassificationReport:
    """Best boundary-class exponent for a grid function.

    coefficients holds the winning per-endpoint model coefficients,
    ordered (endpoint -1, endpoint +1); residuals and leading expose
    the full candidate ranking so class membership tests can check
    that e.g. the mu = a-1 leading coefficient of an a-class function
    is negligible.
    """

    best_mu: float
    coefficients: tuple
    residuals: dict
    leading: dict


def classify_e_mu(
    u: Union[IntervalSolution, np.ndarray],
    candidates: Sequence[float],
    mesh: IntervalMesh = None,
) -> ClassificationReport:
    """Rank candidate boundary exponents by power-model fit quality.

    Each candidate mu is fitted as d^mu (c0 + c1 d + c2 d^2) at both
    endpoints; the score is the worse of the two relative misfits.
    Scores within 10% of each other are a tie; ties are broken in
    favor of the candidate whose leading coefficient is substantial,
    because a class nested one power higher fits the lower class's
    model exactly, with c0 degenerating to zero.  A tie between two
    non-degenerate candidates raises instead of guessing.
    """
    if isinstance(u, IntervalSolution):
        values, mesh = u.values, u.mesh
    else:
        if mesh is None:
            raise ValueError("classify_e_mu needs a mesh when given raw samples")
        values = np.asarray(u)
    candidates = [float(mu) for mu in candidates]
    if len(candidates) < 1:
        raise ValueError("need at least one candidate exponent")
    if len(set(candidates)) != len(candidates):
        raise ValueError("candidate exponents must be distinct")
    h = mesh.h
    residuals, leading, coeffs = {}, {}, {}
    for mu in candidates:
        fits = []
        for boundary, direction in ((-1.0, 1), (1.0, -1)):
            window = FitWindow(mesh.x, values, boundary, direction, 2.0 * h, _FIT_WINDOW)
            fits.append(power_model_fit(window, mu))
        residuals[mu] = max(fits[0][1], fits[1][1])
        leading[mu] = (fits[0][0][0], fits[1][0][0])
        coeffs[mu] = (fits[0][0], fits[1][0])
    ranked = sorted(candidates, key=lambda mu: residuals[mu])
    best = ranked[0]
    if len(ranked) > 1:
        r0, r1 = residuals[best], residuals[ranked[1]]
        if r1 <= 1.1 * r0:
            scale = max(float(np.abs(values).max()), REL_GAP_FLOOR)
            live = [
                mu for mu in (best, ranked[1])
                if max(abs(c) for c in leading[mu]) >= 1e-4 * scale
            ]
            if len(live) != 1:
                raise AmbiguousClassError(
                    f"exponents {best:g} and {ranked[1]:g} fit equally well "
                    f"(residuals {r0:.3e} vs {r1:.3e})"
                )
            best = live[0]
    return ClassificationReport(best, coeffs[best], residuals, leading)
