"""
Residual evaluators, exact-solution oracles and power-law fits
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import linregress

from app.core.errors import InputError, RegimeError
from app.models.problem import ProblemSpec
from app.models.profiles import RadialProfile
from app.models.reports import ConvexityReport, FitReport, ResidualReport

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-300
MIN_FIT_POINTS = 8
CONVEXITY_SLACK = 1e-8


def exact_singular(spec: ProblemSpec) -> Tuple[float, float]:
    """(alpha, beta) with u = beta r^alpha solving the radial equation, alpha = 2n/(n-p)"""
    if spec.regime != 'subcritical':
        raise RegimeError(f"singular entire solution needs p < n, got p={spec.p}, n={spec.n}")
    n = spec.n
    alpha = 2.0 * n / (n - spec.p)
    beta = (alpha ** n * (alpha - 1.0) / spec.A) ** (1.0 / (spec.p - n))
    return alpha, beta


def singular_profile(spec: ProblemSpec, r: Sequence[float]) -> RadialProfile:
    """Exact singular solution sampled at r > 0"""
    alpha, beta = exact_singular(spec)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InputError("singular profile is sampled at r > 0 only")
    return RadialProfile(
        spec=spec,
        r=r,
        u=beta * r ** alpha,
        du=alpha * beta * r ** (alpha - 1.0),
        r_end=float(r[-1]),
        status='completed',
    )


def radial_residual(profile: RadialProfile, label: str = "radial") -> ResidualReport:
    """
    Max of |u''(u'/r)^(n-1) - A u^p| / (A u^p) over the stored grid.

    u'' comes from a not-a-knot cubic spline of the sampled u' in log r,
    never from the solver's right-hand side. A second spline of u checks
    the stored u against the stored u' (derivative_mismatch, scaled by u).
    """
    r, u, du = profile.r, profile.u, profile.du
    keep = (r > 0) & np.isfinite(u) & np.isfinite(du)
    r, u, du = r[keep], u[keep], du[keep]
    if r.size < 3:
        raise InputError("residual needs at least 3 finite samples with r > 0")
    t = np.log(r)
    if np.any(np.diff(t) <= 0):
        raise InputError("residual grid must be strictly increasing")

    spline = CubicSpline(t, du)
    d2u = spline(t, 1) / r
    mismatch = np.abs(CubicSpline(t, u)(t, 1) - r * du) / np.maximum(np.abs(u), RESIDUAL_FLOOR)
    n, p, A = profile.spec.n, profile.spec.p, profile.spec.A
    target = A * u ** p
    lhs = d2u * (du / r) ** (n - 1)
    abs_res = np.abs(lhs - target)
    rel_res = abs_res / np.maximum(target, RESIDUAL_FLOOR)
    i = int(np.argmax(rel_res))
    report = ResidualReport(
        max_abs=float(abs_res.max()),
        max_rel=float(rel_res[i]),
        location=float(r[i]),
        n_samples=int(r.size),
        derivative_mismatch=float(mismatch.max()),
        label=label,
    )
    logger.debug(f"Residual {label}: max_rel={report.max_rel:.3e} at r={report.location:.6g}")
    return report


def fit_power_law(
    xs: Sequence[float],
    ys: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
    target: Optional[float] = None,
) -> FitReport:
    """Least-squares slope of log y against log x over xs inside window"""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise InputError("xs and ys must have the same length")
    if window is None:
        window = (float(xs.min()), float(xs.max()))
    mask = (xs >= window[0]) & (xs <= window[1])
    xs, ys = xs[mask], ys[mask]
    if xs.size < MIN_FIT_POINTS:
        raise InputError(f"power-law fit needs {MIN_FIT_POINTS} points in window, got {xs.size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise InputError("power-law fit needs positive data")

    lx, ly = np.log(xs), np.log(ys)
    fit = linregress(lx, ly)
    resid = ly - (fit.intercept + fit.slope * lx)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else 0.0
    return FitReport(
        slope_or_exponent=float(fit.slope),
        target=target,
        window=(float(window[0]), float(window[1])),
        r2=r2,
        n_points=int(xs.size),
        intercept=float(fit.intercept),
    )


def sampled_jump(a, b) -> float:
    """Max relative difference of a against b"""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), RESIDUAL_FLOOR)))


def convexity_report(profile: RadialProfile) -> ConvexityReport:
    """Second divided differences of u, normalised by the adjacent slopes"""
    keep = np.isfinite(profile.u) & np.isfinite(profile.du)
    r, u, du = profile.r[keep], profile.u[keep], profile.du[keep]
    if r.size < 3:
        raise InputError("convexity needs at least 3 finite samples")
    slopes = np.diff(u) / np.diff(r)
    dd2 = 2.0 * np.diff(slopes) / (r[2:] - r[:-2])
    scale = (np.abs(slopes[1:]) + np.abs(slopes[:-1])) / (r[2:] - r[:-2])
    rel = dd2 / np.maximum(scale, RESIDUAL_FLOOR)
    min_rel = float(rel.min())
    return ConvexityReport(
        min_relative_curvature=min_rel,
        increasing=bool(np.all(np.diff(u) > 0)),
        derivative_positive=bool(np.all(du[r > 0] > 0)),
        convex=min_rel >= -CONVEXITY_SLACK,
        strictly_convex=min_rel > 0,
    )


def singular_identity(spec: ProblemSpec) -> float:
    """beta^(n-p) alpha^n (alpha-1) / A, equal to 1"""
    alpha, beta = exact_singular(spec)
    return beta ** (spec.n - spec.p) * alpha ** spec.n * (alpha - 1.0) / spec.A


def relative_error(value: float, target: float) -> float:
    if target == 0:
        return abs(value)
    return abs(value - target) / abs(target)


def is_finite_positive(x: float) -> bool:
    return math.isfinite(x) and x > 0
