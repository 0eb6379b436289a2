"""
Large radial solutions on balls (p > n) and the critical case p = n
"""
import dataclasses
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import InputError, InvariantViolation, RangeError, RegimeError
from app.core.logging_setup import log_run_event
from app.core.radial_ode import blowup_radius, integrate_log
from app.core.seeding import build_seed, natural_length, shooting_delta
from app.core.verification import fit_power_law
from app.models.problem import IntegratorControls, ProblemSpec
from app.models.profiles import RadialProfile
from app.models.reports import BlowupReport, DecayRow, DecayTable, LargeSolutionFit

logger = logging.getLogger(__name__)

ORDERING_RTOL = 1e-10
FIT_R2_MIN = 0.999
CRITICAL_REL_TOL = 1e-12


def boundary_constant(spec: ProblemSpec, R: float) -> float:
    """C in u ~ C (R - r)^(-alpha): C^(p-n) = alpha^n (alpha+1) / (A R^(n-1))"""
    alpha = spec.boundary_exponent
    return (alpha ** spec.n * (alpha + 1.0) / (spec.A * R ** (spec.n - 1))) ** (1.0 / (spec.p - spec.n))


def exponent_identity(n: float, p: float) -> Tuple[float, float]:
    """Both sides of 2n/(n-p) + (n+1)/(p-n) = (n-1)/(n-p)"""
    if p == n:
        raise InputError("exponent identity is undefined at p = n")
    lhs = 2.0 * n / (n - p) + (n + 1.0) / (p - n)
    rhs = (n - 1.0) / (n - p)
    return lhs, rhs


class _RadiusCache:
    """Memoised a0 -> r_star for one bisection run"""

    def __init__(self, spec: ProblemSpec, controls: IntegratorControls):
        self.spec = spec
        self.controls = controls
        self.reports: Dict[float, BlowupReport] = {}

    def __call__(self, a0: float) -> float:
        if a0 not in self.reports:
            self.reports[a0] = blowup_radius(self.spec, a0, self.controls)
        return self.reports[a0].r_star


def _bracket(radius: _RadiusCache, R: float) -> Tuple[float, float]:
    """(a_lo, a_hi) with r_star(a_lo) > R >= r_star(a_hi), by doubling or halving from 1"""
    a = 1.0
    r = radius(a)
    if r > R:
        while r > R:
            a_lo, a = a, 2.0 * a
            if a > settings.LARGE_A0_MAX:
                raise RangeError(f"no central value up to {settings.LARGE_A0_MAX:g} blows up inside R={R}")
            r = radius(a)
        return a_lo, a
    while r <= R:
        a_hi, a = a, 0.5 * a
        if a < settings.LARGE_A0_MIN:
            raise RangeError(f"no central value down to {settings.LARGE_A0_MIN:g} survives to R={R}")
        r = radius(a)
    return a, a_hi


def _boundary_profile(
    spec: ProblemSpec,
    a0: float,
    R: float,
    controls: IntegratorControls,
) -> Tuple[RadialProfile, float]:
    """
    Trajectory of a0 integrated in log u up to log(u/a0) = LARGE_LOG_CAP,
    sampled densely in the boundary layer. Returns (profile, own blow-up radius).
    """
    seed = build_seed(spec, a0, delta=shooting_delta(spec, a0))
    u_d, du_d = seed.state_at(seed.delta)
    state0 = (seed.delta, u_d, du_d)
    cap = a0 * math.exp(settings.LARGE_LOG_CAP)
    r_limit = seed.delta + 1e3 * natural_length(spec, a0)
    capped = controls.with_cap(cap)

    trial = integrate_log(spec, state0, r_limit, capped.model_copy(update={'samples': 8}))
    if trial.status != 'cap_reached':
        raise InvariantViolation(f"trajectory from a0={a0:.6g} did not blow up before r={r_limit:.6g}")
    tail = (boundary_constant(spec, trial.r_end) / cap) ** (1.0 / spec.boundary_exponent)
    r_inf = trial.r_end + tail

    lo, hi = settings.LARGE_FIT_WINDOW
    distances = np.geomspace(lo * R, hi * R, settings.LARGE_FIT_POINTS)
    profile = integrate_log(spec, state0, r_limit, capped, extra_radii=r_inf - distances)
    profile = dataclasses.replace(profile, status='blowup_detected', seed=seed, handoff_radius=seed.delta)
    return profile, r_inf


def solve_large_on_ball(
    spec: ProblemSpec,
    R: float,
    controls: Optional[IntegratorControls] = None,
) -> LargeSolutionFit:
    """
    Central value whose trajectory blows up exactly at R, with the boundary
    exponent fitted over distances [LARGE_FIT_WINDOW] * R.
    """
    if spec.regime != 'supercritical':
        raise RegimeError(f"large solutions on balls need p > n, got p={spec.p}, n={spec.n}")
    if not R > 0:
        raise InputError(f"ball radius must be positive, got {R}")
    controls = controls or IntegratorControls()
    radius = _RadiusCache(spec, controls)

    a_lo, a_hi = _bracket(radius, R)
    steps = 0
    while a_hi - a_lo >= settings.LARGE_BISECTION_RTOL * a_lo:
        mid = math.sqrt(a_lo * a_hi)
        if radius(mid) > R:
            a_lo = mid
        else:
            a_hi = mid
        steps += 1
    a_star = math.sqrt(a_lo * a_hi)
    r_star = radius(a_star)
    logger.info(f"Large solution n={spec.n}, p={spec.p}, R={R:g}: a_star={a_star:.10g} after {steps} bisections")

    profile, r_inf = _boundary_profile(spec, a_star, R, controls)
    lo, hi = settings.LARGE_FIT_WINDOW
    window = (lo * R, hi * R)
    d = r_inf - profile.r
    keep = d > 0
    alpha = spec.boundary_exponent
    fit = fit_power_law(d[keep], np.exp(profile.log_values()[keep]), window=window, target=-alpha)
    if fit.r2 <= FIT_R2_MIN:
        logger.warning(f"Boundary exponent fit for R={R:g} has r2={fit.r2:.6f}")
    if abs(r_inf - R) > 1e-2 * R * lo:
        logger.warning(
            f"Trajectory blow-up radius {r_inf:.10g} differs from R={R:g} by more than the fit window resolution"
        )

    result = LargeSolutionFit(
        spec=spec,
        R=R,
        a_star=a_star,
        a_bracket=(a_lo, a_hi),
        r_star=r_inf,
        bisection_steps=steps,
        alpha_fit=-fit.slope_or_exponent,
        alpha_target=alpha,
        fit_window=window,
        fit_r2=fit.r2,
        fit=fit,
        asymptotic_constant=math.exp(fit.intercept),
        profile=profile,
    )
    log_run_event(logger, "solve_large_on_ball", {
        'n': spec.n, 'p': spec.p, 'R': R, 'a_star': a_star, 'alpha_fit': result.alpha_fit,
        'r_extrapolated': r_star, 'r_trajectory': r_inf,
    })
    return result


def central_decay_table(
    spec: ProblemSpec,
    radii: Sequence[float],
    controls: Optional[IntegratorControls] = None,
    fits: Optional[List[LargeSolutionFit]] = None,
) -> DecayTable:
    """Rows (R, a_star, a_star R^(2n/(p-n))) over increasing radii"""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InputError("radii must be strictly increasing")
    if fits is None:
        fits = [solve_large_on_ball(spec, R, controls) for R in radii]
    power = 2.0 * spec.n / (spec.p - spec.n)
    rows = [DecayRow(R=f.R, a_star=f.a_star, product=f.a_star * f.R ** power) for f in fits]
    products = np.array([row.product for row in rows])
    mean = float(products.mean())
    spread = float(np.max(np.abs(products - mean)) / mean)
    monotone = all(b.a_star < a.a_star for a, b in zip(rows, rows[1:]))
    return DecayTable(spec=spec, rows=rows, spread=spread, monotone=monotone, scaling_power=power)


def blowup_ladder(
    spec: ProblemSpec,
    a0s: Sequence[float],
    controls: Optional[IntegratorControls] = None,
) -> List[BlowupReport]:
    """Blow-up reports over a ladder of central values"""
    return [blowup_radius(spec, a0, controls) for a0 in a0s]


def borderline_demo(
    spec: ProblemSpec,
    a0: float,
    r_max: float,
    controls: Optional[IntegratorControls] = None,
) -> RadialProfile:
    """
    Critical trajectory (p = n) integrated in log u under CRITICAL_VALUE_CAP.
    A cap crossing is logged as an error and left on the profile status.
    """
    if spec.regime != 'critical':
        raise RegimeError(f"borderline demo needs p = n, got p={spec.p}, n={spec.n}")
    controls = controls or IntegratorControls()
    controls = controls.model_copy(update={
        'value_cap': settings.CRITICAL_VALUE_CAP,
        'rel_tol': min(controls.rel_tol, CRITICAL_REL_TOL),
    })
    seed = build_seed(spec, a0, delta=shooting_delta(spec, a0))
    if r_max <= seed.delta:
        raise InputError(f"r_max={r_max} must exceed delta={seed.delta}")
    u_d, du_d = seed.state_at(seed.delta)
    profile = integrate_log(spec, (seed.delta, u_d, du_d), r_max, controls)
    profile = dataclasses.replace(profile, seed=seed, handoff_radius=seed.delta)
    if profile.status != 'completed':
        logger.error(
            f"Critical trajectory n={spec.n}, a0={a0:.6g} reached the cap at r={profile.r_end:.6g}; "
            "no finite blow-up is expected at p = n"
        )
    return profile


def critical_homogeneity(
    spec: ProblemSpec,
    a0: float,
    lam: float,
    r_max: float,
    controls: Optional[IntegratorControls] = None,
) -> float:
    """max_r |u_{lam a0}(r) / (lam u_{a0}(r)) - 1|"""
    if not lam > 0:
        raise InputError(f"scale factor must be positive, got {lam}")
    base = borderline_demo(spec, a0, r_max, controls)
    scaled = borderline_demo(spec, lam * a0, r_max, controls)
    if base.r.shape != scaled.r.shape or not np.allclose(base.r, scaled.r, rtol=1e-14, atol=0):
        raise InvariantViolation("critical trajectories were sampled on different grids")
    deviation = np.expm1(scaled.log_values() - base.log_values() - math.log(lam))
    return float(np.max(np.abs(deviation)))


def ordering_check(
    spec: ProblemSpec,
    profile_lo: RadialProfile,
    profile_hi: RadialProfile,
    rtol: float = ORDERING_RTOL,
) -> bool:
    """True iff profile_hi >= profile_lo on the overlap of their ranges, up to rtol"""
    if profile_lo.spec != spec or profile_hi.spec != spec:
        raise InputError("ordering check needs both profiles for the same problem")
    start = max(profile_lo.r[0], profile_hi.r[0])
    stop = min(profile_lo.r[-1], profile_hi.r[-1])
    if not start < stop:
        raise InputError("profiles do not overlap")

    pts = np.union1d(profile_lo.r, profile_hi.r)
    pts = pts[(pts >= start) & (pts <= stop)]

    def log_u_at(profile: RadialProfile) -> np.ndarray:
        return np.interp(np.log(pts), np.log(profile.r), profile.log_values())

    gap = log_u_at(profile_hi) - log_u_at(profile_lo)
    return bool(np.all(gap >= -rtol))
