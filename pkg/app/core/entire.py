"""
Entire radial solutions for p < n

The series seed from app.core.seeding on [0, delta], followed by ODE
continuation to r_max.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import InputError, InvariantViolation, RegimeError
from app.core.logging_setup import log_run_event
from app.core.radial_ode import integrate
from app.core.seeding import build_seed
from app.core.verification import sampled_jump
from app.models.problem import IntegratorControls, ProblemSpec
from app.models.profiles import RadialProfile, SeriesSeed

logger = logging.getLogger(__name__)

BLOWUP_SLOPE_FACTOR = 4.0


def fixed_point_seed(
    spec: ProblemSpec,
    a0: float,
    kappa: Optional[int] = None,
    delta: Optional[float] = None,
    tol: Optional[float] = None,
    sigma: Optional[float] = None,
) -> SeriesSeed:
    """Series seed of an entire solution; p < n and delta in (0, 1)"""
    if spec.regime != 'subcritical':
        raise RegimeError(f"entire seeds need p < n, got p={spec.p}, n={spec.n}")
    delta = settings.SERIES_DELTA if delta is None else delta
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must lie in (0, 1), got {delta}")
    return build_seed(spec, a0, kappa=kappa, delta=delta, sigma=sigma, tol=tol)


def truncation_check(seed: SeriesSeed, controls: Optional[IntegratorControls] = None) -> float:
    """Relative mismatch at delta between the series and the ODE started from the series at delta/2"""
    controls = controls or IntegratorControls()
    half = 0.5 * seed.delta
    u_h, du_h = seed.state_at(half)
    run = integrate(seed.spec, (half, u_h, du_h), seed.delta, controls.model_copy(update={'samples': 8}))
    return sampled_jump([run.u[-1], run.du[-1]], list(seed.state_at(seed.delta)))


def extend_entire(
    seed: SeriesSeed,
    r_max: float,
    controls: Optional[IntegratorControls] = None,
) -> RadialProfile:
    """
    Entire profile on (0, r_max]: series samples up to delta, ODE samples beyond.

    The grid is geometric from PROFILE_SERIES_FRACTION * delta to r_max.
    """
    spec = seed.spec
    if spec.regime != 'subcritical':
        raise RegimeError(f"entire continuation needs p < n, got p={spec.p}, n={spec.n}")
    if r_max <= seed.delta:
        raise InputError(f"r_max={r_max} must exceed delta={seed.delta}")
    controls = controls or IntegratorControls()

    grid = np.geomspace(settings.PROFILE_SERIES_FRACTION * seed.delta, r_max, controls.samples)
    inner = grid[grid <= seed.delta]
    outer = grid[grid > seed.delta]
    u_d, du_d = seed.state_at(seed.delta)
    tail = integrate(spec, (seed.delta, u_d, du_d), r_max, controls, grid=outer)

    if tail.status == 'cap_reached':
        slope = tail.r[-1] * tail.du[-1] / tail.u[-1]
        alpha = 2.0 * spec.n / (spec.n - spec.p)
        if slope > BLOWUP_SLOPE_FACTOR * alpha:
            raise InvariantViolation(
                f"trajectory blows up near r={tail.r_end:.6g} although p < n (log slope {slope:.3g})"
            )
        logger.warning(f"Entire trajectory reached the value cap at r={tail.r_end:.6g}")

    deriv = seed.series.derivative()
    r_first = tail.r[0]
    jump = sampled_jump([seed.series(r_first), deriv(r_first)], [tail.u[0], tail.du[0]])
    if seed.truncation_check is None:
        seed.truncation_check = truncation_check(seed, controls)

    profile = RadialProfile(
        spec=spec,
        r=np.concatenate([inner, tail.r]),
        u=np.concatenate([seed.series(inner), tail.u]),
        du=np.concatenate([deriv(inner), tail.du]),
        r_end=tail.r_end,
        status=tail.status,
        seed=seed,
        handoff_radius=seed.delta,
        handoff_jump=jump,
    )
    log_run_event(logger, "extend_entire", {
        'n': spec.n, 'p': spec.p, 'a0': seed.a0, 'r_end': profile.r_end,
        'status': profile.status, 'handoff_jump': jump, 'truncation': seed.truncation_check,
    })
    return profile


def lemma_monitor(profile: RadialProfile, r_max: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    E(r) = u'^(n+1)/(n+1) - R^(n-1) A u^(p+1)/(p+1) on r >= handoff, R = r_max.

    For p = -1 the potential term is R^(n-1) A log u. Returns (r, E).
    """
    spec = profile.spec
    R = profile.r[-1] if r_max is None else r_max
    start = profile.handoff_radius or profile.r[0]
    keep = profile.r >= start
    r, u, du = profile.r[keep], profile.u[keep], profile.du[keep]
    kinetic = du ** (spec.n + 1) / (spec.n + 1)
    if spec.p == -1:
        potential = R ** (spec.n - 1) * spec.A * np.log(u)
    else:
        potential = R ** (spec.n - 1) * spec.A * u ** (spec.p + 1) / (spec.p + 1)
    return r, kinetic - potential


def monitor_nonincreasing(
    profile: RadialProfile,
    r_max: Optional[float] = None,
    rel_tol: Optional[float] = None,
) -> Tuple[bool, float]:
    """
    E is non-increasing when every step increase stays below
    1e-8 |E(delta)| plus the integrator's relative error on the two terms.
    Returns (ok, worst normalised increase).
    """
    spec = profile.spec
    rel_tol = settings.ODE_REL_TOL if rel_tol is None else rel_tol
    R = profile.r[-1] if r_max is None else r_max
    r, energy = lemma_monitor(profile, R)
    start = profile.handoff_radius or profile.r[0]
    keep = profile.r >= start
    u, du = profile.u[keep], profile.du[keep]
    kinetic = np.abs(du ** (spec.n + 1) / (spec.n + 1))
    if spec.p == -1:
        potential = np.abs(R ** (spec.n - 1) * spec.A * np.log(u))
    else:
        potential = np.abs(R ** (spec.n - 1) * spec.A * u ** (spec.p + 1) / (spec.p + 1))
    allowance = 1e-8 * abs(energy[0]) + 10.0 * rel_tol * (kinetic[1:] + potential[1:])
    increase = np.diff(energy) - allowance
    worst = float(np.max(increase / np.maximum(allowance, 1e-300)))
    return bool(np.all(increase <= 0)), worst
