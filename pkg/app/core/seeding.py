"""
Series seeds for the radial problem, for any exponent

A truncated Taylor seed of order 2 kappa on [0, delta], the fixed point of
T: xi'' = A phi^p (r/phi')^(n-1), xi(0) = a0, xi'(0) = 0, xi''(0) = a2.
"""
import logging
from typing import List, Optional

import numpy as np

from app.core.config import settings
from app.core.errors import ContractionError, ConvergenceError, InputError
from app.core.logging_setup import log_run_event
from app.core.series import (
    TruncatedSeries,
    series_mul,
    series_r_over_deriv,
    series_real_power,
)
from app.models.problem import ProblemSpec
from app.models.profiles import SeriesSeed

logger = logging.getLogger(__name__)

# Changes below this multiple of machine epsilon are roundoff, not contraction
RATE_FLOOR = 1e3 * np.finfo(float).eps
BAND_SAMPLES = 33


def contraction_factor(n: int, kappa: int) -> float:
    """(n-1) a0^p a2^-n / (2 kappa - 1), which is (n-1)/(2 kappa - 1) once a2^n = A a0^p"""
    if kappa < 1:
        raise InputError(f"kappa must be at least 1, got {kappa}")
    return (n - 1.0) / (2.0 * kappa - 1.0)


def central_second_derivative(spec: ProblemSpec, a0: float) -> float:
    """a2 = (A a0^p)^(1/n)"""
    return (spec.A * a0 ** spec.p) ** (1.0 / spec.n)


def natural_length(spec: ProblemSpec, a0: float) -> float:
    """L with u(r) = a0 v(r/L) mapping the equation onto v(0) = 1, A = 1"""
    return (a0 ** (spec.n - spec.p) / spec.A) ** (1.0 / (2.0 * spec.n))


def shooting_delta(spec: ProblemSpec, a0: float) -> float:
    """Handoff radius in units of the natural length, used off the entire regime"""
    return settings.SERIES_DELTA * natural_length(spec, a0)


def apply_map(spec: ProblemSpec, a0: float, a2: float, phi: TruncatedSeries) -> TruncatedSeries:
    """One application of T on a truncated series of order M"""
    m = phi.order
    power = series_real_power(phi, spec.p).truncate(m - 2)
    h = series_r_over_deriv(phi)
    rhs = series_mul(power, series_real_power(h, spec.n - 1)) * spec.A
    xi = rhs.integrate(0.0).integrate(a0)
    c = xi.coeffs.copy()
    c[2] = 0.5 * a2
    return TruncatedSeries(c)


def _solve_order(spec: ProblemSpec, a0: float, a2: float, phi: TruncatedSeries, k: int) -> TruncatedSeries:
    """
    Fix coefficient k. T_k is affine in c_k with slope -(n-1)/(k-1), so two
    evaluations give the fixed value exactly.
    """
    c = phi.coeffs.copy()
    c[k] = 0.0
    t0 = apply_map(spec, a0, a2, TruncatedSeries(c))[k]
    c[k] = 1.0
    t1 = apply_map(spec, a0, a2, TruncatedSeries(c))[k]
    slope = t1 - t0
    c[k] = t0 / (1.0 - slope)
    return TruncatedSeries(c)


def _observed_rate(changes: List[float], scale: float) -> float:
    floor = RATE_FLOOR * scale
    rates = [
        b / a for a, b in zip(changes, changes[1:])
        if a > floor and b > floor
    ]
    return max(rates) if rates else 0.0


def band_excursion(series: TruncatedSeries, delta: float) -> float:
    """max_j max_{r in [0, delta]} |u^(j)(r) - a_j|, the width the seed occupies in its band"""
    r = np.linspace(0.0, delta, BAND_SAMPLES)
    a = series.derivatives()
    worst = 0.0
    d = series
    for j in range(series.order + 1):
        worst = max(worst, float(np.max(np.abs(d(r) - a[j]))))
        d = d.derivative()
    return worst


def build_seed(
    spec: ProblemSpec,
    a0: float,
    kappa: Optional[int] = None,
    delta: Optional[float] = None,
    sigma: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> SeriesSeed:
    """
    Fixed point of T of order 2 kappa, for any exponent.

    The jet c_4 .. c_{2kappa-2} is solved order by order; Picard iteration
    then settles the top coefficient at rate (n-1)/(2 kappa - 1).
    """
    kappa = kappa if kappa is not None else settings.default_kappa(spec.n)
    delta = settings.SERIES_DELTA if delta is None else delta
    sigma = settings.SERIES_SIGMA if sigma is None else sigma
    tol = settings.SERIES_TOL if tol is None else tol
    max_iter = settings.SERIES_MAX_ITER if max_iter is None else max_iter

    if not a0 > 0:
        raise InputError(f"central value must be positive, got {a0}")
    if not delta > 0:
        raise InputError(f"handoff radius must be positive, got {delta}")
    factor = contraction_factor(spec.n, kappa)
    if factor >= 1.0:
        raise ContractionError(
            f"kappa={kappa} gives contraction factor {factor:.3g} >= 1 for n={spec.n}; need kappa > n/2"
        )

    m = 2 * kappa
    a2 = central_second_derivative(spec, a0)
    phi = TruncatedSeries([a0, 0.0, 0.5 * a2], order=m)
    for k in range(4, m - 1, 2):
        phi = _solve_order(spec, a0, a2, phi, k)

    changes: List[float] = []
    converged = False
    for iteration in range(1, max_iter + 1):
        nxt = apply_map(spec, a0, a2, phi)
        change = float(np.max(np.abs(nxt.coeffs - phi.coeffs)))
        phi = nxt
        changes.append(change)
        scale = max(1.0, float(np.max(np.abs(phi.coeffs))))
        if change <= tol * scale:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"series fixed point did not converge in {max_iter} iterations (last change {changes[-1]:.3e})"
        )

    residual = float(np.max(np.abs(apply_map(spec, a0, a2, phi).coeffs - phi.coeffs)))
    rate = _observed_rate(changes, scale)
    excursion = band_excursion(phi, delta)
    if excursion > sigma:
        logger.warning(
            f"Seed for n={spec.n}, p={spec.p}, a0={a0:.6g} leaves the sigma={sigma} band "
            f"on [0, {delta:.3g}] (excursion {excursion:.3g})"
        )

    seed = SeriesSeed(
        spec=spec,
        a0=a0,
        kappa=kappa,
        delta=delta,
        sigma=sigma,
        series=phi,
        iterations=iteration,
        contraction_estimate=rate,
        residual=residual,
        band_excursion=excursion,
    )
    log_run_event(logger, "build_seed", {
        'n': spec.n, 'p': spec.p, 'a0': a0, 'kappa': kappa, 'iterations': iteration,
        'rate': rate, 'residual': residual,
    })
    return seed

