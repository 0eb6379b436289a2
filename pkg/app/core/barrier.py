"""
Two-dimensional wiping barrier u(x, y) = y^alpha phi(e^x y^beta)

With zeta(phi) = r phi_r the barrier equation reduces to
zeta zeta' = (alpha^2 zeta^2 + phi^p) / (alpha(alpha-1) phi - beta zeta).
Near phi = 0 the unknown is written zeta = gamma phi^((p+1)/3) H(s),
s = phi^((2-p)/3), with H smooth and H(0) = 1.
"""
import dataclasses
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.chebyshev import chebpts1
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from app.core.config import settings
from app.core.errors import (
    BandViolationError,
    ConvergenceError,
    DomainError,
    InputError,
    InvariantViolation,
    SingularityError,
    StiffnessError,
)
from app.core.logging_setup import log_run_event
from app.models.problem import BarrierParams, IntegratorControls
from app.models.profiles import BarrierProfile, ZetaSeed
from app.models.reports import BarrierSample, LemmaReport

logger = logging.getLogger(__name__)

BAND_SAMPLES = 400
SEED_TABLE_SAMPLES = 200
SEED_TABLE_DEPTH = 1e-6
LEMMA_UPPER_RTOL = 1e-8
TAIL_SLOPE_RTOL = 0.02
QUAD_LIMIT = 200


def _ode_rhs(params: BarrierParams, phi: float, zeta: float) -> float:
    """zeta' = (alpha^2 zeta^2 + phi^p) / (zeta (alpha(alpha-1) phi + |beta| zeta))"""
    a = params.alpha
    return (a * a * zeta * zeta + phi ** params.p) / (
        zeta * (a * (a - 1.0) * phi + abs(params.beta) * zeta)
    )


def _quad(func, lo: float, hi: float, **kwargs) -> float:
    tol = settings.BARRIER_QUAD_TOL
    out = quad(func, lo, hi, epsabs=tol, epsrel=tol, limit=QUAD_LIMIT, full_output=1, **kwargs)
    if len(out) > 3:
        raise SingularityError(f"quadrature on [{lo:.3g}, {hi:.3g}] did not converge: {out[3]}")
    return out[0]


def _seed_integrand(params: BarrierParams, H: Chebyshev):
    """Bounded factor S(s) of zeta' ds = s^((2p-1)/(2-p)) S(s) ds"""
    a, g, p = params.alpha, params.gamma_beta, params.p
    b = abs(params.beta)
    c = 3.0 / (2.0 - p)

    def S(s):
        h = H(s)
        return c * (1.0 + a * a * g * g * h * h * s) / (g * h * (a * (a - 1.0) * s + b * g * h))

    return S


def _apply_seed_map(params: BarrierParams, H: Chebyshev, nodes: np.ndarray) -> np.ndarray:
    """T in the reduced unknown: H_new(s_i) = zeta(s_i) / (gamma s_i^((p+1)/(2-p)))"""
    p = params.p
    weight_exp = (2.0 * p - 1.0) / (2.0 - p)
    lead_exp = (p + 1.0) / (2.0 - p)
    S = _seed_integrand(params, H)
    zeta = np.array([
        _quad(S, 0.0, s, weight='alg', wvar=(weight_exp, 0.0)) for s in nodes
    ])
    return zeta / (params.gamma_beta * nodes ** lead_exp)


def band_margin(params: BarrierParams, H: Chebyshev) -> float:
    """max over (0, delta] of |zeta - gamma phi^((p+1)/3)| / phi^q; the band holds when <= 1"""
    phi = np.geomspace(params.delta * 1e-12, params.delta, BAND_SAMPLES)
    s = phi ** ((2.0 - params.p) / 3.0)
    dev = params.gamma_beta * phi ** ((params.p + 1.0) / 3.0) * np.abs(H(s) - 1.0)
    return float(np.max(dev / phi ** params.q))


def _seed_once(params: BarrierParams, tol: float) -> ZetaSeed:
    nodes_count = settings.BARRIER_NODES
    omega = settings.BARRIER_RELAXATION
    s_delta = params.delta ** ((2.0 - params.p) / 3.0)
    domain = [0.0, s_delta]
    nodes = 0.5 * s_delta * (1.0 + chebpts1(nodes_count))

    H = Chebyshev([1.0], domain=domain)
    history: List[float] = []
    for iteration in range(1, settings.BARRIER_MAX_ITER + 1):
        current = H(nodes)
        mapped = _apply_seed_map(params, H, nodes)
        averaged = (1.0 - omega) * current + omega * mapped
        H = Chebyshev.fit(nodes, averaged, nodes_count - 1, domain=domain)
        margin = band_margin(params, H)
        if margin > 1.0:
            raise BandViolationError(
                f"iterate {iteration} left the band at delta={params.delta:.3g} (margin {margin:.3g})"
            )
        change = float(np.max(np.abs(mapped - current)))
        history.append(change)
        if change < tol:
            break
    else:
        raise ConvergenceError(
            f"seed map did not converge in {settings.BARRIER_MAX_ITER} iterations (last change {history[-1]:.3e})"
        )
    return ZetaSeed(
        params=params,
        H=H,
        iterations=iteration,
        residual=change,
        band_margin=margin,
        history=history,
    )


def seed_zeta(params: BarrierParams, tol: Optional[float] = None) -> ZetaSeed:
    """
    Fixed point of zeta' = L(xi), zeta(0) = 0 on (0, delta], starting from
    xi = gamma phi^((p+1)/3). Iterates are averaged with weight
    BARRIER_RELAXATION; delta is halved when an iterate leaves the band.
    """
    tol = settings.BARRIER_TOL if tol is None else tol
    current = params
    for halving in range(settings.BARRIER_MAX_HALVINGS + 1):
        try:
            seed = _seed_once(current, tol)
        except BandViolationError as exc:
            if halving == settings.BARRIER_MAX_HALVINGS:
                raise
            logger.warning(f"{exc}; halving delta")
            current = current.with_delta(0.5 * current.delta)
            continue
        seed.halvings = halving
        log_run_event(logger, "seed_zeta", {
            'p': params.p, 'beta': params.beta, 'delta': current.delta,
            'iterations': seed.iterations, 'band_margin': seed.band_margin, 'halvings': halving,
        })
        return seed
    raise BandViolationError("seed band could not be met")


def _seed_lambda(seed: ZetaSeed) -> Chebyshev:
    """Lambda(s) = int_0^s 3 / ((2-p) gamma H(t)) dt as a Chebyshev series vanishing at s = 0"""
    pr = seed.params
    c = 3.0 / ((2.0 - pr.p) * pr.gamma_beta)
    domain = [0.0, seed.s_delta]
    integrand = Chebyshev.interpolate(lambda s: c / seed.H(s), settings.BARRIER_NODES - 1, domain=domain)
    return integrand.integ(lbnd=0.0)


def seed_lambda_quad(seed: ZetaSeed, phi: float) -> float:
    """Lambda(phi) = int_0^phi dphi/zeta for phi <= delta, by quadrature in s"""
    pr = seed.params
    if phi < 0 or phi > pr.delta * (1.0 + 1e-12):
        raise DomainError(f"phi={phi} outside the seeded interval [0, {pr.delta}]")
    c = 3.0 / ((2.0 - pr.p) * pr.gamma_beta)
    return _quad(lambda s: c / seed.H(s), 0.0, phi ** ((2.0 - pr.p) / 3.0))


def extend_zeta(
    params: BarrierParams,
    zeta_seed: ZetaSeed,
    phi_max: Optional[float] = None,
    controls: Optional[IntegratorControls] = None,
) -> BarrierProfile:
    """
    Continue zeta from delta to phi_max together with Lambda' = 1/zeta,
    both integrated in x = ln phi.
    """
    phi_max = settings.BARRIER_PHI_MAX if phi_max is None else phi_max
    if phi_max < 1e4:
        raise InputError(f"phi_max must be at least 1e4, got {phi_max}")
    controls = controls or IntegratorControls()
    pr = zeta_seed.params
    if pr.p != params.p or pr.beta != params.beta:
        raise InputError("seed was built for different barrier constants")
    delta = pr.delta
    a = pr.alpha

    def rhs(x, y):
        phi = math.exp(x)
        zeta, _ = y
        return [phi * _ode_rhs(pr, phi, zeta), phi / zeta]

    zeta_d = float(zeta_seed.zeta(delta))
    lam_seed = _seed_lambda(zeta_seed)
    lam_d = float(lam_seed(zeta_seed.s_delta))
    sol = solve_ivp(
        rhs,
        (math.log(delta), math.log(phi_max)),
        [zeta_d, lam_d],
        method="DOP853",
        rtol=min(controls.rel_tol, settings.BARRIER_ODE_TOL),
        atol=controls.abs_tol * 1e-3,
        dense_output=True,
    )
    if sol.status != 0:
        raise StiffnessError(f"zeta continuation failed: {sol.message}")

    phi_seed = np.geomspace(delta * SEED_TABLE_DEPTH, delta, SEED_TABLE_SAMPLES, endpoint=False)
    phi_ode = np.geomspace(delta, phi_max, controls.samples)
    zeta_ode, lam_ode = sol.sol(np.log(phi_ode))
    phi_grid = np.concatenate([phi_seed, phi_ode])
    zeta = np.concatenate([zeta_seed.zeta(phi_seed), zeta_ode])
    lam = np.concatenate([lam_seed(zeta_seed.s_of(phi_seed)), lam_ode])

    if np.any(zeta <= 0) or np.any(np.diff(zeta) <= 0):
        raise InvariantViolation("zeta lost positivity or monotonicity")
    if np.any(a * (a - 1.0) * phi_grid - pr.beta * zeta <= 0):
        raise InvariantViolation("denominator alpha(alpha-1) phi - beta zeta left positivity")

    profile = BarrierProfile(
        params=pr,
        seed=zeta_seed,
        phi_grid=phi_grid,
        zeta=zeta,
        lam=lam,
        phi_max=phi_max,
        dense=sol.sol,
        tail_slope=float(zeta_ode[-1] / phi_max),
    )
    log_run_event(logger, "extend_zeta", {
        'p': pr.p, 'beta': pr.beta, 'phi_max': phi_max, 'tail_slope': profile.tail_slope,
        'target': pr.tail_slope_target, 'steps': sol.t.size - 1,
    })
    return profile


def zeta_at(profile: BarrierProfile, phi):
    """zeta at phi in (0, phi_max], seed below delta and the dense solution above"""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    out = np.empty_like(phi)
    low = phi <= profile.delta
    out[low] = profile.seed.zeta(phi[low])
    if np.any(~low):
        out[~low] = profile.dense(np.log(phi[~low]))[0]
    return out


def lambda_at(profile: BarrierProfile, phi: float) -> float:
    """Lambda(phi) = int_0^phi dphi/zeta"""
    if phi < 0 or phi > profile.phi_max:
        raise DomainError(f"phi={phi} outside [0, {profile.phi_max}]")
    if phi <= profile.delta:
        return seed_lambda_quad(profile.seed, phi)
    return float(profile.dense(math.log(phi))[1])


def compute_r0(profile: BarrierProfile, params: Optional[BarrierParams] = None) -> float:
    """r0 = r1 exp(-int_0^phi1 dphi/zeta)"""
    params = params or profile.params
    if not 0 < params.phi1 <= profile.phi_max:
        raise InputError(f"phi1={params.phi1} outside the computed range")
    lam1 = lambda_at(profile, params.phi1)
    if not math.isfinite(lam1) or lam1 <= 0:
        raise SingularityError(f"log-radius integral evaluated to {lam1!r}")
    r0 = params.r1 * math.exp(-lam1)
    if not 0.0 < r0 < params.r1:
        raise InvariantViolation(f"r0={r0} outside (0, r1={params.r1})")
    profile.r0 = r0
    logger.info(f"Barrier p={params.p}, beta={params.beta}: r0={r0:.12g} from phi1={params.phi1:.3g}")
    return r0


def phi_of_r(profile: BarrierProfile, r: float) -> float:
    """Invert ln(r/r0) = Lambda(phi) by bracketed root finding"""
    if profile.r0 is None:
        raise InputError("r0 has not been computed for this profile")
    r0 = profile.r0
    if r < r0:
        raise DomainError(f"r={r} lies below r0={r0}")
    target = math.log(r / r0)
    if target == 0.0:
        return 0.0
    seed = profile.seed
    lam_d = float(profile.dense(math.log(profile.delta))[1])
    lam_max = float(profile.dense(math.log(profile.phi_max))[1])
    if target > lam_max:
        raise DomainError(f"r={r} lies beyond r(phi_max)={r0 * math.exp(lam_max):.6g}")
    rtol = 4.0 * np.finfo(float).eps
    if target <= lam_d:
        cheb = _seed_lambda(seed)
        s = brentq(lambda t: float(cheb(t)) - target, 0.0, seed.s_delta, xtol=1e-300, rtol=rtol)
        return s ** (3.0 / (2.0 - seed.params.p))
    x = brentq(
        lambda t: float(profile.dense(t)[1]) - target,
        math.log(profile.delta),
        math.log(profile.phi_max),
        xtol=1e-15,
        rtol=rtol,
    )
    return math.exp(x)


def recover_phi(
    profile: BarrierProfile,
    params: Optional[BarrierParams] = None,
    r_grid: Optional[Sequence[float]] = None,
) -> BarrierProfile:
    """Profile with phi sampled on increasing radii r_grid >= r0"""
    if profile.r0 is None:
        compute_r0(profile, params)
    if r_grid is None:
        r_grid = profile.r0 * np.exp(profile.lam)
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r_grid) <= 0):
        raise InputError("r_grid must be strictly increasing")
    phis = np.array([phi_of_r(profile, float(r)) for r in r_grid])
    return dataclasses.replace(profile, r_grid=r_grid, phi_of_r=phis)


def _assemble_point(profile: BarrierProfile, x: float, y: float) -> BarrierSample:
    pr = profile.params
    a, b, p = pr.alpha, pr.beta, pr.p
    if y <= 0:
        raise DomainError(f"y={y} must be positive")
    r = math.exp(x) * y ** b
    if r <= profile.r0:
        raise DomainError(f"point ({x}, {y}) lies outside the wiping domain (r={r:.6g} <= r0)")
    phi = phi_of_r(profile, r)
    zeta = float(zeta_at(profile, phi)[0])
    # r^2 phi_rr = zeta zeta' - zeta
    rr = (a * a * zeta * zeta + phi ** p) / (a * (a - 1.0) * phi - b * zeta) - zeta
    ya = y ** a
    uxx = ya * (zeta + rr)
    uxy = y ** (a - 1.0) * ((a + b) * zeta + b * rr)
    uyy = y ** (a - 2.0) * (a * (a - 1.0) * phi + b * (2.0 * a + b - 1.0) * zeta + b * b * rr)
    u = ya * phi
    return BarrierSample(
        x=x,
        y=y,
        r=r,
        phi=phi,
        u=u,
        ux=ya * zeta,
        uy=y ** (a - 1.0) * (a * phi + b * zeta),
        uxx=uxx,
        uxy=uxy,
        uyy=uyy,
        det=uxx * uyy - uxy * uxy,
        u_p=u ** p,
    )


def assemble_solution(
    profile: BarrierProfile,
    params: Optional[BarrierParams] = None,
    points: Iterable[Tuple[float, float]] = (),
) -> List[BarrierSample]:
    """u, gradient and analytic Hessian at points strictly inside the wiping domain"""
    if profile.r0 is None:
        compute_r0(profile, params)
    return [_assemble_point(profile, float(x), float(y)) for x, y in points]


def barrier_value(profile: BarrierProfile, x: float, y: float) -> float:
    """u(x, y) = y^alpha phi(e^x y^beta)"""
    pr = profile.params
    return y ** pr.alpha * phi_of_r(profile, math.exp(x) * y ** pr.beta)


def fd_hessian(profile: BarrierProfile, x: float, y: float, h: Optional[float] = None) -> Tuple[float, float, float]:
    """
    Fourth-order central differences of u alone: (u_xx, u_xy, u_yy).

    Steps are h in x and h*y in y, so both directions move ln r by a
    comparable amount.
    """
    h = settings.BARRIER_FD_STEP if h is None else h
    hx, hy = h, h * y
    u = lambda i, j: barrier_value(profile, x + i * hx, y + j * hy)
    d1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))

    uxx = (-u(2, 0) + 16 * u(1, 0) - 30 * u(0, 0) + 16 * u(-1, 0) - u(-2, 0)) / (12 * hx * hx)
    uyy = (-u(0, 2) + 16 * u(0, 1) - 30 * u(0, 0) + 16 * u(0, -1) - u(0, -2)) / (12 * hy * hy)
    uxy = sum(wi * wj * u(i, j) for i, wi in d1 for j, wj in d1) / (144 * hx * hy)
    return uxx, uxy, uyy


def fd_residual(profile: BarrierProfile, x: float, y: float, h: Optional[float] = None) -> float:
    """|det D^2u - u^p| / u^p with the finite-difference Hessian"""
    uxx, uxy, uyy = fd_hessian(profile, x, y, h)
    u_p = barrier_value(profile, x, y) ** profile.params.p
    return abs(uxx * uyy - uxy * uxy - u_p) / u_p


def interior_grid(profile: BarrierProfile, ny: int = 5, nt: int = 5) -> List[Tuple[float, float]]:
    """(x, y) with y in [0.5, 2] and ln(r/r0) in [0.5, 2.5]"""
    if profile.r0 is None:
        compute_r0(profile)
    b = profile.params.beta
    points = []
    for y in np.linspace(0.5, 2.0, ny):
        for t in np.linspace(0.5, 2.5, nt):
            points.append((math.log(profile.r0) + t - b * math.log(y), float(y)))
    return points


def boundary_approach(profile: BarrierProfile, y: float, ks: Sequence[int] = tuple(range(1, 9))) -> List[float]:
    """u along e^x y^beta = r0 (1 + 10^-k) at fixed y"""
    if profile.r0 is None:
        compute_r0(profile)
    pr = profile.params
    values = []
    for k in ks:
        r = profile.r0 * (1.0 + 10.0 ** (-k))
        values.append(y ** pr.alpha * phi_of_r(profile, r))
    return values


def lemma_checks(profile: BarrierProfile, eps: Optional[float] = None) -> LemmaReport:
    """
    Upper bound zeta^2 <= A1 phi^(4/p) - A2 phi^p for phi >= delta, checked
    in logs where the right side is positive, the lower-bound threshold
    phi_2(eps) and the tail slope.
    """
    pr = profile.params
    k = pr.growth_exponent
    a2 = pr.a2_constant
    delta = profile.delta
    zeta_d = float(zeta_at(profile, delta)[0])
    log_a1 = -k * math.log(delta) + math.log(zeta_d ** 2 + a2 * delta ** pr.p)

    keep = profile.phi_grid >= delta
    phi, zeta = profile.phi_grid[keep], profile.zeta[keep]
    log_phi = np.log(phi)
    ratio = np.exp(math.log(a2) + pr.p * log_phi - log_a1 - k * log_phi)
    positive = ratio < 1.0
    first = float(phi[positive][0]) if np.any(positive) else None
    log_rhs = log_a1 + k * log_phi[positive] + np.log1p(-ratio[positive])
    excess = 2.0 * np.log(zeta[positive]) - log_rhs
    worst = float(excess.max()) if excess.size else float('-inf')

    const = pr.lower_bound_constant
    target = pr.tail_slope_target
    eps = 0.02 * const if eps is None else eps
    below = zeta < (const - eps) * phi
    if not np.any(below):
        threshold = float(phi[0])
    elif below[-1]:
        threshold = None
    else:
        threshold = float(phi[np.nonzero(below)[0][-1] + 1])

    tail = profile.tail_slope if profile.tail_slope is not None else float(zeta[-1] / phi[-1])
    report = LemmaReport(
        upper_bound_ok=worst <= LEMMA_UPPER_RTOL,
        upper_bound_worst=worst,
        upper_bound_first_positive=first,
        lower_bound_constant=const,
        lower_bound_identity_error=abs(const - target) / target,
        lower_bound_threshold=threshold,
        tail_slope=tail,
        tail_slope_target=target,
        tail_slope_error=abs(tail - target) / target,
    )
    if not report.upper_bound_ok:
        logger.warning(f"Upper growth bound exceeded by {worst:.3g} (log scale) for p={pr.p}, beta={pr.beta}")
    if report.tail_slope_error > TAIL_SLOPE_RTOL:
        logger.warning(f"Tail slope {tail:.6g} is {report.tail_slope_error:.2%} from {target:.6g}")
    return report


def build_barrier(
    params: BarrierParams,
    phi_max: Optional[float] = None,
    controls: Optional[IntegratorControls] = None,
) -> BarrierProfile:
    """Seed, continuation and r0 in one call"""
    seed = seed_zeta(params)
    profile = extend_zeta(params, seed, phi_max, controls)
    compute_r0(profile)
    return profile
