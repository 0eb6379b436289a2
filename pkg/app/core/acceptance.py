"""
Acceptance suite

Each criterion returns CheckResult rows; a criterion that raises is
recorded as one failed row named after it.
"""
import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.core.barrier import (
    assemble_solution,
    boundary_approach,
    build_barrier,
    fd_residual,
    interior_grid,
    lemma_checks,
    phi_of_r,
)
from app.core.config import settings
from app.core.entire import extend_entire, fixed_point_seed, monitor_nonincreasing
from app.core.errors import LabError
from app.core.large import (
    FIT_R2_MIN,
    blowup_ladder,
    borderline_demo,
    central_decay_table,
    critical_homogeneity,
    exponent_identity,
    solve_large_on_ball,
)
from app.core.radial_ode import integrate
from app.core.seeding import contraction_factor
from app.core.verification import convexity_report, exact_singular, radial_residual, relative_error
from app.models.problem import BarrierParams, IntegratorControls, ProblemSpec
from app.models.profiles import BarrierProfile
from app.models.reports import CheckResult

logger = logging.getLogger(__name__)

EXACT_CASES = ((2, 0.0), (2, 1.0), (3, 1.0))
EXACT_SPAN = (0.1, 10.0)
EXACT_RTOL = 1e-9
SERIES_NS = (2, 3)
SERIES_PS = (-1.0, 0.0, 0.5, 1.0)
SERIES_A0S = (0.5, 1.0, 2.0)
ENTIRE_PS = (0.5, 1.0, 1.5)
ENTIRE_R_MAX = 100.0
ENTIRE_RESIDUAL = 1e-6
LARGE_CASES = ((2, 3.0), (3, 4.0))
LARGE_EXPONENT_RTOL = 0.05
SCALING_LAMBDAS = (2.0, 4.0, 16.0)
SCALING_RTOL = 0.01
DECAY_RADII = (0.5, 1.0, 2.0, 4.0)
DECAY_SPREAD = 0.01
DECAY_DROP = 1e-2
CRITICAL_A0S = (1.0, 100.0)
CRITICAL_R_MAX = 50.0
CRITICAL_RTOL = 1e-8
BARRIER_PS = (0.125, 0.25, 0.375)
BARRIER_BETAS = (-0.5, -1.0, -2.0)
BARRIER_FD_RTOL = 1e-5
BOUNDARY_ZERO = 1e-10
PHI_R0_OFFSET = 1e-14
IDENTITY_PAIRS = 20
IDENTITY_TOL = 1e-14


def within(name: str, value: float, target: float, tolerance: float, relative: bool = True) -> CheckResult:
    """|value - target| <= tolerance, relative to |target| unless relative is False"""
    error = relative_error(value, target) if relative else abs(value - target)
    return CheckResult(name=name, value=value, target=target, tolerance=tolerance, passed=error <= tolerance)


def at_most(name: str, value: float, tolerance: float) -> CheckResult:
    return CheckResult(name=name, value=value, target=0.0, tolerance=tolerance, passed=value <= tolerance)


def above(name: str, value: float, bound: float) -> CheckResult:
    return CheckResult(name=name, value=value, target=bound, passed=value > bound)


def flag(name: str, ok: bool, value: Optional[float] = None) -> CheckResult:
    return CheckResult(name=name, value=value, passed=bool(ok))


def exact_oracle(cases: Iterable = EXACT_CASES) -> List[CheckResult]:
    """Integrator against u = beta r^alpha on [0.1, 10]"""
    controls = IntegratorControls(rel_tol=1e-13, abs_tol=1e-30, samples=201)
    lo, hi = EXACT_SPAN
    checks = []
    for n, p in cases:
        spec = ProblemSpec(n=n, p=p)
        alpha, beta = exact_singular(spec)
        state0 = (lo, beta * lo ** alpha, alpha * beta * lo ** (alpha - 1.0))
        profile = integrate(spec, state0, hi, controls)
        exact = beta * profile.r ** alpha
        error = float(np.max(np.abs(profile.u - exact) / exact))
        checks.append(at_most(f"exact_oracle[n={n},p={p:g}]", error, EXACT_RTOL))
    return checks


def series_lattice(ns: Sequence[int] = SERIES_NS) -> List[CheckResult]:
    """a2 = a0^(p/n), even seeds, observed contraction and the a4 oracle"""
    worst_a2 = 0.0
    odd_clean = True
    worst_rate = -math.inf
    a4 = None
    for n in ns:
        bound = contraction_factor(n, settings.default_kappa(n)) + settings.SERIES_CONTRACTION_SLACK
        for p in SERIES_PS:
            for a0 in SERIES_A0S:
                seed = fixed_point_seed(ProblemSpec(n=n, p=p), a0)
                worst_a2 = max(worst_a2, relative_error(seed.a2, a0 ** (p / n)))
                odd_clean = odd_clean and bool(np.all(seed.series.coeffs[1::2] == 0.0))
                worst_rate = max(worst_rate, seed.contraction_estimate - bound)
                if (n, p, a0) == (2, 1.0, 1.0):
                    a4 = float(seed.derivative_coefficients()[4])
    checks = [
        at_most("series.a2", worst_a2, 1e-14),
        flag("series.odd_coefficients_zero", odd_clean),
        at_most("series.contraction_over_bound", worst_rate, 0.0),
    ]
    if a4 is not None:
        checks.append(within("series.a4[n=2,p=1,a0=1]", a4, 0.75, 1e-12, relative=False))
    return checks


def entire_existence() -> List[CheckResult]:
    """n = 2 trajectories to r = 100: completed, strictly convex, small residual, E non-increasing"""
    completed = convex = monitor_ok = True
    worst_residual = worst_mismatch = 0.0
    for p in ENTIRE_PS:
        for a0 in SERIES_A0S:
            seed = fixed_point_seed(ProblemSpec(n=2, p=p), a0)
            profile = extend_entire(seed, ENTIRE_R_MAX)
            completed = completed and profile.completed
            convex = convex and convexity_report(profile).strictly_convex
            residual = radial_residual(profile)
            worst_residual = max(worst_residual, residual.max_rel)
            worst_mismatch = max(worst_mismatch, residual.derivative_mismatch)
            monitor_ok = monitor_ok and monitor_nonincreasing(profile, ENTIRE_R_MAX)[0]
    return [
        flag("entire.completed", completed),
        flag("entire.strictly_convex", convex),
        at_most("entire.residual", worst_residual, ENTIRE_RESIDUAL),
        at_most("entire.derivative_consistency", worst_mismatch, ENTIRE_RESIDUAL),
        flag("entire.monitor_nonincreasing", monitor_ok),
    ]


def scaling_checks(spec: ProblemSpec, a0: float = 1.0) -> List[CheckResult]:
    """r_star(lam a0) / r_star(a0) against lam^(-(p-n)/(2n))"""
    reports = blowup_ladder(spec, [a0] + [lam * a0 for lam in SCALING_LAMBDAS])
    base = reports[0].r_star
    return [
        within(
            f"large.scaling[n={spec.n},p={spec.p:g},lam={lam:g}]",
            report.r_star / base,
            lam ** spec.scaling_exponent,
            SCALING_RTOL,
        )
        for lam, report in zip(SCALING_LAMBDAS, reports[1:])
    ]


def large_nonexistence(cases: Iterable = LARGE_CASES) -> List[CheckResult]:
    """Boundary exponent, blow-up scaling and central-value decay for p > n"""
    checks = []
    for n, p in cases:
        spec = ProblemSpec(n=n, p=p)
        tag = f"n={n},p={p:g}"
        fits = [solve_large_on_ball(spec, R) for R in DECAY_RADII]
        unit = fits[DECAY_RADII.index(1.0)]
        checks.append(within(f"large.alpha_fit[{tag}]", unit.alpha_fit, unit.alpha_target, LARGE_EXPONENT_RTOL))
        checks.append(above(f"large.fit_r2[{tag}]", min(f.fit_r2 for f in fits), FIT_R2_MIN))
        checks.extend(scaling_checks(spec))
        table = central_decay_table(spec, DECAY_RADII, fits=fits)
        checks.append(at_most(f"large.decay_spread[{tag}]", table.spread, DECAY_SPREAD))
        drop = table.rows[-1].a_star / table.rows[0].a_star
        checks.append(flag(f"large.decay_monotone[{tag}]", table.monotone and drop < DECAY_DROP, drop))
    return checks


def criticality() -> List[CheckResult]:
    """p = n: no blow-up to r = 50 and exact homogeneity in a0"""
    spec = ProblemSpec(n=2, p=2.0)
    checks = []
    for a0 in CRITICAL_A0S:
        profile = borderline_demo(spec, a0, CRITICAL_R_MAX)
        checks.append(flag(f"critical.completed[a0={a0:g}]", profile.completed, profile.r_end))
    lam = CRITICAL_A0S[1] / CRITICAL_A0S[0]
    deviation = critical_homogeneity(spec, CRITICAL_A0S[0], lam, CRITICAL_R_MAX)
    checks.append(at_most("critical.homogeneity", deviation, CRITICAL_RTOL))
    return checks


def phi_near_r0(profile: BarrierProfile) -> float:
    """phi just past its zero, at r = r0 (1 + PHI_R0_OFFSET)"""
    return phi_of_r(profile, profile.r0 * (1.0 + PHI_R0_OFFSET))


def barrier_case(p: float, beta: float) -> List[CheckResult]:
    """Every barrier invariant for one (p, beta)"""
    params = BarrierParams.build(p=p, beta=beta)
    profile = build_barrier(params)
    pr = profile.params
    tag = f"p={p:g},beta={beta:g}"
    lemma = lemma_checks(profile)
    points = interior_grid(profile)
    samples = assemble_solution(profile, points=points)
    fd_worst = max(fd_residual(profile, x, y) for x, y in points)
    edge = boundary_approach(profile, 1.0)
    return [
        at_most(f"barrier.band[{tag}]", profile.seed.band_margin, 1.0),
        within(f"barrier.tail_slope[{tag}]", lemma.tail_slope, lemma.tail_slope_target, 0.02),
        flag(f"barrier.upper_bound[{tag}]", lemma.upper_bound_ok, lemma.upper_bound_worst),
        at_most(f"barrier.lower_constant_identity[{tag}]", lemma.lower_bound_identity_error, 1e-14),
        flag(f"barrier.r0_in_range[{tag}]", 0.0 < profile.r0 < pr.r1, profile.r0),
        within(f"barrier.phi_r0[{tag}]", phi_near_r0(profile), 0.0, BOUNDARY_ZERO, relative=False),
        flag(
            f"barrier.boundary_zero[{tag}]",
            all(b < a for a, b in zip(edge, edge[1:])) and edge[-1] < BOUNDARY_ZERO,
            edge[-1],
        ),
        at_most(f"barrier.fd_residual[{tag}]", fd_worst, BARRIER_FD_RTOL),
        flag(f"barrier.hessian_psd[{tag}]", all(s.psd for s in samples)),
    ]


def barrier_lattice(ps: Sequence[float] = BARRIER_PS, betas: Sequence[float] = BARRIER_BETAS) -> List[CheckResult]:
    checks = []
    for p in ps:
        for beta in betas:
            checks.extend(barrier_case(p, beta))
    return checks


def exponent_consistency(pairs: int = IDENTITY_PAIRS, seed: int = 0) -> List[CheckResult]:
    """2n/(n-p) + (n+1)/(p-n) = (n-1)/(n-p) on random (n, p), p > n"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        n = int(rng.integers(2, 7))
        p = n + float(rng.uniform(0.1, 5.0))
        lhs, rhs = exponent_identity(n, p)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return [at_most("exponent_identity", worst, IDENTITY_TOL)]


CRITERIA: Dict[int, Callable[[], List[CheckResult]]] = {
    1: exact_oracle,
    2: series_lattice,
    3: entire_existence,
    4: large_nonexistence,
    5: criticality,
    6: barrier_lattice,
    7: exponent_consistency,
}


def run_acceptance(
    criteria: Optional[Iterable[int]] = None,
    table: Optional[Dict[int, Callable[[], List[CheckResult]]]] = None,
) -> List[CheckResult]:
    """Run the selected criteria (all of table by default) and collect their checks"""
    table = CRITERIA if table is None else table
    selected = sorted(criteria) if criteria is not None else sorted(table)
    results: List[CheckResult] = []
    for number in selected:
        if number not in table:
            raise ValueError(f"Unknown acceptance criterion: {number}")
        func = table[number]
        logger.info(f"Acceptance criterion {number}: {func.__name__}")
        try:
            rows = func()
        except LabError as e:
            logger.error(f"Criterion {number} ({func.__name__}) raised {type(e).__name__}: {e}")
            rows = [flag(f"criterion_{number}.{func.__name__}", False)]
        failed = [c.name for c in rows if not c.passed]
        if failed:
            logger.warning(f"Criterion {number} failed checks: {', '.join(failed)}")
        results.extend(rows)
    return results
