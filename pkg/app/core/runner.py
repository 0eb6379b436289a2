"""
Experiment orchestration: one run per RunConfig, concurrent sweeps
"""
import asyncio
import logging
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from app.core import acceptance
from app.core.acceptance import above, at_most, flag, phi_near_r0, within
from app.core.barrier import (
    assemble_solution,
    boundary_approach,
    build_barrier,
    fd_residual,
    interior_grid,
    lemma_checks,
)
from app.core.config import settings
from app.core.entire import extend_entire, fixed_point_seed, monitor_nonincreasing
from app.core.large import (
    FIT_R2_MIN,
    borderline_demo,
    central_decay_table,
    critical_homogeneity,
    exponent_identity,
    solve_large_on_ball,
)
from app.core.logging_setup import log_run_event
from app.core.reporting import write_plot, write_summary, write_table
from app.core.seeding import contraction_factor
from app.core.verification import convexity_report, radial_residual
from app.models.reports import CheckResult, RunSummary
from app.models.run_config import RunConfig

logger = logging.getLogger(__name__)

CRITICAL_SCALE = 100.0


@dataclass
class RunOutcome:
    """Summary and artifact paths of one run"""
    config: RunConfig
    summary: RunSummary
    run_dir: Path
    artifacts: List[Path] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.summary.passed else 1


class _Clock:
    """Wall-clock timings, recorded only when RECORD_TIMINGS is set"""

    def __init__(self):
        self.timings: Dict[str, float] = {}

    def __call__(self, name: str, func: Callable, *args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        if settings.RECORD_TIMINGS:
            self.timings[name] = time.perf_counter() - start
        return result


def _run_entire(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    spec = config.spec
    kappa = config.resolved_kappa()
    seed = clock("seed", fixed_point_seed, spec, config.a0, kappa=kappa)
    profile = clock("extend", extend_entire, seed, config.r_max)
    residual = radial_residual(profile, label="entire")
    convexity = convexity_report(profile)
    monitor_ok, monitor_worst = monitor_nonincreasing(profile, config.r_max)
    factor = contraction_factor(spec.n, kappa)

    results = [
        flag("completed", profile.completed, profile.r_end),
        within("a2", seed.a2, (spec.A * config.a0 ** spec.p) ** (1.0 / spec.n), 1e-14),
        flag("odd_coefficients_zero", bool(np.all(seed.series.coeffs[1::2] == 0.0))),
        at_most("contraction", seed.contraction_estimate, factor + settings.SERIES_CONTRACTION_SLACK),
        at_most("residual", residual.max_rel, acceptance.ENTIRE_RESIDUAL),
        at_most("derivative_consistency", residual.derivative_mismatch, acceptance.ENTIRE_RESIDUAL),
        flag("strictly_convex", convexity.strictly_convex, convexity.min_relative_curvature),
        flag("monitor_nonincreasing", monitor_ok, monitor_worst),
    ]
    artifacts = [
        write_table(run_dir, "profile", ["r", "u", "du"], profile.rows(), config.output_format)
    ]
    if config.plot:
        artifacts.append(write_plot(
            run_dir, "profile", [("u", profile.r, profile.u)], "r", "u",
            title=f"entire n={spec.n}, p={spec.p:g}, a0={config.a0:g}", loglog=True,
        ))
    extra = {
        'a0': config.a0,
        'kappa': kappa,
        'seed_iterations': seed.iterations,
        'contraction_estimate': seed.contraction_estimate,
        'contraction_factor': factor,
        'handoff_radius': seed.delta,
        'handoff_jump': profile.handoff_jump,
        'truncation_check': seed.truncation_check,
        'r_end': profile.r_end,
        'status': profile.status,
    }
    return RunSummary(config=config.echo(), results=results, residuals=[residual], extra=extra), artifacts


def _run_borderline(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    spec = config.spec
    profile = clock("borderline", borderline_demo, spec, config.a0, config.r_max)
    deviation = clock("homogeneity", critical_homogeneity, spec, config.a0, CRITICAL_SCALE, config.r_max)
    results = [
        flag("completed", profile.completed, profile.r_end),
        at_most("homogeneity", deviation, acceptance.CRITICAL_RTOL),
    ]
    rows = [[r, w, du] for r, w, du in zip(profile.r, profile.log_values(), profile.du)]
    artifacts = [write_table(run_dir, "profile", ["r", "log_u", "du"], rows, config.output_format)]
    if config.plot:
        artifacts.append(write_plot(
            run_dir, "profile", [("log u", profile.r, profile.log_values())], "r", "log u",
            title=f"critical n={spec.n}, a0={config.a0:g}", logx=True,
        ))
    extra = {'a0': config.a0, 'scale': CRITICAL_SCALE, 'r_end': profile.r_end, 'status': profile.status}
    return RunSummary(config=config.echo(), results=results, extra=extra), artifacts


def _run_large(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    spec = config.spec
    if spec.regime == 'critical':
        return _run_borderline(config, run_dir, clock)

    fits = [clock(f"solve_R{R:g}", solve_large_on_ball, spec, R) for R in config.R]
    lhs, rhs = exponent_identity(spec.n, spec.p)
    results = [within("exponent_identity", lhs, rhs, acceptance.IDENTITY_TOL)]
    for fit in fits:
        results.append(within(
            f"alpha_fit[R={fit.R:g}]", fit.alpha_fit, fit.alpha_target, acceptance.LARGE_EXPONENT_RTOL
        ))
        results.append(above(f"fit_r2[R={fit.R:g}]", fit.fit_r2, FIT_R2_MIN))
    results.extend(acceptance.scaling_checks(spec, config.a0))

    power = 2.0 * spec.n / (spec.p - spec.n)
    extra: Dict[str, Any] = {'fits': [f.model_dump(mode='json') for f in fits]}
    if len(fits) > 1:
        table = central_decay_table(spec, config.R, fits=fits)
        results.append(at_most("decay_spread", table.spread, acceptance.DECAY_SPREAD))
        results.append(flag("decay_monotone", table.monotone))
        extra['decay_table'] = table.model_dump(mode='json')

    rows = [
        [f.R, f.a_star, f.a_star * f.R ** power, f.r_star, f.alpha_fit, f.alpha_target, f.fit_r2]
        for f in fits
    ]
    columns = ["R", "a_star", "product", "r_star", "alpha_fit", "alpha_target", "fit_r2"]
    artifacts = [write_table(run_dir, "decay", columns, rows, config.output_format)]
    if config.plot:
        first = fits[0]
        d = first.r_star - first.profile.r
        keep = (d >= first.fit_window[0]) & (d <= first.fit_window[1])
        u = np.exp(first.profile.log_values()[keep])
        ref_y = first.asymptotic_constant * d[keep] ** (-first.alpha_target)
        artifacts.append(write_plot(
            run_dir, "boundary_fit", [("u", d[keep], u)], "R - r", "u",
            title=f"large n={spec.n}, p={spec.p:g}, R={first.R:g}", loglog=True,
            reference={'x': d[keep], 'y': ref_y, 'label': f"slope -{first.alpha_target:.4g}"},
        ))
    return RunSummary(config=config.echo(), results=results, extra=extra), artifacts


def _run_barrier(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    params = config.barrier_params()
    profile = clock("build", build_barrier, params, config.phi_max)
    pr = profile.params
    lemma = lemma_checks(profile)
    points = interior_grid(profile)
    samples = assemble_solution(profile, points=points)
    fd = [fd_residual(profile, x, y) for x, y in points]
    edge = boundary_approach(profile, 1.0)

    results = [
        at_most("band", profile.seed.band_margin, 1.0),
        within("tail_slope", lemma.tail_slope, lemma.tail_slope_target, 0.02),
        flag("upper_bound", lemma.upper_bound_ok, lemma.upper_bound_worst),
        at_most("lower_constant_identity", lemma.lower_bound_identity_error, 1e-14),
        flag("r0_in_range", 0.0 < profile.r0 < pr.r1, profile.r0),
        within("phi_r0", phi_near_r0(profile), 0.0, acceptance.BOUNDARY_ZERO, relative=False),
        flag(
            "boundary_zero",
            all(b < a for a, b in zip(edge, edge[1:])) and edge[-1] < acceptance.BOUNDARY_ZERO,
            edge[-1],
        ),
        at_most("fd_residual", max(fd), acceptance.BARRIER_FD_RTOL),
        flag("hessian_psd", all(s.psd for s in samples)),
    ]
    r = profile.r_of_phi
    rows = [[a, b, c, d] for a, b, c, d in zip(profile.phi_grid, profile.zeta, profile.lam, r)]
    artifacts = [write_table(run_dir, "zeta", ["phi", "zeta", "lambda", "r"], rows, config.output_format)]
    if config.plot:
        artifacts.append(write_plot(
            run_dir, "zeta_slope", [("zeta/phi", profile.phi_grid, profile.zeta / profile.phi_grid)],
            "phi", "zeta / phi", title=f"barrier p={pr.p:g}, beta={pr.beta:g}", logx=True,
            reference={
                'x': [profile.phi_grid[0], profile.phi_max],
                'y': [pr.tail_slope_target] * 2,
                'label': "alpha/|beta|",
            },
        ))
    extra = {
        'alpha': pr.alpha,
        'gamma_beta': pr.gamma_beta,
        'delta': pr.delta,
        'halvings': profile.seed.halvings,
        'seed_iterations': profile.seed.iterations,
        'r0': profile.r0,
        'lemma': lemma.model_dump(mode='json'),
        'boundary_approach': edge,
        'samples': [s.model_dump(mode='json') for s in samples],
        'fd_residuals': fd,
    }
    return RunSummary(config=config.echo(), results=results, extra=extra), artifacts


def _run_verify(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    cases = [(config.n, p) for p in (0.0, 1.0)]
    results = clock("exact", acceptance.exact_oracle, cases)
    results += clock("series", acceptance.series_lattice, [config.n])
    return _checks_summary(config, run_dir, results)


def _run_accept(config: RunConfig, run_dir: Path, clock: _Clock) -> Tuple[RunSummary, List[Path]]:
    results = clock("acceptance", acceptance.run_acceptance, config.criteria, ACCEPTANCE_CRITERIA)
    return _checks_summary(config, run_dir, results)


def _checks_summary(config: RunConfig, run_dir: Path, results: List[CheckResult]) -> Tuple[RunSummary, List[Path]]:
    rows = [[c.name, c.value, c.target, c.tolerance, c.passed] for c in results]
    columns = ["name", "value", "target", "tolerance", "pass"]
    artifacts = [write_table(run_dir, "checks", columns, rows, config.output_format)]
    return RunSummary(config=config.echo(), results=results), artifacts


COMMANDS = {
    'entire': _run_entire,
    'large': _run_large,
    'barrier': _run_barrier,
    'verify': _run_verify,
    'accept': _run_accept,
}


def run(config: RunConfig) -> RunOutcome:
    """Execute one non-sweep command and write its artifacts under output_dir/label"""
    if config.command == 'sweep':
        return asyncio.run(run_sweep(config))
    run_dir = config.get_output_dir() / config.run_label()
    clock = _Clock()
    summary, artifacts = COMMANDS[config.command](config, run_dir, clock)
    summary.timings = clock.timings
    artifacts.append(write_summary(run_dir, summary))
    log_run_event(logger, f"run {config.command}", {
        'label': config.run_label(), 'checks': len(summary.results), 'failed': len(summary.failures()),
    })
    for name in summary.failures():
        logger.warning(f"Check failed: {name}")
    return RunOutcome(config=config, summary=summary, run_dir=run_dir, artifacts=artifacts)


async def run_sweep(config: RunConfig) -> RunOutcome:
    """
    Fan the swept values out as independent runs, at most
    MAX_CONCURRENT_RUNS at a time, each in a worker thread.
    """
    run_dir = config.get_output_dir() / config.run_label()
    semaphore = asyncio.Semaphore(settings.MAX_CONCURRENT_RUNS)
    variants = [
        v.model_copy(update={'output_dir': str(run_dir)}) for v in config.sweep_variants()
    ]

    async def one(variant: RunConfig) -> RunOutcome:
        async with semaphore:
            logger.info(f"Sweep run started: {variant.run_label()}")
            outcome = await asyncio.to_thread(run, variant)
            logger.info(f"Sweep run finished: {variant.run_label()} (exit {outcome.exit_code})")
            return outcome

    outcomes = await asyncio.gather(*(one(v) for v in variants))

    results = [
        c.model_copy(update={'name': f"{o.config.run_label()}.{c.name}"})
        for o in outcomes for c in o.summary.results
    ]
    residuals = [r for o in outcomes for r in o.summary.residuals]
    summary = RunSummary(
        config=config.echo(),
        results=results,
        residuals=residuals,
        extra={'runs': [o.config.run_label() for o in outcomes]},
    )
    artifacts = [a for o in outcomes for a in o.artifacts]
    artifacts.append(write_summary(run_dir, summary))
    return RunOutcome(config=config, summary=summary, run_dir=run_dir, artifacts=artifacts)


DETERMINISM_RUNS = (
    {'command': 'entire', 'n': 2, 'p': 1.0, 'a0': 1.0, 'r_max': 100.0},
    {'command': 'large', 'n': 2, 'p': 3.0, 'R': [1.0]},
    {'command': 'barrier', 'p': 0.25, 'beta': -1.0},
    {'command': 'verify', 'n': 2},
)


def determinism(runs: Sequence[Dict] = DETERMINISM_RUNS) -> List[CheckResult]:
    """Two runs of each command produce byte-identical artifacts"""
    checks = []
    with tempfile.TemporaryDirectory() as tmp:
        for data in runs:
            outputs = []
            for attempt in ("first", "second"):
                config = RunConfig(**data, output_dir=str(Path(tmp) / attempt), plot=True)
                outcome = run(config)
                outputs.append({p.name: p.read_bytes() for p in outcome.artifacts})
            same = outputs[0] == outputs[1]
            if not same:
                differing = sorted(k for k in outputs[0] if outputs[0].get(k) != outputs[1].get(k))
                logger.error(f"Non-reproducible artifacts for {data['command']}: {differing}")
            checks.append(flag(f"determinism[{data['command']}]", same))
    return checks


ACCEPTANCE_CRITERIA = {**acceptance.CRITERIA, 8: determinism}
