"""
Radial integrator for u'' = A u^p (r/u')^(n-1)

Two formulations share one driver: the direct system in (u, u') and the
overflow-safe system in w = log u, v = w' with
w'' + v^2 = A exp((p-n) w) (r/v)^(n-1).
"""
import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp

from app.core.config import settings
from app.core.errors import InputError, InvariantViolation, RegimeError, StiffnessError
from app.core.logging_setup import log_run_event
from app.core.seeding import build_seed, natural_length, shooting_delta
from app.models.problem import IntegratorControls, ProblemSpec
from app.models.profiles import RadialProfile
from app.models.reports import BlowupReport

logger = logging.getLogger(__name__)

State = Tuple[float, float, float]

METHOD = "DOP853"


def _check_state(state0: State) -> None:
    r0, u0, du0 = state0
    if not (r0 > 0 and u0 > 0 and du0 > 0):
        raise InputError(f"integration needs r0, u0, u0' > 0, got {state0}")
    if not all(math.isfinite(v) for v in state0):
        raise InputError(f"initial state must be finite, got {state0}")


def _cap_event(index: int, level: float, terminal: bool) -> Callable:
    def event(r, y):
        return y[index] - level

    event.terminal = terminal
    event.direction = 1.0
    return event


def _sample_grid(
    r0: float,
    r_end: float,
    samples: int,
    grid: Optional[Sequence[float]],
    extra_radii: Optional[Iterable[float]],
) -> np.ndarray:
    """Sample radii in [r0, r_end]: geometric unless a grid is given, always ending at r_end"""
    if grid is None:
        base = np.geomspace(r0, r_end, samples)
    else:
        base = np.asarray(grid, dtype=float)
    parts = [base]
    if extra_radii is not None:
        parts.append(np.asarray(list(extra_radii), dtype=float))
    pts = np.concatenate(parts)
    pts = pts[(pts >= r0) & (pts < r_end)]
    return np.unique(np.append(pts, r_end))


def _drive(
    fun: Callable,
    y0: List[float],
    r0: float,
    r_max: float,
    controls: IntegratorControls,
    cap_index: int,
    cap_level: float,
    ladder: Sequence[Tuple[float, float]],
):
    """
    Run the adaptive integrator with a terminal cap event and optional
    non-terminal ladder events. Returns (solution, r_end, status, crossings).
    """
    events = [_cap_event(cap_index, cap_level, terminal=True)]
    events += [_cap_event(cap_index, level, terminal=False) for _, level in ladder]

    sol = solve_ivp(
        fun,
        (r0, r_max),
        y0,
        method=METHOD,
        rtol=controls.rel_tol,
        atol=controls.abs_tol,
        max_step=controls.max_step,
        events=events,
        dense_output=True,
    )
    if sol.status == -1:
        raise StiffnessError(f"integrator failed at r={sol.t[-1]:.6g}: {sol.message}")

    steps = np.diff(sol.t)
    if steps.size > 1 and steps[:-1].min() < controls.min_step:
        raise StiffnessError(
            f"accepted step {steps[:-1].min():.3e} below minimum {controls.min_step:.3e}"
        )

    crossings: Dict[float, float] = {}
    for (cap, _), t_ev in zip(ladder, sol.t_events[1:]):
        if len(t_ev):
            crossings[cap] = float(t_ev[0])

    if sol.status == 1 and len(sol.t_events[0]):
        r_end = float(sol.t_events[0][0])
        status = "cap_reached"
    else:
        r_end = float(sol.t[-1])
        status = "completed"
    return sol, r_end, status, crossings


def _check_monotone(profile: RadialProfile) -> None:
    """u and u' positive and strictly increasing along the output grid"""
    finite = np.isfinite(profile.u) & np.isfinite(profile.du)
    u, du = profile.u[finite], profile.du[finite]
    if np.any(u <= 0) or np.any(du <= 0):
        raise InvariantViolation("state left positivity along the trajectory")
    if np.any(np.diff(u) <= 0) or np.any(np.diff(du) <= 0):
        raise InvariantViolation("u or u' failed to increase along the trajectory")


def integrate(
    spec: ProblemSpec,
    state0: State,
    r_max: float,
    controls: Optional[IntegratorControls] = None,
    grid: Optional[Sequence[float]] = None,
    extra_radii: Optional[Iterable[float]] = None,
    caps: Optional[Sequence[float]] = None,
) -> RadialProfile:
    """
    Integrate the direct system (u, u') from state0 = (r0, u0, u0') to r_max.

    Stops early with status cap_reached when u reaches controls.value_cap;
    crossings of the optional lower caps are recorded on the profile.
    """
    _check_state(state0)
    controls = controls or IntegratorControls()
    r0, u0, du0 = state0
    if r_max <= r0:
        raise InputError(f"r_max={r_max} must exceed r0={r0}")
    n, p, A = spec.n, spec.p, spec.A

    def rhs(r, y):
        u, du = y
        return [du, A * u ** p * (r / du) ** (n - 1)]

    ladder = [(c, c) for c in sorted(caps or []) if c < controls.value_cap]
    sol, r_end, status, crossings = _drive(
        rhs, [u0, du0], r0, r_max, controls, 0, controls.value_cap, ladder
    )

    r = _sample_grid(r0, r_end, controls.samples, grid, extra_radii)
    u, du = sol.sol(r)
    profile = RadialProfile(
        spec=spec,
        r=r,
        u=u,
        du=du,
        r_end=r_end,
        status=status,
        cap_radii=crossings,
    )
    _check_monotone(profile)
    log_run_event(logger, "integrate", {
        'n': n, 'p': p, 'r0': r0, 'r_end': r_end, 'status': status, 'steps': sol.t.size - 1,
    })
    return profile


def integrate_log(
    spec: ProblemSpec,
    state0: State,
    r_max: float,
    controls: Optional[IntegratorControls] = None,
    grid: Optional[Sequence[float]] = None,
    extra_radii: Optional[Iterable[float]] = None,
    caps: Optional[Sequence[float]] = None,
) -> RadialProfile:
    """
    Integrate in w = log u, v = u'/u; the cap applies to w = log(value_cap).

    The profile stores log_u = w exactly; u and u' are exp(w) and v exp(w),
    +inf where those overflow.
    """
    _check_state(state0)
    controls = controls or IntegratorControls()
    r0, u0, du0 = state0
    if r_max <= r0:
        raise InputError(f"r_max={r_max} must exceed r0={r0}")
    n, p, A = spec.n, spec.p, spec.A
    gap = p - n

    def rhs(r, y):
        w, v = y
        return [v, A * np.exp(gap * w) * (r / v) ** (n - 1) - v * v]

    ladder = [(c, math.log(c)) for c in sorted(caps or []) if c < controls.value_cap]
    sol, r_end, status, crossings = _drive(
        rhs, [math.log(u0), du0 / u0], r0, r_max, controls, 0, controls.log_cap, ladder
    )

    r = _sample_grid(r0, r_end, controls.samples, grid, extra_radii)
    w, v = sol.sol(r)
    with np.errstate(over='ignore'):
        u = np.exp(w)
        du = v * u
    if np.any(v <= 0):
        raise InvariantViolation("log-derivative left positivity along the trajectory")
    profile = RadialProfile(
        spec=spec,
        r=r,
        u=u,
        du=du,
        r_end=r_end,
        status=status,
        log_u=w,
        cap_radii=crossings,
    )
    _check_monotone(profile)
    log_run_event(logger, "integrate_log", {
        'n': n, 'p': p, 'r0': r0, 'r_end': r_end, 'status': status, 'w_end': float(w[-1]),
    })
    return profile


def _extrapolants(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    """
    Intercepts of r = r_star - K x (+ L x^2) from the top cap pair and from
    every run of three consecutive caps.
    """
    out = [(r[-1] * x[-2] - r[-2] * x[-1]) / (x[-2] - x[-1])]
    for i in range(x.size - 2):
        out.append(P.polyfit(x[i:i + 3], r[i:i + 3], 2)[0])
    return np.array(out)


def blowup_radius(
    spec: ProblemSpec,
    a0: float,
    controls: Optional[IntegratorControls] = None,
    caps: Optional[Sequence[float]] = None,
) -> BlowupReport:
    """
    Finite maximal radius of the trajectory with u(0) = a0, p > n.

    The caps are taken relative to a0 (u/a0 crossing each level) and the
    crossing radii are fitted to r(cap) = r_star - K x + L x^2, x = cap^(-1/alpha),
    alpha = (n+1)/(p-n). The report is low-confidence when fewer than three
    caps are given or the extrapolants spread wider than BLOWUP_BRACKET_RTOL * r_star.
    """

    if spec.regime != 'supercritical':
        raise RegimeError(f"no finite blow-up radius expected for p={spec.p} <= n={spec.n}")
    if not a0 > 0:
        raise InputError(f"central value must be positive, got {a0}")
    controls = controls or IntegratorControls()
    levels = sorted(caps or settings.BLOWUP_CAPS)
    if len(levels) < 2:
        raise InputError("blow-up extrapolation needs at least two caps")
    caps_used = [c * a0 for c in levels]

    seed = build_seed(spec, a0, delta=shooting_delta(spec, a0))
    u_d, du_d = seed.state_at(seed.delta)
    r_limit = seed.delta + 1e3 * natural_length(spec, a0)
    profile = integrate(
        spec,
        (seed.delta, u_d, du_d),
        r_limit,
        controls.model_copy(update={'value_cap': caps_used[-1], 'samples': 8}),
        caps=caps_used[:-1],
    )
    if profile.status != 'cap_reached':
        raise InvariantViolation(f"no blow-up before r={r_limit:.6g} for p > n")
    crossings = dict(profile.cap_radii)
    crossings[caps_used[-1]] = profile.r_end
    radii = np.array([crossings[c] for c in caps_used])

    alpha = spec.boundary_exponent
    x = np.array(caps_used) ** (-1.0 / alpha)
    coef = P.polyfit(x, radii, min(2, x.size - 1))
    r_star = float(coef[0])
    residual = radii - P.polyval(x, coef)
    span = float(np.max(r_star - radii))
    misfit = float(np.max(np.abs(residual)) / span) if span > 0 else float('inf')

    candidates = np.append(_extrapolants(x, radii), r_star)
    pad = 1e-9 * abs(r_star)
    bracket = (float(candidates.min() - pad), float(candidates.max() + pad))
    width = bracket[1] - bracket[0]
    low_confidence = (
        misfit > settings.BLOWUP_MISFIT_LIMIT
        or r_star <= radii[-1]
        or x.size < 3
        or width >= settings.BLOWUP_BRACKET_RTOL * abs(r_star)
    )
    if low_confidence:
        logger.warning(
            f"Blow-up extrapolation for n={spec.n}, p={spec.p}, a0={a0:.6g} "
            f"has misfit {misfit:.3g} and bracket width {width:.3g}; r_star flagged low-confidence"
        )

    report = BlowupReport(
        spec=spec,
        a0=a0,
        r_star=r_star,
        bracket=bracket,
        caps_used=caps_used,
        cap_radii=radii.tolist(),
        extrapolation_residual=misfit,
        low_confidence=low_confidence,
    )
    log_run_event(logger, "blowup_radius", {
        'n': spec.n, 'p': spec.p, 'a0': a0, 'r_star': r_star, 'misfit': misfit, 'bracket_width': width,
    })
    return report
