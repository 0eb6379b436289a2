import numpy as np
import pytest

from app.core.errors import InputError, RegimeError
from app.core.large import (
    blowup_ladder,
    borderline_demo,
    boundary_constant,
    central_decay_table,
    critical_homogeneity,
    exponent_identity,
    ordering_check,
    solve_large_on_ball,
)
from app.core.radial_ode import integrate_log
from app.core.seeding import build_seed, shooting_delta
from app.models.problem import ProblemSpec


@pytest.fixture(scope="module")
def unit_ball_fit():
    return solve_large_on_ball(ProblemSpec(n=2, p=3.0), 1.0)


def test_exponent_identity_example():
    lhs, rhs = exponent_identity(2, 3.0)
    assert lhs == pytest.approx(-1.0, abs=1e-14)
    assert rhs == pytest.approx(-1.0, abs=1e-14)


def test_exponent_identity_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        p = n + rng.uniform(0.1, 5.0)
        lhs, rhs = exponent_identity(n, p)
        assert abs(lhs - rhs) <= 1e-14 * max(1.0, abs(rhs))


def test_exponent_identity_undefined_at_critical():
    with pytest.raises(InputError):
        exponent_identity(2, 2.0)


def test_boundary_constant_solves_leading_balance():
    spec = ProblemSpec(n=2, p=3.0)
    R = 1.5
    C = boundary_constant(spec, R)
    alpha = spec.boundary_exponent
    # C (R-r)^-alpha in u'' (u'/R)^(n-1) = u^p at leading order
    lhs = alpha * (alpha + 1) * C * (alpha * C / R) ** (spec.n - 1)
    assert lhs == pytest.approx(C ** spec.p, rel=1e-12)


class TestLargeOnBall:
    @pytest.mark.slow
    def test_boundary_exponent(self, unit_ball_fit):
        assert unit_ball_fit.alpha_target == pytest.approx(3.0)
        assert unit_ball_fit.alpha_fit == pytest.approx(3.0, rel=0.05)
        assert unit_ball_fit.fit_r2 > 0.999
        assert unit_ball_fit.r_star == pytest.approx(1.0, rel=1e-3)
        assert unit_ball_fit.a_bracket[0] <= unit_ball_fit.a_star <= unit_ball_fit.a_bracket[1]

    @pytest.mark.slow
    def test_higher_dimension_exponent(self):
        fit = solve_large_on_ball(ProblemSpec(n=3, p=4.0), 1.0)
        assert fit.alpha_fit == pytest.approx(4.0, rel=0.05)

    @pytest.mark.slow
    def test_dominates_smaller_center_trajectory(self, unit_ball_fit):
        spec = unit_ball_fit.spec
        a0 = 0.5 * unit_ball_fit.a_star
        seed = build_seed(spec, a0, delta=shooting_delta(spec, a0))
        u, du = seed.state_at(seed.delta)
        lower = integrate_log(spec, (seed.delta, u, du), 1.0)
        assert ordering_check(spec, lower, unit_ball_fit.profile)

    def test_regime_gate(self):
        with pytest.raises(RegimeError):
            solve_large_on_ball(ProblemSpec(n=2, p=1.0), 1.0)

    def test_positive_radius(self):
        with pytest.raises(InputError):
            solve_large_on_ball(ProblemSpec(n=2, p=3.0), 0.0)


@pytest.mark.slow
def test_central_decay_table():
    spec = ProblemSpec(n=2, p=3.0)
    table = central_decay_table(spec, [0.5, 1.0, 2.0, 4.0])
    assert table.scaling_power == pytest.approx(4.0)
    assert table.spread < 0.01
    assert table.monotone
    assert table.rows[-1].a_star < 1e-2 * table.rows[0].a_star


def test_decay_table_needs_increasing_radii():
    with pytest.raises(InputError):
        central_decay_table(ProblemSpec(n=2, p=3.0), [2.0, 1.0])


def test_blowup_ladder_decreasing():
    reports = blowup_ladder(ProblemSpec(n=2, p=3.0), [1.0, 2.0, 4.0])
    radii = [r.r_star for r in reports]
    assert radii == sorted(radii, reverse=True)


class TestCritical:
    @pytest.mark.parametrize("a0", [1.0, 100.0])
    def test_no_blowup(self, a0):
        profile = borderline_demo(ProblemSpec(n=2, p=2.0), a0, 50.0)
        assert profile.completed
        assert profile.r_end == pytest.approx(50.0)

    def test_homogeneity(self):
        deviation = critical_homogeneity(ProblemSpec(n=2, p=2.0), 1.0, 10.0, 50.0)
        assert deviation < 1e-8

    def test_regime_gate(self):
        with pytest.raises(RegimeError):
            borderline_demo(ProblemSpec(n=2, p=3.0), 1.0, 10.0)


def test_ordering_identical_profiles():
    spec = ProblemSpec(n=2, p=2.0)
    profile = borderline_demo(spec, 1.0, 10.0)
    assert ordering_check(spec, profile, profile)
