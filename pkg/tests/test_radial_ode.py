import numpy as np
import pytest

from app.core.entire import fixed_point_seed
from app.core.errors import InputError, RegimeError
from app.core.radial_ode import blowup_radius, integrate, integrate_log
from app.core.seeding import build_seed, shooting_delta
from app.models.problem import IntegratorControls, ProblemSpec


def test_exact_singular_solution(tight_controls):
    spec = ProblemSpec(n=2, p=1.0)
    profile = integrate(spec, (1.0, 1 / 48, 4 / 48), 4.0, tight_controls)
    assert profile.completed
    assert profile.r_end == pytest.approx(4.0)
    assert profile.u[-1] == pytest.approx(16 / 3, rel=1e-9)


def test_quadratic_solution_for_p_zero(tight_controls):
    spec = ProblemSpec(n=2, p=0.0)
    profile = integrate(spec, (1.0, 1.5, 1.0), 10.0, tight_controls)
    np.testing.assert_allclose(profile.u, 1 + profile.r ** 2 / 2, rtol=1e-9)
    np.testing.assert_allclose(profile.du, profile.r, rtol=1e-9)


def test_supercritical_reaches_cap():
    spec = ProblemSpec(n=2, p=3.0)
    seed = build_seed(spec, 1.0, delta=shooting_delta(spec, 1.0))
    u, du = seed.state_at(seed.delta)
    profile = integrate(spec, (seed.delta, u, du), 100.0)
    assert profile.status == "cap_reached"
    assert profile.r_end < 100.0
    assert profile.u[-1] == pytest.approx(IntegratorControls().value_cap, rel=1e-6)


def test_bad_initial_state_rejected():
    spec = ProblemSpec(n=2, p=1.0)
    with pytest.raises(InputError):
        integrate(spec, (0.0, 1.0, 1.0), 1.0)
    with pytest.raises(InputError):
        integrate(spec, (1.0, 1.0, -1.0), 2.0)
    with pytest.raises(InputError):
        integrate(spec, (1.0, 1.0, 1.0), 0.5)


def test_log_formulation_agrees_with_direct():
    spec = ProblemSpec(n=2, p=1.0)
    seed = fixed_point_seed(spec, 1.0)
    u, du = seed.state_at(seed.delta)
    controls = IntegratorControls(rel_tol=1e-12, abs_tol=1e-14, samples=200)
    direct = integrate(spec, (seed.delta, u, du), 20.0, controls)
    logged = integrate_log(spec, (seed.delta, u, du), 20.0, controls)
    np.testing.assert_allclose(logged.r, direct.r)
    np.testing.assert_allclose(logged.u, direct.u, rtol=1e-8)
    np.testing.assert_allclose(logged.log_u, np.log(direct.u), atol=1e-8)


def test_log_formulation_caps_at_same_radius():
    spec = ProblemSpec(n=2, p=3.0)
    seed = build_seed(spec, 1.0, delta=shooting_delta(spec, 1.0))
    u, du = seed.state_at(seed.delta)
    controls = IntegratorControls(rel_tol=1e-12, abs_tol=1e-14, samples=50)
    direct = integrate(spec, (seed.delta, u, du), 100.0, controls)
    logged = integrate_log(spec, (seed.delta, u, du), 100.0, controls)
    assert logged.status == direct.status == "cap_reached"
    assert logged.r_end == pytest.approx(direct.r_end, rel=1e-8)


def test_critical_trajectory_completes():
    spec = ProblemSpec(n=2, p=2.0)
    seed = build_seed(spec, 1.0, delta=shooting_delta(spec, 1.0))
    u, du = seed.state_at(seed.delta)
    controls = IntegratorControls(value_cap=1e300, samples=100)
    profile = integrate_log(spec, (seed.delta, u, du), 50.0, controls)
    assert profile.completed


def test_extra_radii_are_sampled():
    spec = ProblemSpec(n=2, p=0.0)
    extra = [1.2345, 2.5]
    profile = integrate(spec, (1.0, 1.5, 1.0), 3.0, IntegratorControls(samples=10), extra_radii=extra)
    for r in extra:
        assert np.any(np.isclose(profile.r, r, rtol=0, atol=0))


class TestBlowupRadius:
    def test_finite_and_bracketed(self):
        report = blowup_radius(ProblemSpec(n=2, p=3.0), 1.0)
        assert np.isfinite(report.r_star)
        assert report.bracket[0] <= report.r_star <= report.bracket[1]
        assert not report.low_confidence
        assert report.bracket_width < 1e-6 * report.r_star
        assert report.cap_radii == sorted(report.cap_radii)
        assert report.cap_radii[-1] < report.r_star

    def test_scaling_law(self):
        spec = ProblemSpec(n=2, p=3.0)
        base = blowup_radius(spec, 1.0).r_star
        scaled = blowup_radius(spec, 16.0).r_star
        assert scaled == pytest.approx(0.5 * base, rel=5e-3)

    def test_larger_exponent_blows_up_sooner(self):
        r_25 = blowup_radius(ProblemSpec(n=2, p=2.5), 1.0).r_star
        r_3 = blowup_radius(ProblemSpec(n=2, p=3.0), 1.0).r_star
        assert r_25 > r_3

    def test_regime_gate(self):
        with pytest.raises(RegimeError):
            blowup_radius(ProblemSpec(n=2, p=2.0), 1.0)

    def test_needs_two_caps(self):
        with pytest.raises(InputError):
            blowup_radius(ProblemSpec(n=2, p=3.0), 1.0, caps=[1e6])

    def test_low_caps_flag_wide_bracket(self):
        report = blowup_radius(ProblemSpec(n=2, p=3.0), 1.0, caps=[1e2, 1e3, 1e4])
        assert report.bracket[0] <= report.r_star <= report.bracket[1]
        assert report.bracket_width >= 1e-6 * report.r_star
        assert report.low_confidence

    def test_two_caps_are_low_confidence(self):
        assert blowup_radius(ProblemSpec(n=2, p=3.0), 1.0, caps=[1e10, 1e12]).low_confidence
