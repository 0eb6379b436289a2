import numpy as np
import pytest

from app.core.entire import (
    extend_entire,
    fixed_point_seed,
    lemma_monitor,
    monitor_nonincreasing,
)
from app.core.errors import ContractionError, InputError, RegimeError
from app.core.large import ordering_check
from app.core.seeding import build_seed, contraction_factor
from app.core.verification import convexity_report, radial_residual
from app.models.problem import ProblemSpec


class TestContractionFactor:
    @pytest.mark.parametrize("n, kappa, expected", [(2, 2, 1 / 3), (3, 2, 2 / 3), (2, 1, 1.0)])
    def test_values(self, n, kappa, expected):
        assert contraction_factor(n, kappa) == pytest.approx(expected)

    def test_boundary_case_rejected(self):
        with pytest.raises(ContractionError):
            fixed_point_seed(ProblemSpec(n=2, p=1.0), 1.0, kappa=1)


class TestFixedPointSeed:
    def test_hand_derived_coefficients(self):
        seed = fixed_point_seed(ProblemSpec(n=2, p=1.0), 1.0, kappa=3)
        a = seed.derivative_coefficients()
        assert a[2] == pytest.approx(1.0, abs=1e-14)
        assert a[4] == pytest.approx(0.75, abs=1e-12)
        assert np.all(seed.series.coeffs[1::2] == 0.0)

    def test_second_derivative_rule(self):
        seed = fixed_point_seed(ProblemSpec(n=2, p=1.0), 4.0)
        assert seed.a2 == pytest.approx(2.0, rel=1e-14)

    def test_exact_local_solution_for_p_zero(self):
        seed = fixed_point_seed(ProblemSpec(n=2, p=0.0), 1.0, kappa=2)
        a = seed.derivative_coefficients()
        assert a[2] == pytest.approx(1.0)
        assert a[4] == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("p", [-1.0, 0.0, 0.5, 1.0])
    def test_observed_contraction(self, n, p):
        seed = fixed_point_seed(ProblemSpec(n=n, p=p), 2.0)
        assert seed.contraction_estimate <= contraction_factor(n, seed.kappa) + 0.05
        assert seed.series.is_even()
        assert seed.residual < 1e-12

    def test_regime_gate(self):
        with pytest.raises(RegimeError):
            fixed_point_seed(ProblemSpec(n=2, p=2.0), 1.0)

    def test_delta_range(self):
        with pytest.raises(InputError):
            fixed_point_seed(ProblemSpec(n=2, p=1.0), 1.0, delta=1.5)

    def test_build_seed_has_no_regime_gate(self):
        seed = build_seed(ProblemSpec(n=2, p=3.0), 1.0, delta=0.01)
        assert seed.a2 == pytest.approx(1.0)


class TestExtendEntire:
    def test_reaches_outer_radius(self, subcritical):
        profile = extend_entire(fixed_point_seed(subcritical, 1.0), 100.0)
        assert profile.completed
        assert np.isfinite(profile.u[-1])
        assert convexity_report(profile).strictly_convex
        assert radial_residual(profile).max_rel < 1e-6
        assert profile.handoff_jump < 1e-9
        assert profile.seed.truncation_check < 1e-8

    def test_quadratic_solution(self):
        profile = extend_entire(fixed_point_seed(ProblemSpec(n=2, p=0.0), 1.0), 10.0)
        np.testing.assert_allclose(profile.u, 1 + profile.r ** 2 / 2, rtol=1e-8)

    def test_larger_center_dominates(self, subcritical):
        lo = extend_entire(fixed_point_seed(subcritical, 1.0), 100.0)
        hi = extend_entire(fixed_point_seed(subcritical, 2.0), 100.0)
        assert ordering_check(subcritical, lo, hi)
        assert not ordering_check(subcritical, hi, lo)

    def test_r_max_must_exceed_delta(self, subcritical):
        with pytest.raises(InputError):
            extend_entire(fixed_point_seed(subcritical, 1.0), 0.01)


class TestLemmaMonitor:
    @pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
    def test_nonincreasing(self, p):
        profile = extend_entire(fixed_point_seed(ProblemSpec(n=2, p=p), 1.0), 100.0)
        ok, worst = monitor_nonincreasing(profile, 100.0)
        assert ok, worst

    def test_log_potential_for_p_minus_one(self):
        profile = extend_entire(fixed_point_seed(ProblemSpec(n=2, p=-1.0), 1.0), 10.0)
        r, energy = lemma_monitor(profile, 10.0)
        assert r[0] >= profile.handoff_radius
        assert np.all(np.isfinite(energy))
