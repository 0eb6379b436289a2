import dataclasses
import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core import barrier
from app.core.barrier import (
    _apply_seed_map,
    _seed_lambda,
    assemble_solution,
    boundary_approach,
    build_barrier,
    compute_r0,
    fd_residual,
    interior_grid,
    lambda_at,
    lemma_checks,
    phi_of_r,
    recover_phi,
    seed_zeta,
    zeta_at,
)
from app.core.errors import BandViolationError, DomainError
from app.models.problem import BarrierParams


class TestParams:
    def test_gamma_values(self):
        assert BarrierParams.build(0.25, -1.0).gamma_beta == pytest.approx(2.4 ** (1 / 3))
        assert BarrierParams.build(0.25, -1.0).gamma_beta == pytest.approx(1.33887, abs=1e-5)
        assert BarrierParams.build(0.25, -2.0).gamma_beta == pytest.approx(1.06266, abs=1e-5)

    def test_derived_constants(self, barrier_params):
        assert barrier_params.alpha == pytest.approx(8 / 7)
        assert barrier_params.a2_constant == pytest.approx(7 / 9)
        assert barrier_params.growth_exponent == pytest.approx(16.0)
        assert barrier_params.band_ratio == pytest.approx(2 * 1.25 / 3)

    @pytest.mark.parametrize("p", [0.125, 0.25, 0.375])
    @pytest.mark.parametrize("beta", [-0.5, -1.0, -2.0])
    def test_lower_bound_constant_identity(self, p, beta):
        params = BarrierParams.build(p, beta)
        assert params.lower_bound_constant == pytest.approx(params.tail_slope_target, rel=1e-14)

    @pytest.mark.parametrize("kwargs", [
        {'p': 0.6, 'beta': -1.0},
        {'p': 0.0, 'beta': -1.0},
        {'p': 0.25, 'beta': 0.5},
        {'p': 0.25, 'beta': -1.0, 'q': 0.3},
        {'p': 0.25, 'beta': -1.0, 'q': 1.0},
    ])
    def test_rejected(self, kwargs):
        with pytest.raises((ValidationError, ValueError)):
            BarrierParams.build(**kwargs)

    def test_with_delta_moves_tied_phi1(self, barrier_params):
        halved = barrier_params.with_delta(0.5 * barrier_params.delta)
        assert halved.phi1 == halved.delta


class TestSeed:
    def test_band(self, barrier_profile):
        seed = barrier_profile.seed
        assert seed.band_margin <= 1.0
        phi = 0.5 * seed.params.delta
        dev = abs(float(seed.zeta(phi)) - float(seed.leading(phi)))
        assert dev < phi ** 0.9

    def test_leading_behaviour(self, barrier_profile):
        seed = barrier_profile.seed
        gamma = seed.params.gamma_beta
        errors = [abs(float(seed.zeta(10.0 ** -k)) / 10.0 ** (-k * 5 / 12) - gamma) for k in range(4, 13)]
        assert errors == sorted(errors, reverse=True)
        assert errors[-1] < 1e-5 * gamma

    def test_is_fixed_point(self, barrier_profile):
        seed = barrier_profile.seed
        nodes = np.linspace(0.05, 1.0, 7) * seed.s_delta
        mapped = _apply_seed_map(seed.params, seed.H, nodes)
        np.testing.assert_allclose(mapped, seed.H(nodes), rtol=1e-9)

    def test_history_decreases(self, barrier_profile):
        history = barrier_profile.seed.history
        assert history[-1] < 1e-12
        assert history[-1] < history[0]

    def test_halves_delta_on_band_violation(self, monkeypatch):
        params = BarrierParams.build(0.25, -1.0)
        real = barrier.band_margin

        def strict(pr, H):
            return 2.0 if pr.delta > 0.75 * params.delta else real(pr, H)

        monkeypatch.setattr(barrier, "band_margin", strict)
        seed = seed_zeta(params)
        assert seed.halvings == 1
        assert seed.params.delta == pytest.approx(0.5 * params.delta)

    def test_gives_up_after_max_halvings(self, monkeypatch):
        monkeypatch.setattr(barrier, "band_margin", lambda pr, H: 2.0)
        with pytest.raises(BandViolationError):
            seed_zeta(BarrierParams.build(0.25, -1.0))


class TestProfile:
    def test_positive_increasing(self, barrier_profile):
        assert np.all(barrier_profile.zeta > 0)
        assert np.all(np.diff(barrier_profile.zeta) > 0)
        assert np.all(np.diff(barrier_profile.lam) > 0)

    def test_tail_slope(self, barrier_profile):
        assert barrier_profile.phi_max == pytest.approx(1e4)
        assert barrier_profile.tail_slope == pytest.approx(8 / 7, rel=0.02)

    def test_seed_and_continuation_meet(self, barrier_profile):
        delta = barrier_profile.delta
        below = float(zeta_at(barrier_profile, delta * (1 - 1e-9))[0])
        above = float(zeta_at(barrier_profile, delta * (1 + 1e-9))[0])
        assert above == pytest.approx(below, rel=1e-7)

    def test_growth_bound_checks(self, barrier_profile):
        report = lemma_checks(barrier_profile)
        assert report.upper_bound_ok
        assert report.upper_bound_first_positive == pytest.approx(barrier_profile.delta)
        assert report.lower_bound_identity_error < 1e-14
        assert report.lower_bound_threshold is not None
        assert report.tail_slope_error < 0.02


class TestRadius:
    def test_r0_in_range(self, barrier_profile, barrier_params):
        assert 0.0 < barrier_profile.r0 < barrier_params.r1

    def test_r0_consistent_across_normalisations(self, barrier_profile, barrier_params):
        seed = barrier_profile.seed
        half = 0.5 * barrier_params.delta
        r_half = barrier_profile.r0 * math.exp(float(_seed_lambda(seed)(seed.s_of(half))))
        moved = barrier_params.model_copy(update={'phi1': half, 'r1': r_half})
        copy = dataclasses.replace(barrier_profile)
        assert compute_r0(copy, moved) == pytest.approx(barrier_profile.r0, rel=1e-6)

    def test_phi_at_ends(self, barrier_profile, barrier_params):
        assert phi_of_r(barrier_profile, barrier_profile.r0) == pytest.approx(0.0, abs=1e-10)
        assert phi_of_r(barrier_profile, barrier_params.r1) == pytest.approx(barrier_params.phi1, rel=1e-8)

    def test_tail_growth(self, barrier_profile):
        # zeta ~ (alpha/|beta|) phi, so phi grows like r^(alpha/|beta|)
        r_big = barrier_profile.r0 * math.exp(lambda_at(barrier_profile, 600.0))
        ratio = phi_of_r(barrier_profile, 10 * r_big) / phi_of_r(barrier_profile, r_big)
        assert math.log10(ratio) == pytest.approx(8 / 7, rel=0.05)

    def test_recover_phi(self, barrier_profile):
        r_grid = barrier_profile.r0 * np.array([1.0, 1.001, 1.1, 2.0, 10.0])
        recovered = recover_phi(barrier_profile, r_grid=r_grid)
        assert recovered.phi_of_r[0] == 0.0
        assert np.all(np.diff(recovered.phi_of_r) > 0)

    def test_below_r0_rejected(self, barrier_profile):
        with pytest.raises(DomainError):
            phi_of_r(barrier_profile, 0.5 * barrier_profile.r0)

    def test_phi_vanishes_at_r0(self, barrier_profile):
        r0 = barrier_profile.r0
        assert phi_of_r(barrier_profile, r0) == 0.0
        assert 0.0 < phi_of_r(barrier_profile, r0 * (1.0 + 1e-14)) < 1e-10

    def test_beyond_phi_max_rejected(self, barrier_profile):
        r_far = barrier_profile.r0 * math.exp(lambda_at(barrier_profile, 1e4)) * 10
        with pytest.raises(DomainError):
            phi_of_r(barrier_profile, r_far)


class TestAssembly:
    def test_analytic_hessian_solves_equation(self, barrier_profile):
        samples = assemble_solution(barrier_profile, points=interior_grid(barrier_profile))
        assert len(samples) == 25
        for s in samples:
            assert s.u > 0
            assert s.relative_residual < 1e-9
            assert s.psd

    def test_finite_difference_residual(self, barrier_profile):
        worst = max(fd_residual(barrier_profile, x, y) for x, y in interior_grid(barrier_profile))
        assert worst < 1e-5

    @pytest.mark.slow
    @pytest.mark.parametrize("p, beta", [
        (0.125, -0.5), (0.25, -0.5), (0.375, -0.5), (0.125, -2.0), (0.25, -2.0), (0.375, -2.0),
    ])
    def test_finite_difference_residual_across_shapes(self, p, beta):
        profile = build_barrier(BarrierParams.build(p=p, beta=beta))
        worst = max(fd_residual(profile, x, y) for x, y in interior_grid(profile))
        assert worst < 1e-5

    def test_zero_boundary_value(self, barrier_profile):
        values = boundary_approach(barrier_profile, 1.0)
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-10

    def test_outside_domain_rejected(self, barrier_profile):
        x = math.log(barrier_profile.r0) - 0.1
        with pytest.raises(DomainError):
            assemble_solution(barrier_profile, points=[(x, 1.0)])
        with pytest.raises(DomainError):
            assemble_solution(barrier_profile, points=[(0.0, -1.0)])
