import math

import numpy as np
import pytest

from sleepingtop import (
    ReducedPoint,
    TopState,
    certify_isolation,
    classify_spectral,
    conserved,
    equilibrium,
    grid_search_oracle,
    level_residuals,
    reduced_residuals,
)

from conftest import random_params, random_state


class TestReducedPoint:
    def test_round_trip_through_state(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            p = ReducedPoint(
                u=rng.uniform(0.01, 3.0),
                phi=rng.uniform(-math.pi, math.pi),
                v=rng.uniform(0.01, 1.0),
                theta=rng.uniform(-math.pi, math.pi),
                gamma3=rng.uniform(-1.0, 1.0),
            )
            q = ReducedPoint.from_state(p.to_state(M3=1.7))
            assert q.u == pytest.approx(p.u, abs=1e-14)
            assert q.v == pytest.approx(p.v, abs=1e-14)
            assert q.gamma3 == pytest.approx(p.gamma3, abs=1e-15)
            assert math.cos(q.phi - p.phi) == pytest.approx(1.0, abs=1e-13)
            assert math.cos(q.theta - p.theta) == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(u=-0.1), dict(v=-0.1), dict(gamma3=1.5), dict(gamma3=-1.5)],
    )
    def test_validation(self, kwargs):
        base = dict(u=1.0, phi=0.0, v=0.5, theta=0.0, gamma3=0.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            ReducedPoint(**base)


class TestLevelResiduals:
    def test_vanish_at_equilibrium(self, unit_params):
        res = level_residuals(unit_params, 2.5, equilibrium(2.5))
        assert np.all(res == 0.0)

    def test_equal_conserved_differences(self, unit_params):
        rng = np.random.default_rng(42)
        for _ in range(100):
            st = random_state(rng)
            res = level_residuals(unit_params, 1.3, st)
            diff = (
                conserved(unit_params, st).as_array()
                - conserved(unit_params, equilibrium(1.3)).as_array()
            )
            assert np.array_equal(res, diff)

    def test_known_nontrivial_solution(self, unit_params):
        # M=(sqrt2, 0, 1), gamma=(sqrt2/2, sqrt2/2, 0) solves the system at M3=1
        st = TopState(
            M=[math.sqrt(2.0), 0.0, 1.0],
            gamma=[math.sqrt(2.0) / 2.0, math.sqrt(2.0) / 2.0, 0.0],
        )
        assert np.abs(level_residuals(unit_params, 1.0, st)).max() <= 1e-12


class TestReducedResiduals:
    def test_equilibrium_in_reduced_coordinates(self, unit_params):
        p = ReducedPoint(u=0.0, phi=0.3, v=0.0, theta=-0.7, gamma3=1.0)
        assert np.all(reduced_residuals(unit_params, 2.0, p) == 0.0)

    def test_hand_computed_solution(self, unit_params):
        p = ReducedPoint(
            u=math.sqrt(2.0), phi=0.0, v=1.0, theta=math.pi / 4.0, gamma3=0.0
        )
        assert np.abs(reduced_residuals(unit_params, 1.0, p)).max() <= 1e-15

    def test_reduced_solutions_solve_full_system(self):
        # zero residuals of the reduced system reconstruct to zero residuals
        # of the full one (gauge phase included)
        rng = np.random.default_rng(43)
        built = 0
        while built < 200:
            params = random_params(rng)
            m3 = rng.uniform(-1.0, 1.0) * 0.9 * params.critical_spin()
            family = certify_isolation(params, m3).witness_family
            gamma3 = rng.uniform(family.gamma3_min, 1.0 - 1e-6)
            base = family.reduced(gamma3)
            gauge = rng.uniform(0.0, 2.0 * math.pi)
            point = ReducedPoint(
                u=base.u,
                phi=base.phi + gauge,
                v=base.v,
                theta=base.theta + gauge,
                gamma3=base.gamma3,
            )
            assert np.abs(reduced_residuals(params, m3, point)).max() <= 1e-12
            state = point.to_state(m3)
            assert np.abs(level_residuals(params, m3, state)).max() <= 1e-12
            built += 1

    def test_equivalence_on_random_states(self, unit_params):
        # vanishing full residuals iff vanishing reduced residuals
        rng = np.random.default_rng(44)
        m3 = 1.2
        for _ in range(1000):
            st = random_state(rng)
            st = TopState(M=[st.M[0], st.M[1], m3], gamma=st.gamma)
            level = np.abs(level_residuals(unit_params, m3, st)).max()
            reduced = np.abs(
                reduced_residuals(unit_params, m3, ReducedPoint.from_state(st))
            ).max()
            assert (level <= 1e-12) == (reduced <= 1e-12)


class TestCertifyIsolation:
    def test_fast_spin_isolated(self, unit_params):
        verdict = certify_isolation(unit_params, 3.0)
        assert verdict.isolated and verdict.verdict == "Isolated"
        assert verdict.witness_family is None
        assert verdict.margin == 5.0

    def test_boundary_isolated(self, unit_params):
        assert certify_isolation(unit_params, 2.0).isolated

    def test_slow_spin_not_isolated(self, unit_params):
        verdict = certify_isolation(unit_params, 1.0)
        assert not verdict.isolated and verdict.verdict == "NotIsolated"
        assert verdict.witness_family is not None

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_nonfinite(self, unit_params, bad):
        with pytest.raises(ValueError):
            certify_isolation(unit_params, bad)

    def test_agrees_with_margin_sign(self):
        rng = np.random.default_rng(45)
        checked = 0
        while checked < 1000:
            p = random_params(rng)
            m3 = rng.uniform(-5.0, 5.0)
            margin = m3 * m3 - 4.0 * p.A * p.mgz
            if abs(margin) < 1e-6:
                continue
            assert certify_isolation(p, m3).isolated == (margin >= 0.0)
            checked += 1

    def test_threshold_band_isolated(self):
        rng = np.random.default_rng(46)
        for _ in range(200):
            p = random_params(rng)
            m3 = p.critical_spin() * (1.0 + rng.uniform(-1e-10, 1e-10))
            assert certify_isolation(p, m3).isolated

    def test_always_matches_spectral_verdict(self):
        rng = np.random.default_rng(47)
        for _ in range(1000):
            p = random_params(rng)
            m3 = rng.uniform(-5.0, 5.0)
            assert certify_isolation(p, m3).isolated == classify_spectral(p, m3).stable


class TestWitnessFamily:
    def make_family(self, params, m3):
        verdict = certify_isolation(params, m3)
        assert not verdict.isolated
        return verdict.witness_family

    def test_known_witness_at_gamma3_zero(self, unit_params):
        st = self.make_family(unit_params, 1.0)(0.0)
        assert np.allclose(st.M, [math.sqrt(2.0), 0.0, 1.0], atol=1e-15)
        assert np.allclose(
            st.gamma, [math.sqrt(2.0) / 2.0, math.sqrt(2.0) / 2.0, 0.0], atol=1e-15
        )

    def test_close_witness(self, unit_params):
        family = self.make_family(unit_params, 1.0)
        st = family(0.99)
        assert np.abs(level_residuals(unit_params, 1.0, st)).max() <= 1e-12
        assert st.distance_to(equilibrium(1.0)) <= 0.21

    def test_residuals_and_convergence(self):
        rng = np.random.default_rng(48)
        for _ in range(100):
            params = random_params(rng)
            m3 = rng.uniform(-1.0, 1.0) * 0.95 * params.critical_spin()
            family = self.make_family(params, m3)
            eq = equilibrium(m3)
            lo = family.gamma3_min
            grid = lo + (1.0 - lo) * np.linspace(0.05, 0.999, 12)
            distances = []
            for g3 in grid:
                st = family(g3)
                assert np.abs(level_residuals(params, m3, st)).max() <= 1e-12
                assert np.hypot(st.M[0], st.M[1]) > 0.0  # never the equilibrium
                distances.append(st.distance_to(eq))
            assert np.all(np.diff(distances) < 0.0)  # monotone toward 0
            assert distances[-1] < 0.1 * distances[0]

    def test_distance_formula(self, unit_params):
        family = self.make_family(unit_params, 1.0)
        for g3 in (0.2, 0.7, 0.99):
            st = family(g3)
            assert family.distance_at(g3) == pytest.approx(
                st.distance_to(equilibrium(1.0)), abs=1e-14
            )

    def test_gamma3_at_distance_inverts(self, unit_params):
        family = self.make_family(unit_params, 1.0)
        for d in (0.5, 1e-1, 1e-2, 1e-3):
            g3 = family.gamma3_at_distance(d)
            assert family(g3).distance_to(equilibrium(1.0)) == pytest.approx(d, rel=1e-12)

    def test_domain_lower_bound_active(self, unit_params):
        # m3^2 > 2*A*m*g*z makes the arccos bound bite above 0
        family = self.make_family(unit_params, 1.8)
        expected = 1.8**2 / 2.0 - 1.0
        assert family.gamma3_min == pytest.approx(expected, abs=1e-8)
        st = family(family.gamma3_min)  # inclusive endpoint stays valid
        assert np.abs(level_residuals(unit_params, 1.8, st)).max() <= 1e-12
        with pytest.raises(ValueError):
            family(family.gamma3_min - 1e-6)

    def test_domain_upper_bound(self, unit_params):
        family = self.make_family(unit_params, 1.0)
        for bad in (1.0, 1.1):
            with pytest.raises(ValueError):
                family(bad)


class TestGridSearchOracle:
    def test_isolated_case_bounded_below(self, unit_params):
        result = grid_search_oracle(unit_params, 3.0, radius=0.5, n_gamma3=400, n_angle=400)
        assert result.min_residual >= 1.0  # |m3| - 2 sqrt(A m g z) = 1

    def test_negative_spin_same_bound(self, unit_params):
        result = grid_search_oracle(unit_params, -3.0, radius=0.5, n_gamma3=400, n_angle=400)
        assert result.min_residual >= 1.0
        assert result.delta == pytest.approx(math.pi)  # optimum flips phase

    def test_nonisolated_minimum_vanishes_with_refinement(self, unit_params):
        coarse = grid_search_oracle(unit_params, 1.0, 0.5, 50, 50)
        fine = grid_search_oracle(unit_params, 1.0, 0.5, 400, 400)
        assert fine.min_residual <= 1e-2
        assert fine.min_residual < coarse.min_residual

    def test_small_radius_optimum_angle(self, unit_params):
        # as gamma3 -> 1 the best phase difference approaches arccos(1/2)
        result = grid_search_oracle(unit_params, 1.0, radius=0.01, n_gamma3=400, n_angle=400)
        assert result.delta == pytest.approx(math.pi / 3.0, abs=0.02)

    def test_tie_breaks_toward_low_gamma3_then_low_delta(self, unit_params):
        # m3 = 0: the residual vanishes along delta = pi/2 for every gamma3
        result = grid_search_oracle(unit_params, 0.0, radius=0.5, n_gamma3=100, n_angle=401)
        assert result.gamma3 == 0.5
        assert result.delta == pytest.approx(math.pi / 2.0, abs=1e-15)

    @pytest.mark.parametrize("radius", [0.0, 1.0, -0.5, 1.5])
    def test_radius_validation(self, unit_params, radius):
        with pytest.raises(ValueError):
            grid_search_oracle(unit_params, 1.0, radius, 10, 10)

    def test_cross_validates_certificates(self):
        rng = np.random.default_rng(49)
        for _ in range(10):
            p = random_params(rng)
            thr = p.critical_spin()
            sign = rng.choice([-1.0, 1.0])

            m3 = sign * thr * rng.uniform(1.05, 2.0)
            assert certify_isolation(p, m3).isolated
            res = grid_search_oracle(p, m3, 0.5, 400, 400)
            assert res.min_residual >= abs(m3) - thr - 0.01

            m3 = sign * thr * rng.uniform(0.0, 0.95)
            assert not certify_isolation(p, m3).isolated
            res = grid_search_oracle(p, m3, 0.5, 400, 400)
            assert res.min_residual <= 1e-2
