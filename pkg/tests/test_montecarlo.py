import numpy as np
import pytest

from catmix import (
    Ball,
    Complement,
    HighPass,
    PerturbedCatMap,
    PulseSet,
    heat,
    l2_norm,
    mc_expected_projection,
    new_pure_mode,
    omega_normal,
    pulse_sequence,
    random_field,
    random_shift_heat,
    sample_chain,
    stationary_spectrum,
)
from catmix import ARNOLD
from conftest import perturbed


class TestSampleChain:
    def test_bitwise_determinism(self, pure_map):
        b = new_pure_mode((1, 0), 32)
        g1 = sample_chain(b, pure_map, 1e-3, 25, seed=9)
        g2 = sample_chain(b, pure_map, 1e-3, 25, seed=9)
        assert np.array_equal(g1.coeffs, g2.coeffs)

    def test_single_step_is_scaled_source(self, pure_map):
        b = new_pure_mode((1, 0), 32)
        g = sample_chain(b, pure_map, 1e-3, 1, seed=77)
        assert l2_norm(g) == pytest.approx(abs(float(omega_normal(77, 0, 1))), rel=1e-15)

    def test_seeds_differ(self, pure_map):
        b = new_pure_mode((1, 0), 16)
        g1 = sample_chain(b, pure_map, 1e-3, 10, seed=1)
        g2 = sample_chain(b, pure_map, 1e-3, 10, seed=2)
        assert not np.array_equal(g1.coeffs, g2.coeffs)

    def test_mean_square_mass_matches_series(self, pure_map):
        # E ||g||^2 = sum_n ||phi_n||^2 restricted to the square
        b = new_pure_mode((1, 0), 32)
        kappa = 1e-3
        spec = stationary_spectrum(b, pure_map, kappa, tol=1e-10)
        mean, se = mc_expected_projection(b, pure_map, kappa, Ball(100.0),
                                          n_samples=500, n_steps=200, seed=31)
        assert abs(mean - spec.total_power) <= 3 * se


class TestMcExpectedProjection:
    def test_low_mode_ball_matches_series(self, pure_map):
        b = new_pure_mode((1, 0), 32)
        spec = stationary_spectrum(b, pure_map, 1e-6, tol=1e-9)
        ref = spec.mass_where(spec.radii <= 10.0)
        mean, se = mc_expected_projection(b, pure_map, 1e-6, Ball(10.0),
                                          n_samples=400, n_steps=60, seed=123)
        assert abs(mean - ref) <= 3 * se

    def test_pulse_complement_is_exactly_zero(self, pure_map):
        b = new_pure_mode((1, 0), 32)
        ks = pulse_sequence(ARNOLD, (1, 0), 20)
        sel = Complement(PulseSet(tuple(ks)))
        mean, se = mc_expected_projection(b, pure_map, 1e-6, sel,
                                          n_samples=50, n_steps=40, seed=4)
        assert mean == 0.0 and se == 0.0

    def test_stderr_scaling(self, pure_map):
        b = new_pure_mode((1, 0), 16)
        sizes = [250, 1000, 4000]
        errs = [mc_expected_projection(b, pure_map, 1e-4, Ball(8.0), n, 30, seed=6)[1]
                for n in sizes]
        slope = np.polyfit(np.log(sizes), np.log(errs), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.15)

    def test_generic_path_matches_batched(self):
        # force the non-batched branch by using a (zero-amplitude) shear;
        # identical streams must reproduce the shear-free batched statistics
        b = new_pure_mode((1, 0), 16)
        pure = PerturbedCatMap.pure()
        with_shear = perturbed(0.0)
        m1, s1 = mc_expected_projection(b, pure, 1e-3, Ball(6.0), 20, 15, seed=8)
        m2, s2 = mc_expected_projection(b, with_shear, 1e-3, Ball(6.0), 20, 15, seed=8)
        assert m1 == pytest.approx(m2, rel=1e-12)
        assert s1 == pytest.approx(s2, rel=1e-12)

    def test_needs_two_samples(self, pure_map):
        with pytest.raises(ValueError):
            mc_expected_projection(new_pure_mode((1, 0), 8), pure_map, 1e-3,
                                   Ball(4.0), 1, 5, seed=0)


class TestRandomShiftHeat:
    def test_single_shift_is_isometry(self):
        phi = new_pure_mode((1, 0), 8)
        out = random_shift_heat(phi, 0.01, 1, seed=3)
        assert l2_norm(out) == pytest.approx(1.0, rel=1e-14)

    def test_mean_multiplier_converges(self):
        phi = new_pure_mode((1, 0), 8)
        out = random_shift_heat(phi, 0.01, 4000, seed=3)
        target = np.exp(-4 * np.pi ** 2 * 0.01)
        se = np.sqrt((1 - target ** 2) / 4000)
        assert abs(out.coefficient(1, 0).real - target) <= 3 * se

    @pytest.mark.parametrize("mode", [(1, 0), (2, -3), (0, 4)])
    @pytest.mark.parametrize("kappa", [3e-3, 1e-3, 3e-4])
    def test_unbiased_per_mode(self, mode, kappa):
        phi = new_pure_mode(mode, 8)
        n = 3000
        out = random_shift_heat(phi, kappa, n, seed=17)
        k2 = mode[0] ** 2 + mode[1] ** 2
        target = np.exp(-4 * np.pi ** 2 * kappa * k2)
        se = np.sqrt(max(1 - target ** 2, 1e-30) / n)
        assert abs(out.coefficient(*mode) - target) <= 4 * se + 1e-12

    def test_l2_error_rate(self, rng):
        phi = random_field(8, rng, smooth=True)
        kappa = 2e-3
        exact = heat(phi, kappa)
        sizes = [100, 400, 1600, 6400]
        errs = []
        for n in sizes:
            approx = random_shift_heat(phi, kappa, n, seed=29)
            errs.append(np.linalg.norm(approx.coeffs - exact.coeffs))
        slope = np.polyfit(np.log(sizes), np.log(errs), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.17)

    def test_determinism(self):
        phi = new_pure_mode((1, 0), 8)
        a = random_shift_heat(phi, 0.01, 64, seed=5)
        b = random_shift_heat(phi, 0.01, 64, seed=5)
        assert np.array_equal(a.coeffs, b.coeffs)

    def test_kappa_validation(self):
        with pytest.raises(ValueError):
            random_shift_heat(new_pure_mode((1, 0), 4), 0.0, 10, seed=0)
