import numpy as np
import pytest

from catmix import (
    ARNOLD,
    IntMatrix2,
    PerturbedCatMap,
    ShearStep,
    analyze_matrix,
    cone_preservation_ratio,
    jacobian_forward,
    jacobian_inverse_sup,
    map_forward,
    map_inverse,
)
from conftest import LAMBDA, LOG_LAMBDA, perturbed


class TestAnalyzeMatrix:
    def test_expanding_eigenvalue(self, hyp):
        assert hyp.lambda_ == pytest.approx(LAMBDA, abs=1e-12)

    def test_lambda_exponent(self, hyp):
        # symmetric matrix: sup |A^{-1}| is the expanding eigenvalue
        assert hyp.Lambda == pytest.approx(LOG_LAMBDA, abs=1e-12)

    def test_eigenvector_relations(self, hyp):
        A = ARNOLD.as_array()
        assert np.linalg.norm(A @ hyp.v_u - LAMBDA * hyp.v_u) < 1e-12
        assert np.linalg.norm(A @ hyp.v_s - hyp.v_s / LAMBDA) < 1e-12
        assert np.hypot(*hyp.v_uT) == pytest.approx(1.0, abs=1e-14)

    def test_parabolic_rejected(self):
        with pytest.raises(ValueError, match="unit circle"):
            analyze_matrix(IntMatrix2(1, 1, 0, 1))

    def test_bad_determinant_rejected(self):
        with pytest.raises(ValueError, match="determinant"):
            analyze_matrix(IntMatrix2(2, 0, 0, 2))

    def test_det_minus_one_allowed(self):
        h = analyze_matrix(IntMatrix2(1, 1, 1, 0))
        assert h.lambda_ == pytest.approx((1 + np.sqrt(5)) / 2, abs=1e-12)


class TestPointMaps:
    def test_inverse_example(self, pure_map):
        # A^{-1} (0.5, 0.5) = (0, 0.5) mod 1
        out = map_inverse(pure_map, np.array([[0.5, 0.5]]))
        assert np.allclose(out, [[0.0, 0.5]], atol=1e-15)

    def test_zero_amplitude_shear_is_pure(self, pure_map, rng):
        pcm = PerturbedCatMap(ARNOLD, (ShearStep("horizontal", 0.0, 1),))
        pts = rng.random((100, 2))
        assert np.allclose(map_inverse(pcm, pts), map_inverse(pure_map, pts), atol=0)

    def test_round_trip(self, rng):
        pcm = perturbed(0.04, freq=3)
        pts = rng.random((10_000, 2))
        back = map_forward(pcm, map_inverse(pcm, pts))
        err = np.abs(back - pts)
        err = np.minimum(err, 1.0 - err)  # wrap-around
        assert np.max(err) < 1e-12

    def test_shear_validation(self):
        with pytest.raises(ValueError, match="axis"):
            ShearStep("diagonal", 0.1, 1)
        with pytest.raises(ValueError, match="frequency"):
            ShearStep("horizontal", 0.1, 0)


class TestJacobians:
    def test_pure_map_constant(self, pure_map):
        est = jacobian_inverse_sup(pure_map, grid=64)
        assert est == pytest.approx(LOG_LAMBDA, abs=1e-10)

    def test_small_shear_bracket(self):
        est = jacobian_inverse_sup(perturbed(0.01), grid=128)
        assert LOG_LAMBDA - 0.05 <= est <= LOG_LAMBDA + 0.05

    def test_unit_determinant_everywhere(self, rng):
        pcm = perturbed(0.05, freq=2)
        J = jacobian_forward(pcm, rng.random((4096, 2)))
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        assert np.max(np.abs(det - 1.0)) < 1e-12

    @pytest.mark.parametrize("eps", [0.0, 0.01, 0.05])
    def test_cone_preserved(self, hyp, eps):
        pcm = perturbed(eps) if eps else PerturbedCatMap.pure()
        ratio = cone_preservation_ratio(pcm, hyp)
        assert ratio > 1.0  # strictly inside, with margin
        if eps == 0.0:
            assert ratio == pytest.approx(LAMBDA ** 2, rel=1e-10)


class TestPulseGeometry:
    def test_pulse_radius_ratio_stabilizes(self):
        from catmix import pulse_sequence
        ks = pulse_sequence(ARNOLD, (1, 0), 12)
        ratios = [np.hypot(*ks[n]) / LAMBDA ** n for n in range(13)]
        # |k_n| / lambda^n settles to a positive constant; within 1% by n=8
        tail = ratios[8:]
        assert max(tail) / min(tail) < 1.01
        assert min(tail) > 0.4
