import math

import numpy as np
import pytest

from compfb.linops import DWT
from compfb.penalty import (
    CompositePenalty,
    DirectProxPenalty,
    Linear,
    LogSum,
    PowerConcave,
    weighted_l1_value,
    weighted_sq_value,
)


def scalar_loop_logsum(x, theta, eps):
    total = 0.0
    for v in np.ravel(x):
        total += theta * math.log(abs(v) + eps)
    return total


class TestPhiValidation:
    def test_positive_parameters_required(self):
        with pytest.raises(ValueError):
            LogSum(0.0, 1.0)
        with pytest.raises(ValueError):
            LogSum(1.0, 0.0)
        with pytest.raises(ValueError):
            PowerConcave(1.0, 1.0, 1e-3)
        with pytest.raises(ValueError):
            PowerConcave(1.0, 0.5, 0.0)
        with pytest.raises(ValueError):
            Linear(0.0)

    def test_derivatives_strictly_positive(self, rng):
        u = np.abs(rng.standard_normal(100)) * 10
        for phi in (LogSum(2.0, 0.3), PowerConcave(1.5, 0.4, 0.05), Linear(2.0)):
            assert np.all(phi.deriv(u) > 0)


class TestValue:
    def test_logsum_zero_point(self):
        pen = CompositePenalty(LogSum(1.0, 1.0), "abs", shape=(4,))
        assert pen.value(np.zeros(4)) == 0.0

    def test_power_recovers_sqrt_in_eps_limit(self):
        # eps -> 0 limit of the smoothed power penalty is theta * sum |c|^rho
        pen = CompositePenalty(PowerConcave(1.0, 0.5, 1e-12), "abs", shape=(2,))
        assert pen.value(np.array([4.0, 9.0])) == pytest.approx(5.0, abs=1e-5)

    def test_logsum_large_scale_vs_scalar_loop(self, rng):
        x = rng.standard_normal(64) * 100
        pen = CompositePenalty(LogSum(1e8, 1e-5), "abs", shape=(64,))
        assert pen.value(x) == pytest.approx(
            scalar_loop_logsum(x, 1e8, 1e-5), rel=1e-12
        )

    def test_power_value_decreasing_in_eps(self, rng):
        x = np.sign(rng.standard_normal(32)) * (0.5 + np.abs(rng.standard_normal(32)))
        small = CompositePenalty(PowerConcave(1.0, 0.5, 1e-8), "abs", shape=(32,))
        large = CompositePenalty(PowerConcave(1.0, 0.5, 1e-5), "abs", shape=(32,))
        assert small.value(x) >= large.value(x)


class TestWeights:
    def test_logsum_at_zero(self):
        pen = CompositePenalty(LogSum(1.0, 1.0), "abs", shape=(3,))
        np.testing.assert_allclose(pen.weights(np.zeros(3)), np.ones(3))

    def test_logsum_extreme_parameters(self):
        pen = CompositePenalty(LogSum(1e8, 1e-5), "abs", shape=(1,))
        lam = pen.weights(np.array([1.0]))
        assert lam[0] == pytest.approx(1e8 / (1.0 + 1e-5), rel=1e-12)

    def test_power_direct_substitution(self):
        pen = CompositePenalty(PowerConcave(1.0, 0.5, 0.1), "abs", shape=(1,))
        lam = pen.weights(np.array([0.9]))
        assert lam[0] == pytest.approx(0.5, rel=1e-12)

    def test_cauchy_weights(self):
        pen = CompositePenalty(LogSum(2.0, 0.5), "sq", shape=(1,))
        lam = pen.weights(np.array([3.0]))
        assert lam[0] == pytest.approx(2.0 / (9.0 + 0.5), rel=1e-12)

    def test_linear_weights_are_constant(self, rng):
        pen = CompositePenalty(Linear(1.0), "abs", shape=(10,))
        np.testing.assert_array_equal(pen.weights(rng.standard_normal(10)), np.ones(10))

    def test_weights_always_positive(self, rng):
        for psi in ("abs", "sq"):
            pen = CompositePenalty(LogSum(3.0, 1e-4), psi, shape=(50,))
            assert np.min(pen.weights(rng.standard_normal(50) * 100)) > 0


class TestMajorant:
    @pytest.mark.parametrize(
        "phi,psi",
        [
            (LogSum(2.0, 0.1), "abs"),
            (LogSum(1.0, 0.2), "sq"),
            (PowerConcave(1.5, 0.4, 0.05), "abs"),
        ],
    )
    def test_tangency_and_domination(self, phi, psi, rng):
        pen = CompositePenalty(phi, psi, shape=(32,))
        for _ in range(50):
            anchor = rng.standard_normal(32) * rng.choice([0.3, 1.0, 10.0])
            x = rng.standard_normal(32) * rng.choice([0.3, 1.0, 10.0])
            g_anchor = pen.value(anchor)
            assert pen.majorant_value(anchor, anchor) == pytest.approx(
                g_anchor, rel=1e-12, abs=1e-12
            )
            g_x = pen.value(x)
            assert pen.majorant_value(x, anchor) >= g_x - 1e-9 * (1.0 + abs(g_x))

    def test_linear_phi_majorant_is_exact(self, rng):
        pen = CompositePenalty(Linear(1.0), "abs", shape=(16,))
        for _ in range(20):
            x, anchor = rng.standard_normal(16), rng.standard_normal(16)
            assert pen.majorant_value(x, anchor) == pytest.approx(
                pen.value(x), rel=1e-12
            )

    def test_with_wavelet_analysis(self, rng):
        pen = CompositePenalty(LogSum(5.0, 0.01), "abs", DWT((16, 16), 2))
        x = rng.standard_normal((16, 16))
        anchor = rng.standard_normal((16, 16))
        assert pen.majorant_value(x, anchor) >= pen.value(x) - 1e-9


class TestWeightedSums:
    def test_unit_weights_give_l1(self, rng):
        c = rng.standard_normal(20)
        assert weighted_l1_value(np.ones(20), c) == pytest.approx(np.sum(np.abs(c)))

    def test_small_example(self):
        assert weighted_l1_value(np.array([2.0, 3.0]), np.array([-1.0, 2.0])) == 8.0

    def test_zero_coeffs(self):
        assert weighted_l1_value(np.array([5.0, 7.0]), np.zeros(2)) == 0.0
        assert weighted_sq_value(np.array([5.0, 7.0]), np.zeros(2)) == 0.0

    def test_surrogate_dispatch_and_mismatch(self, rng):
        pen = CompositePenalty(LogSum(1.0, 0.1), "sq", shape=(4,))
        lam = np.ones(4)
        c = rng.standard_normal(4)
        assert pen.surrogate_of_coeffs(lam, c) == pytest.approx(np.sum(c**2))
        with pytest.raises(ValueError, match="mismatch"):
            pen.surrogate_of_coeffs(np.ones(3), c)


class TestDirectProxPenalty:
    def test_values(self, rng):
        c = rng.standard_normal(16)
        shape = (16,)
        assert DirectProxPenalty("l1", 2.0, shape=shape).value_of_coeffs(c) == (
            pytest.approx(2.0 * np.sum(np.abs(c)))
        )
        assert DirectProxPenalty("none", shape=shape).value_of_coeffs(c) == 0.0
        lrho = DirectProxPenalty("lrho", 2.0, rho=0.5, shape=shape)
        assert lrho.value_of_coeffs(c) == pytest.approx(2.0 * np.sum(np.abs(c) ** 0.5))

    def test_validation(self):
        with pytest.raises(ValueError):
            DirectProxPenalty("lrho", 1.0, shape=(4,))  # rho missing
        with pytest.raises(ValueError):
            DirectProxPenalty("logsum", 1.0, eps=0.0, shape=(4,))
        with pytest.raises(ValueError):
            DirectProxPenalty("huber", 1.0, shape=(4,))

    def test_identity_prox_for_none(self, rng):
        pen = DirectProxPenalty("none", shape=(8,))
        c = rng.standard_normal(8)
        np.testing.assert_array_equal(pen.prox_coeffs(c, 1.7), c)
