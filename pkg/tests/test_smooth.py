import numpy as np
import pytest

from compfb.linops import CircularConvolution, Composition, DWT, Identity, make_motion_blur
from compfb.smooth import LeastSquares, hessian_diag_majorant


def scalar_loop_half_sq(residual):
    total = 0.0
    for v in np.ravel(residual):
        total += 0.5 * v * v
    return total


class TestValue:
    def test_zero_at_consistent_data(self, rng):
        op = make_motion_blur(5, 60.0, (8, 8))
        x = rng.standard_normal((8, 8))
        s = LeastSquares(op, op.apply(x))
        assert s.value(x) == pytest.approx(0.0, abs=1e-18)

    def test_identity_case(self):
        x = np.full(8, 1.0)  # ||x||^2 = 8
        s = LeastSquares(Identity((8,)), np.zeros(8))
        assert s.value(x) == pytest.approx(4.0)

    def test_matches_scalar_loop(self, rng):
        op = CircularConvolution(rng.standard_normal((3, 3)), (8, 8))
        y = rng.standard_normal((8, 8))
        x = rng.standard_normal((8, 8))
        s = LeastSquares(op, y)
        assert s.value(x) == pytest.approx(
            scalar_loop_half_sq(op.apply(x) - y), rel=1e-12
        )


class TestGrad:
    def test_identity_zero_data(self, rng):
        s = LeastSquares(Identity((10,)), np.zeros(10))
        x = rng.standard_normal(10)
        np.testing.assert_allclose(s.grad(x), x)

    def test_zero_at_minimiser(self, rng):
        op = make_motion_blur(3, 20.0, (8, 8))
        x = rng.standard_normal((8, 8))
        s = LeastSquares(op, op.apply(x))
        assert np.linalg.norm(s.grad(x)) < 1e-10

    @pytest.mark.parametrize(
        "make_op", [lambda: Identity((6, 6)), lambda: make_motion_blur(5, 60.0, (6, 6))]
    )
    def test_finite_differences(self, make_op, rng):
        op = make_op()
        s = LeastSquares(op, rng.standard_normal((6, 6)))
        x = rng.standard_normal((6, 6)) * 3
        g = s.grad(x)
        for idx in np.ndindex(6, 6):
            step = 1e-6 * (1.0 + abs(x[idx]))
            xp, xm = x.copy(), x.copy()
            xp[idx] += step
            xm[idx] -= step
            fd = (s.value(xp) - s.value(xm)) / (2 * step)
            assert abs(fd - g[idx]) <= 1e-5 * (1.0 + abs(fd))


class TestMetric:
    def test_identity_scalar_and_diagonal(self):
        s = LeastSquares(Identity((8,)), np.zeros(8))
        assert s.metric("scalar").nu_hi == pytest.approx(1.01, abs=1e-9)
        np.testing.assert_allclose(s.metric("diagonal_majorant").diag, np.ones(8))

    def test_scaled_identity_diagonal(self):
        op = CircularConvolution(np.array([[0.5]]), (6, 6))
        s = LeastSquares(op, np.zeros((6, 6)))
        np.testing.assert_allclose(
            s.metric("diagonal_majorant").diag, np.full((6, 6), 0.25)
        )

    def test_dwt_diag_majorant_is_one(self):
        assert np.all(hessian_diag_majorant(DWT((16, 16), 2)) == 1.0)

    def test_composition_rejected(self):
        op = Composition(DWT((16, 16), 2), make_motion_blur(3, 0.0, (16, 16)))
        with pytest.raises(ValueError, match="majorant"):
            hessian_diag_majorant(op)

    def test_gershgorin_dominates_hessian_row_sums(self, rng):
        # brute-force H^T H row sums on a small grid
        shape = (6, 6)
        op = make_motion_blur(5, 60.0, shape)
        n = 36
        cols = np.zeros((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            cols[:, j] = op.adjoint(op.apply(e.reshape(shape))).ravel()
        row_sums = np.sum(np.abs(cols), axis=1)
        diag = hessian_diag_majorant(op).ravel()
        np.testing.assert_allclose(diag, row_sums, rtol=1e-10)

    @pytest.mark.parametrize("policy", ["scalar", "diagonal_majorant"])
    def test_quadratic_majorisation(self, policy, rng):
        op = make_motion_blur(5, 60.0, (16, 16))
        s = LeastSquares(op, rng.standard_normal((16, 16)))
        metric = s.metric(policy)
        assert metric.nu_lo > 0
        for _ in range(100):
            xa = rng.standard_normal((16, 16)) * 2
            xb = rng.standard_normal((16, 16)) * 2
            lhs = s.value(xb)
            rhs = (
                s.value(xa)
                + float(np.vdot(xb - xa, s.grad(xa)).real)
                + 0.5 * metric.norm(xb - xa) ** 2
            )
            assert lhs <= rhs + 1e-9 * (1.0 + abs(lhs))

    def test_descent_lemma_step(self, rng):
        op = make_motion_blur(5, 60.0, (16, 16))
        s = LeastSquares(op, rng.standard_normal((16, 16)))
        for _ in range(10):
            x = rng.standard_normal((16, 16)) * 5
            assert s.value(x - s.grad(x) / s.lipschitz) <= s.value(x) + 1e-12

    def test_unknown_policy(self):
        s = LeastSquares(Identity((4,)), np.zeros(4))
        with pytest.raises(ValueError, match="policy"):
            s.metric("full")


class TestValidation:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            LeastSquares(Identity((4,)), np.zeros(5))

    def test_nonfinite_data(self):
        with pytest.raises(ValueError, match="finite"):
            LeastSquares(Identity((2,)), np.array([1.0, np.nan]))

    def test_lipschitz_is_upper_bound(self):
        op = make_motion_blur(5, 60.0, (16, 16))
        s = LeastSquares(op, np.zeros((16, 16)))
        assert s.lipschitz >= float(np.max(np.abs(op.spectrum()) ** 2))
