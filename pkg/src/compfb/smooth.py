"""Quadratic data-fidelity term ``h(x) = 1/2 ||Hx - y||^2`` and its metrics."""

from __future__ import annotations

import numpy as np

from .linops import (
    CircularConvolution,
    Composition,
    DWT,
    Identity,
    LinearOperator,
    operator_norm_sq,
)
from .prox import Metric

__all__ = ["LeastSquares", "hessian_diag_majorant"]


def hessian_diag_majorant(op: LinearOperator) -> np.ndarray:
    """Diagonal row-sum (Gershgorin) majorant of ``H^T H``.

    Returns ``d`` with ``d_n = sum_m |[H^T H]_{nm}|``, so ``Diag(d)``
    dominates ``H^T H`` in the Loewner order.  For a circular convolution,
    ``H^T H`` is circulant with the kernel autocorrelation as its stencil,
    so the row sums are constant and computed exactly (including the
    periodic fold-over on grids smaller than the autocorrelation support).
    """
    if isinstance(op, Identity):
        return np.ones(op.input_shape)
    if isinstance(op, DWT):
        return np.ones(op.input_shape)  # orthonormal: H^T H = I
    if isinstance(op, CircularConvolution):
        k = op.kernel
        rev = k[tuple(slice(None, None, -1) for _ in range(k.ndim))]
        auto = _small_convolve(k, rev)
        folded = CircularConvolution._embed(auto, op.input_shape)
        return np.full(op.input_shape, float(np.sum(np.abs(folded))))
    if isinstance(op, Composition):
        raise ValueError(
            "no diagonal Hessian majorant for composed operators; "
            "use the scalar metric policy"
        )
    raise ValueError(f"no diagonal Hessian majorant for {type(op).__name__}")


def _small_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution of two small kernels (direct summation)."""
    out_shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    out = np.zeros(out_shape)
    for idx in np.ndindex(*a.shape):
        window = tuple(slice(i, i + sb) for i, sb in zip(idx, b.shape))
        out[window] += a[idx] * b
    return out


class LeastSquares:
    """Smooth term ``h(x) = 1/2 ||Hx - y||^2`` of a linear inverse problem.

    Parameters
    ----------
    operator : LinearOperator
        Forward model ``H``.
    data : ndarray
        Observation ``y``, shaped like the operator output.
    lipschitz : float, optional
        Upper bound on ``||H||^2`` (the Lipschitz constant of the
        gradient).  Estimated by power iteration (with its 1.01 safety
        factor) when omitted.
    """

    def __init__(
        self,
        operator: LinearOperator,
        data: np.ndarray,
        lipschitz: float | None = None,
    ):
        data = np.asarray(data, dtype=float)
        if tuple(data.shape) != tuple(operator.output_shape):
            raise ValueError(
                f"data shape {data.shape} != operator output {operator.output_shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("data must be finite")
        self.operator = operator
        self.data = data
        if lipschitz is None:
            est = operator_norm_sq(operator)
            lipschitz = est.value
        if lipschitz <= 0:
            raise ValueError("lipschitz must be > 0")
        self.lipschitz = float(lipschitz)

    @property
    def shape(self):
        return self.operator.input_shape

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.operator.apply(x) - self.data

    def value(self, x: np.ndarray) -> float:
        r = self.residual(x)
        return 0.5 * float(np.vdot(r, r).real)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.operator.adjoint(self.residual(x))

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        r = self.residual(x)
        return 0.5 * float(np.vdot(r, r).real), self.operator.adjoint(r)

    def metric(self, policy: str = "scalar") -> Metric:
        """Diagonal metric majorising the Hessian ``H^T H``.

        ``"scalar"`` returns ``lipschitz * I``; ``"diagonal_majorant"``
        returns the Gershgorin row-sum diagonal, floored at
        ``1e-8 * lipschitz`` to stay positive definite.
        """
        if policy == "scalar":
            return Metric.scalar(self.lipschitz, self.shape)
        if policy == "diagonal_majorant":
            diag = hessian_diag_majorant(self.operator)
            return Metric(np.maximum(diag, 1e-8 * self.lipschitz))
        raise ValueError(f"unknown metric policy {policy!r}")
