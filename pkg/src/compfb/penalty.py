"""Composite sparsity penalties ``g(x) = sum_p phi(psi_p(x))``.

The outer function ``phi`` is concave, strictly increasing and
differentiable on ``[0, inf)``; the inner ``psi_p`` is either the absolute
value or the square of the ``p``-th analysis coefficient ``[Wx]_p``.
Linearising ``phi`` at the current point gives a tangent majorant whose
proximity operator is a plain weighted soft-threshold (or a weighted
quadratic shrinkage), which is what the composite solver iterates on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import Identity, LinearOperator

__all__ = [
    "LogSum",
    "PowerConcave",
    "Linear",
    "CompositePenalty",
    "DirectProxPenalty",
    "weighted_l1_value",
    "weighted_sq_value",
]


@dataclass(frozen=True)
class LogSum:
    """``phi(u) = theta * log(u + eps)``; the log-sum outer function."""

    theta: float
    eps: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be > 0")
        if self.eps <= 0:
            raise ValueError("eps must be > 0 (phi must be differentiable at 0)")

    def value(self, u):
        return self.theta * np.log(u + self.eps)

    def deriv(self, u):
        return self.theta / (u + self.eps)


@dataclass(frozen=True)
class PowerConcave:
    """``phi(u) = theta * ((u + eps)^rho - eps^rho)`` with ``0 < rho < 1``.

    Smoothed concave power: at ``eps -> 0`` it recovers ``theta * u^rho``
    while staying differentiable at the origin.
    """

    theta: float
    rho: float
    eps: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be > 0")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if self.eps <= 0:
            raise ValueError("eps must be > 0 (phi must be differentiable at 0)")

    def value(self, u):
        return self.theta * ((u + self.eps) ** self.rho - self.eps**self.rho)

    def deriv(self, u):
        return self.theta * self.rho * (u + self.eps) ** (self.rho - 1.0)


@dataclass(frozen=True)
class Linear:
    """``phi(u) = scale * u``: the degenerate (convex) outer function.

    With ``scale=1`` this is the identity, turning the composite penalty
    into a plain (weight-one) l1 or squared-l2 term; the tangent majorant
    is then exact, so the composite solver coincides with the classic
    variable-metric forward-backward iteration.
    """

    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be > 0")

    def value(self, u):
        return self.scale * np.asarray(u, dtype=float)

    def deriv(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.scale)


PhiKind = LogSum | PowerConcave | Linear


def weighted_l1_value(lam, coeffs) -> float:
    """``sum_p lam_p |c_p|``."""
    return float(np.sum(lam * np.abs(coeffs)))


def weighted_sq_value(lam, coeffs) -> float:
    """``sum_p lam_p c_p^2``."""
    return float(np.sum(lam * np.square(coeffs)))


class CompositePenalty:
    """``g(x) = sum_p phi(|[Wx]_p|)`` or ``sum_p phi(([Wx]_p)^2)``.

    Parameters
    ----------
    phi : LogSum | PowerConcave | Linear
        Outer concave function, shared by every term.
    psi : {"abs", "sq"}
        Inner coefficient map.  ``"sq"`` with a LogSum outer function is
        the Cauchy penalty.
    analysis : LinearOperator, optional
        The analysis operator ``W``; identity if omitted (then the grid
        shape must be given instead).
    """

    def __init__(
        self,
        phi: PhiKind,
        psi: str = "abs",
        analysis: LinearOperator | None = None,
        shape: tuple[int, ...] | None = None,
    ):
        if psi not in ("abs", "sq"):
            raise ValueError("psi must be 'abs' or 'sq'")
        if analysis is None:
            if shape is None:
                raise ValueError("need an analysis operator or a grid shape")
            analysis = Identity(shape)
        self.phi = phi
        self.psi = psi
        self.analysis = analysis
        self.n_terms = int(np.prod(analysis.output_shape))

    # -- coefficient-domain pieces ------------------------------------

    def psi_of_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        return np.abs(coeffs) if self.psi == "abs" else np.square(coeffs)

    def value_of_coeffs(self, coeffs: np.ndarray) -> float:
        return float(np.sum(self.phi.value(self.psi_of_coeffs(coeffs))))

    def weights_of_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        """Tangent-majorant weights ``lam_p = phi'(psi_p)`` at the anchor."""
        return self.phi.deriv(self.psi_of_coeffs(coeffs))

    def surrogate_of_coeffs(self, lam: np.ndarray, coeffs: np.ndarray) -> float:
        """Weighted surrogate ``sum_p lam_p psi_p`` (no constant offset)."""
        if np.shape(lam) != np.shape(coeffs):
            raise ValueError("weight/coefficient shape mismatch")
        if self.psi == "abs":
            return weighted_l1_value(lam, coeffs)
        return weighted_sq_value(lam, coeffs)

    def majorant_offset(self, anchor_coeffs: np.ndarray, lam: np.ndarray) -> float:
        """Constant making surrogate + offset tangent to g at the anchor."""
        psi_a = self.psi_of_coeffs(anchor_coeffs)
        return float(np.sum(self.phi.value(psi_a) - lam * psi_a))

    # -- image-domain API ----------------------------------------------

    def value(self, x: np.ndarray) -> float:
        return self.value_of_coeffs(self.analysis.apply(x))

    def weights(self, x: np.ndarray) -> np.ndarray:
        return self.weights_of_coeffs(self.analysis.apply(x))

    def majorant_value(self, x: np.ndarray, anchor: np.ndarray) -> float:
        """Tangent majorant of g at ``anchor``, evaluated at ``x``.

        Equals ``g(anchor)`` at ``x = anchor`` and upper-bounds ``g``
        everywhere (concavity of ``phi``).
        """
        u = self.analysis.apply(x)
        u_a = self.analysis.apply(anchor)
        lam = self.weights_of_coeffs(u_a)
        return self.surrogate_of_coeffs(lam, u) + self.majorant_offset(u_a, lam)


class DirectProxPenalty:
    """Penalty for the baseline solver: prox applied in one shot.

    Supported kinds and their coefficient-domain objectives:

    - ``"logsum"``: ``theta * sum log(|c| + eps)`` (exact nonconvex prox)
    - ``"lrho"``:   ``theta * sum |c|^rho`` with ``0 < rho < 1`` (Newton prox)
    - ``"l1"``:     ``theta * sum |c|`` (soft threshold)
    - ``"none"``:   zero penalty (plain preconditioned gradient descent)
    """

    KINDS = ("logsum", "lrho", "l1", "none")

    def __init__(
        self,
        kind: str,
        theta: float = 1.0,
        eps: float = 1e-5,
        rho: float | None = None,
        analysis: LinearOperator | None = None,
        shape: tuple[int, ...] | None = None,
    ):
        if kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}")
        if kind != "none" and theta <= 0:
            raise ValueError("theta must be > 0")
        if kind == "logsum" and eps <= 0:
            raise ValueError("eps must be > 0")
        if kind == "lrho":
            if rho is None or not 0.0 < rho < 1.0:
                raise ValueError("lrho needs rho in (0, 1)")
        if analysis is None:
            if shape is None:
                raise ValueError("need an analysis operator or a grid shape")
            analysis = Identity(shape)
        self.kind = kind
        self.theta = float(theta)
        self.eps = float(eps)
        self.rho = None if rho is None else float(rho)
        self.analysis = analysis

    def value_of_coeffs(self, coeffs: np.ndarray) -> float:
        if self.kind == "logsum":
            return self.theta * float(np.sum(np.log(np.abs(coeffs) + self.eps)))
        if self.kind == "lrho":
            return self.theta * float(np.sum(np.abs(coeffs) ** self.rho))
        if self.kind == "l1":
            return self.theta * float(np.sum(np.abs(coeffs)))
        return 0.0

    def value(self, x: np.ndarray) -> float:
        return self.value_of_coeffs(self.analysis.apply(x))

    def prox_coeffs(self, coeffs: np.ndarray, a, info: dict | None = None) -> np.ndarray:
        """Coefficient-wise prox under the diagonal metric ``a``."""
        from . import prox  # local import to avoid a cycle

        if self.kind == "logsum":
            return prox.prox_logsum(coeffs, self.theta, self.eps, a)
        if self.kind == "lrho":
            return prox.prox_lrho(coeffs, self.theta, self.rho, a, info=info)
        if self.kind == "l1":
            return prox.prox_weighted_l1(coeffs, self.theta, a)
        return np.array(coeffs, dtype=float, copy=True)
