"""Composite-function and classic variable-metric forward-backward solvers.

Both solvers minimise ``f = h + g`` for quadratic ``h`` by alternating a
preconditioned gradient step on ``h`` with a proximity step in the
(orthonormal) analysis-coefficient domain:

- :func:`c2fb` handles composite ``g = sum_p phi(psi_p)`` by freezing the
  tangent-majorant weights of ``phi`` for a block of ``inner_iters``
  forward-backward steps on the weighted surrogate, then re-anchoring.
  With a linear ``phi`` the surrogate is exact and the iteration reduces
  to :func:`vmfb`.
- :func:`vmfb` is the single-loop baseline applying a direct (possibly
  nonconvex) proximity operator of ``g`` itself.

Each run records per-iteration telemetry (objective, stacked inner-step
norm, stationarity residual, relative-error monitor outcomes) in a
:class:`SolverTrace`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linops import DWT, Identity, LinearOperator
from .penalty import CompositePenalty, DirectProxPenalty
from .prox import Metric, prox_subgradient, prox_weighted_l1, prox_weighted_sq
from .smooth import LeastSquares

__all__ = [
    "SolverConfig",
    "SolverTrace",
    "SolveResult",
    "c2fb",
    "vmfb",
    "check_sufficient_decrease",
    "check_inexact_optimality",
    "stopping_test",
    "stationarity_residual",
]

# float slack for the relative-error monitors, which hold with equality
# in exact arithmetic for exact prox steps
_MONITOR_REL_SLACK = 1e-10
_MONITOR_ABS_SLACK = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters shared by both solvers.

    ``gamma`` is the constant step size, kept in ``(0, 1 - gamma_cap]`` so
    the relative-error monitors have their standard constants:
    sufficient-decrease with ``alpha = 1/(2 (1 - gamma_cap))`` and inexact
    optimality with ``beta = sqrt(nu_hi) / gamma``.
    """

    algo: str = "c2fb"
    inner_iters: int = 1
    max_outer: int = 20000
    gamma: float = 0.99
    gamma_cap: float = 0.01
    metric_policy: str = "scalar"
    stop_x_tol: float = 1e-6
    stop_f_tol: float = 1e-5
    monitor_inexact: bool = True
    record_inner: bool = False

    def __post_init__(self):
        if self.algo not in ("c2fb", "vmfb"):
            raise ValueError("algo must be 'c2fb' or 'vmfb'")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if not 0.0 < self.gamma_cap < 1.0:
            raise ValueError("gamma_cap must lie in (0, 1)")
        if not 0.0 < self.gamma <= 1.0 - self.gamma_cap:
            raise ValueError(
                f"gamma must lie in (0, {1.0 - self.gamma_cap}] "
                f"(got {self.gamma})"
            )
        if self.metric_policy not in ("scalar", "diagonal_majorant"):
            raise ValueError("metric_policy must be 'scalar' or 'diagonal_majorant'")
        if self.stop_x_tol <= 0 or self.stop_f_tol <= 0:
            raise ValueError("stopping tolerances must be > 0")

    @property
    def alpha(self) -> float:
        return 0.5 / (1.0 - self.gamma_cap)

    def alpha_bar(self, nu_lo: float) -> float:
        """Descent constant: f drops by at least ``alpha_bar * ||chi_k||^2``."""
        return nu_lo * (self.alpha - 0.5)

    def beta(self, nu_hi: float) -> float:
        return math.sqrt(nu_hi) / self.gamma


@dataclass
class SolverTrace:
    """Per-outer-iteration telemetry of a solver run.

    ``f`` has one leading entry for the starting point; everything else
    has one entry per outer iteration.  ``chi_norm`` is the norm of the
    stacked inner steps, ``surrogate_f`` the frozen-weight majorant
    objective at the new iterate (NaN for the baseline solver, which has
    no surrogate), and the two ``*_ok`` flags report whether the
    sufficient-decrease and inexact-optimality monitors held on every
    inner step of that outer iteration.
    """

    f: np.ndarray
    chi_norm: np.ndarray
    step_norm: np.ndarray
    subgrad_residual: np.ndarray
    surrogate_f: np.ndarray
    sufficient_decrease_ok: np.ndarray
    inexact_optimality_ok: np.ndarray
    inner_objective: list[np.ndarray] | None = None
    inner_iterates: list[list[np.ndarray]] | None = None
    prox_info: dict = field(default_factory=dict)


@dataclass
class SolveResult:
    x: np.ndarray
    trace: SolverTrace
    outer_iters: int
    total_inner: int
    converged: bool


class _TraceBuilder:
    def __init__(self, f0: float, record_inner: bool):
        self.f = [f0]
        self.chi_norm = []
        self.step_norm = []
        self.subgrad_residual = []
        self.surrogate_f = []
        self.dec_ok = []
        self.opt_ok = []
        self.inner_objective = [] if record_inner else None
        self.inner_iterates = [] if record_inner else None
        self.prox_info = {}

    def row(self, f, chi, step, resid, surro, dec, opt):
        self.f.append(f)
        self.chi_norm.append(chi)
        self.step_norm.append(step)
        self.subgrad_residual.append(resid)
        self.surrogate_f.append(surro)
        self.dec_ok.append(dec)
        self.opt_ok.append(opt)

    def build(self) -> SolverTrace:
        return SolverTrace(
            f=np.array(self.f),
            chi_norm=np.array(self.chi_norm),
            step_norm=np.array(self.step_norm),
            subgrad_residual=np.array(self.subgrad_residual),
            surrogate_f=np.array(self.surrogate_f),
            sufficient_decrease_ok=np.array(self.dec_ok, dtype=bool),
            inexact_optimality_ok=np.array(self.opt_ok, dtype=bool),
            inner_objective=self.inner_objective,
            inner_iterates=self.inner_iterates,
            prox_info=self.prox_info,
        )


def check_sufficient_decrease(l_before, l_after, inner_step, grad_anchor, metric, alpha):
    """Relative-error sufficient-decrease condition of one inner step.

    ``l(x+) + <x+ - x, grad h(x)> + alpha ||x+ - x||_A^2 <= l(x)``,
    allowed a 1e-10 relative float slack.  Holds automatically for exact
    prox steps with step sizes below ``1 - gamma_cap``.
    """
    lhs = (
        l_after
        + float(np.vdot(inner_step, grad_anchor).real)
        + alpha * metric.norm(inner_step) ** 2
    )
    return bool(lhs <= l_before + _MONITOR_REL_SLACK * (1.0 + abs(l_before)))


def check_inexact_optimality(residual, step_a_norm, beta):
    """Relative-error optimality condition: ``residual <= beta ||step||_A``."""
    return bool(residual <= beta * step_a_norm + _MONITOR_ABS_SLACK)


def stopping_test(x_prev, x_next, f_prev, f_next, cfg: SolverConfig) -> bool:
    """Joint relative stagnation test on iterates and objective values.

    Both must hold: ``||x_k - x_{k+1}|| < tol_x ||x_{k+1}||`` and
    ``|f_k - f_{k+1}| < tol_f |f_{k+1}|`` (absolute comparison when
    ``f_{k+1}`` is exactly zero).  Exact equality always passes.
    """
    dx = float(np.linalg.norm(np.asarray(x_prev) - np.asarray(x_next)))
    ok_x = dx == 0.0 or dx < cfg.stop_x_tol * float(np.linalg.norm(x_next))
    df = abs(f_prev - f_next)
    if f_next == 0.0:
        ok_f = df < cfg.stop_f_tol
    else:
        ok_f = df == 0.0 or df < cfg.stop_f_tol * abs(f_next)
    return ok_x and ok_f


def _coef_transform(analysis: LinearOperator, metric: Metric):
    """Validate the analysis/metric pairing; return identity-ness flag.

    The coefficient-domain prox is exact only if the analysis operator is
    orthonormal, and a non-scalar diagonal metric commutes with it only in
    the identity case, so: identity analysis allows any diagonal metric,
    an orthonormal wavelet analysis requires a scalar one.
    """
    if isinstance(analysis, Identity):
        return True
    if isinstance(analysis, DWT):
        if not metric.is_scalar:
            raise ValueError(
                "non-scalar diagonal metric does not commute with a wavelet "
                "analysis operator; use the scalar metric policy"
            )
        return False
    raise ValueError(
        f"analysis operator {type(analysis).__name__} is not known to be "
        "orthonormal; the coefficient-domain prox would be inexact"
    )


def _prepare(smooth: LeastSquares, analysis: LinearOperator, cfg: SolverConfig, x0):
    if tuple(analysis.input_shape) != tuple(smooth.shape):
        raise ValueError("analysis operator and smooth term shapes differ")
    metric = smooth.metric(cfg.metric_policy)
    identity_analysis = _coef_transform(analysis, metric)
    if x0 is None:
        x0 = smooth.operator.adjoint(smooth.data)
    x0 = np.asarray(x0, dtype=float)
    if tuple(x0.shape) != tuple(smooth.shape):
        raise ValueError(f"x0 shape {x0.shape} != problem shape {smooth.shape}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    return metric, identity_analysis, x0


def c2fb(
    smooth: LeastSquares,
    penalty: CompositePenalty,
    cfg: SolverConfig | None = None,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Composite-function forward-backward solver.

    Outer iteration ``k``: freeze the tangent-majorant weights
    ``lam_p = phi'(psi_p(x_k))``; run ``cfg.inner_iters`` preconditioned
    forward-backward steps on ``h + sum_p lam_p psi_p`` (weighted soft
    threshold for ``psi = abs``, weighted quadratic shrinkage for
    ``psi = sq``); re-anchor.  Stops when the stagnation test of
    :func:`stopping_test` passes or ``cfg.max_outer`` is reached.

    Parameters
    ----------
    smooth : LeastSquares
        The quadratic data term.
    penalty : CompositePenalty
        The composite regulariser.
    cfg : SolverConfig, optional
    x0 : ndarray, optional
        Start point; defaults to the back-projection ``H^T y``.
    """
    cfg = cfg or SolverConfig()
    analysis = penalty.analysis
    metric, identity_analysis, x0 = _prepare(smooth, analysis, cfg, x0)
    a_coef = metric.diag / cfg.gamma if identity_analysis else metric.nu_hi / cfg.gamma
    alpha, beta = cfg.alpha, cfg.beta(metric.nu_hi)
    scaled_diag = metric.diag / cfg.gamma
    take_prox = prox_weighted_l1 if penalty.psi == "abs" else prox_weighted_sq

    x = x0
    u = analysis.apply(x)
    h_val, grad = smooth.value_and_grad(x)
    f_val = h_val + penalty.value_of_coeffs(u)
    if not np.isfinite(f_val):
        raise RuntimeError("objective is non-finite at the starting point")
    tr = _TraceBuilder(f_val, cfg.record_inner)

    converged = False
    outer = 0
    for k in range(cfg.max_outer):
        lam = penalty.weights_of_coeffs(u)
        offset = penalty.majorant_offset(u, lam)
        x_t, u_t, h_t, grad_t = x, u, h_val, grad
        chi_sq = 0.0
        dec_ok = True
        opt_ok = True
        if cfg.record_inner:
            tr.inner_objective.append(
                np.empty(cfg.inner_iters + 1)
            )
            tr.inner_objective[-1][0] = h_t + penalty.surrogate_of_coeffs(lam, u_t)
            tr.inner_iterates.append([])
        u_z = u_t
        for i in range(cfg.inner_iters):
            z = x_t - cfg.gamma * grad_t / metric.diag
            u_z = analysis.apply(z) if not identity_analysis else z
            u_next = take_prox(u_z, lam, a_coef)
            x_next = analysis.adjoint(u_next) if not identity_analysis else u_next
            step = x_next - x_t
            chi_sq += float(np.vdot(step, step).real)
            if cfg.monitor_inexact:
                l_before = penalty.surrogate_of_coeffs(lam, u_t)
                l_after = penalty.surrogate_of_coeffs(lam, u_next)
                dec_ok &= check_sufficient_decrease(
                    l_before, l_after, step, grad_t, metric, alpha
                )
                residual, _ = prox_subgradient(x_t, x_next, scaled_diag, grad_t)
                opt_ok &= check_inexact_optimality(residual, metric.norm(step), beta)
            h_next, grad_next = smooth.value_and_grad(x_next)
            if cfg.record_inner:
                tr.inner_objective[-1][i + 1] = h_next + penalty.surrogate_of_coeffs(
                    lam, u_next
                )
                tr.inner_iterates[-1].append(x_next)
            x_t, u_t, h_t, grad_t = x_next, u_next, h_next, grad_next

        # stationarity residual at the new anchor, with re-anchored weights;
        # the abs-kind coefficient subgradient comes from the prox identity
        lam_new = penalty.weights_of_coeffs(u_t)
        if penalty.psi == "abs":
            r_coef = a_coef * (u_z - u_t) / lam
        else:
            r_coef = 2.0 * u_t
        v_img = lam_new * r_coef
        if not identity_analysis:
            v_img = analysis.adjoint(v_img)
        resid_new = float(np.linalg.norm(grad_t + v_img))

        f_new = h_t + penalty.value_of_coeffs(u_t)
        if not np.isfinite(f_new):
            raise RuntimeError(f"objective became non-finite at outer iteration {k}")
        surro = h_t + penalty.surrogate_of_coeffs(lam, u_t) + offset
        tr.row(
            f_new,
            math.sqrt(chi_sq),
            float(np.linalg.norm(x_t - x)),
            resid_new,
            surro,
            dec_ok,
            opt_ok,
        )
        outer = k + 1
        stop = stopping_test(x, x_t, f_val, f_new, cfg)
        x, u, h_val, grad, f_val = x_t, u_t, h_t, grad_t, f_new
        if stop:
            converged = True
            break

    return SolveResult(
        x=x,
        trace=tr.build(),
        outer_iters=outer,
        total_inner=outer * cfg.inner_iters,
        converged=converged,
    )


def vmfb(
    smooth: LeastSquares,
    penalty: DirectProxPenalty,
    cfg: SolverConfig | None = None,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Classic variable-metric forward-backward with a direct prox of ``g``.

    Single-loop baseline: gradient step on ``h``, then the exact proximity
    operator of the (possibly nonconvex) penalty, applied coefficient-wise
    behind the orthonormal analysis operator.  The objective sequence is
    recorded but not guaranteed monotone for nonconvex penalties.
    """
    cfg = cfg or SolverConfig(algo="vmfb")
    analysis = penalty.analysis
    metric, identity_analysis, x0 = _prepare(smooth, analysis, cfg, x0)
    a_coef = metric.diag / cfg.gamma if identity_analysis else metric.nu_hi / cfg.gamma
    alpha, beta = cfg.alpha, cfg.beta(metric.nu_hi)
    scaled_diag = metric.diag / cfg.gamma

    x = x0
    u = analysis.apply(x)
    h_val, grad = smooth.value_and_grad(x)
    f_val = h_val + penalty.value_of_coeffs(u)
    if not np.isfinite(f_val):
        raise RuntimeError("objective is non-finite at the starting point")
    tr = _TraceBuilder(f_val, cfg.record_inner)

    converged = False
    outer = 0
    for k in range(cfg.max_outer):
        z = x - cfg.gamma * grad / metric.diag
        u_z = analysis.apply(z) if not identity_analysis else z
        u_next = penalty.prox_coeffs(u_z, a_coef, info=tr.prox_info)
        x_next = analysis.adjoint(u_next) if not identity_analysis else u_next
        step = x_next - x

        residual, v = prox_subgradient(x, x_next, scaled_diag, grad)
        dec_ok = True
        opt_ok = True
        if cfg.monitor_inexact:
            dec_ok = check_sufficient_decrease(
                penalty.value_of_coeffs(u),
                penalty.value_of_coeffs(u_next),
                step,
                grad,
                metric,
                alpha,
            )
            opt_ok = check_inexact_optimality(residual, metric.norm(step), beta)

        h_next, grad_next = smooth.value_and_grad(x_next)
        f_new = h_next + penalty.value_of_coeffs(u_next)
        if not np.isfinite(f_new):
            raise RuntimeError(f"objective became non-finite at iteration {k}")
        resid_new = float(np.linalg.norm(grad_next + v))
        step_norm = float(np.linalg.norm(step))
        if cfg.record_inner:
            tr.inner_objective.append(np.array([f_val, f_new]))
            tr.inner_iterates.append([x_next])
        tr.row(f_new, step_norm, step_norm, resid_new, float("nan"), dec_ok, opt_ok)
        outer = k + 1
        stop = stopping_test(x, x_next, f_val, f_new, cfg)
        x, u, h_val, grad, f_val = x_next, u_next, h_next, grad_next, f_new
        if stop:
            converged = True
            break

    return SolveResult(
        x=x,
        trace=tr.build(),
        outer_iters=outer,
        total_inner=outer,
        converged=converged,
    )


def stationarity_residual(
    smooth: LeastSquares,
    penalty: CompositePenalty,
    x: np.ndarray,
    abs_subgrad: np.ndarray | None = None,
) -> float:
    """Norm of a composite-objective subgradient at ``x``.

    Computes ``||grad h(x) + W^T (lam(x) * r)||`` where ``r`` are
    coefficient subgradients of ``psi``: ``2 [Wx]_p`` for the squared
    kind, and for the absolute kind either the supplied ``abs_subgrad``
    (e.g. extracted from a prox step) or the sign vector.
    """
    u = penalty.analysis.apply(x)
    lam = penalty.weights_of_coeffs(u)
    if penalty.psi == "sq":
        r = 2.0 * u
    else:
        r = np.sign(u) if abs_subgrad is None else abs_subgrad
    v = lam * r
    if not isinstance(penalty.analysis, Identity):
        v = penalty.analysis.adjoint(v)
    return float(np.linalg.norm(smooth.grad(x) + v))
