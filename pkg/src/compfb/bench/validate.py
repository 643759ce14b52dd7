"""Invariant suite shared by ``bench selftest``, ``bench prox-oracle``
and the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .. import linops, prox
from ..linops import DWT, Composition, Identity, make_motion_blur
from ..penalty import CompositePenalty, DirectProxPenalty, Linear, LogSum, PowerConcave
from ..smooth import LeastSquares
from ..solver import SolverConfig, c2fb, vmfb

__all__ = ["ProxSuiteResult", "random_prox_instance", "prox_oracle_suite", "selftest"]

PROX_KINDS = ("l1", "sq", "logsum", "lrho")


@dataclass
class ProxSuiteResult:
    kind: str
    trials: int
    max_abs_dev: float
    max_obj_gap: float
    elapsed_s: float
    ok: bool


def random_prox_instance(kind: str, rng: np.random.Generator):
    """One random scalar prox instance: (x, a, params)."""
    x = rng.uniform(-5.0, 5.0)
    a = rng.uniform(0.1, 10.0)
    if kind in ("l1", "sq"):
        params = {"lam": rng.uniform(0.0, 3.0)}
    elif kind == "logsum":
        params = {"theta": rng.uniform(0.01, 3.0), "eps": rng.uniform(1e-3, 1.0)}
    elif kind == "lrho":
        params = {"theta": rng.uniform(0.01, 3.0), "rho": rng.uniform(0.05, 0.95)}
    else:
        raise ValueError(f"unknown prox kind {kind!r}")
    return x, a, params


def closed_form_prox(kind: str, x: float, a: float, params: dict) -> float:
    if kind == "l1":
        return float(prox.prox_weighted_l1(x, params["lam"], a))
    if kind == "sq":
        return float(prox.prox_weighted_sq(x, params["lam"], a))
    if kind == "logsum":
        return float(prox.prox_logsum(x, params["theta"], params["eps"], a))
    if kind == "lrho":
        return float(prox.prox_lrho(x, params["theta"], params["rho"], a))
    raise ValueError(f"unknown prox kind {kind!r}")


def prox_oracle_suite(
    kind: str, trials: int = 500, seed: int = 0, step: float = 1e-5
) -> ProxSuiteResult:
    """Cross-check a prox implementation against the grid oracle.

    Passes when every instance lands within two grid steps of the oracle
    argmin and its objective value is no worse than the oracle's plus 1e-9.
    """
    rng = np.random.default_rng(seed)
    tic = time.perf_counter()
    max_dev = 0.0
    max_gap = -np.inf
    for _ in range(trials):
        x, a, params = random_prox_instance(kind, rng)
        p = closed_form_prox(kind, x, a, params)
        g = prox.prox_oracle(kind, x, a, params, step=step)
        max_dev = max(max_dev, abs(p - g))
        obj_p = float(prox.prox_objective(kind, p, x, a, params))
        obj_g = float(prox.prox_objective(kind, g, x, a, params))
        max_gap = max(max_gap, obj_p - obj_g)
    elapsed = time.perf_counter() - tic
    ok = max_dev <= 2.0 * step and max_gap <= 1e-9
    return ProxSuiteResult(kind, trials, max_dev, float(max_gap), elapsed, ok)


def _adjoint_ok(op, rng, n_pairs=20, tol=1e-10) -> bool:
    for _ in range(n_pairs):
        x = rng.standard_normal(op.input_shape)
        y = rng.standard_normal(op.output_shape)
        ax = op.apply(x)
        aty = op.adjoint(y)
        lhs = float(np.vdot(ax, y).real)
        rhs = float(np.vdot(x, aty).real)
        scale = float(np.linalg.norm(ax) * np.linalg.norm(y)) + 1.0
        if abs(lhs - rhs) > tol * scale:
            return False
    return True


def selftest(verbose: bool = True) -> bool:
    """Run the library invariant suite; prints one line per check."""
    rng = np.random.default_rng(7)
    results: list[tuple[str, bool]] = []

    def check(name, fn):
        ok = bool(fn())
        results.append((name, ok))
        if verbose:
            print(f"[{'ok' if ok else 'FAIL':^6}] {name}")

    shape = (32, 32)
    blur = make_motion_blur(5, 60.0, shape)
    wavelet = DWT(shape, levels=3)

    check("adjoint: identity", lambda: _adjoint_ok(Identity(shape), rng))
    check("adjoint: motion blur", lambda: _adjoint_ok(blur, rng))
    check("adjoint: wavelet", lambda: _adjoint_ok(wavelet, rng))
    check(
        "adjoint: composition",
        lambda: _adjoint_ok(Composition(wavelet, blur), rng),
    )

    x = rng.standard_normal(shape)
    coeffs = wavelet.apply(x)
    check(
        "wavelet isometry",
        lambda: abs(np.linalg.norm(coeffs) - np.linalg.norm(x))
        <= 1e-10 * np.linalg.norm(x),
    )
    check(
        "wavelet perfect reconstruction",
        lambda: np.max(np.abs(wavelet.adjoint(coeffs) - x)) <= 1e-10,
    )
    def constants_ok():
        c = wavelet.apply(np.ones(shape))
        ll = shape[0] >> wavelet.levels  # approximation block; the rest is detail
        c[:ll, :ll] = 0.0
        return np.max(np.abs(c)) <= 1e-10

    check("wavelet annihilates constants", constants_ok)
    check(
        "blur kernel normalised and nonnegative",
        lambda: blur.kernel.sum() == 1.0 and blur.kernel.min() >= 0.0,
    )

    est = linops.operator_norm_sq(blur)
    dft = float(np.max(np.abs(blur.spectrum()) ** 2))
    check(
        "power iteration matches DFT norm",
        lambda: est.converged and abs(est.raw - dft) <= 1e-6 * dft,
    )

    for kind in PROX_KINDS:
        res = prox_oracle_suite(kind, trials=60, seed=11)
        check(f"prox vs grid oracle: {kind}", lambda r=res: r.ok)

    def majorant_ok(pen):
        anchors = rng.standard_normal((20,) + shape)
        points = rng.standard_normal((20,) + shape)
        for xa, xb in zip(anchors, points):
            g = pen.value(xb)
            if pen.majorant_value(xb, xa) < g - 1e-9 * (1.0 + abs(g)):
                return False
            if abs(pen.majorant_value(xa, xa) - pen.value(xa)) > 1e-12 * (
                1.0 + abs(pen.value(xa))
            ):
                return False
        return True

    check(
        "tangent majorant: log-sum",
        lambda: majorant_ok(CompositePenalty(LogSum(2.0, 0.1), "abs", wavelet)),
    )
    check(
        "tangent majorant: power",
        lambda: majorant_ok(
            CompositePenalty(PowerConcave(1.5, 0.4, 0.05), "abs", wavelet)
        ),
    )
    check(
        "tangent majorant: cauchy",
        lambda: majorant_ok(CompositePenalty(LogSum(1.0, 0.2), "sq", wavelet)),
    )

    y = blur.apply(rng.standard_normal(shape))
    smooth = LeastSquares(blur, y)

    def quad_majorant_ok(policy):
        metric = smooth.metric(policy)
        for _ in range(20):
            xa = rng.standard_normal(shape)
            xb = rng.standard_normal(shape)
            lhs = smooth.value(xb)
            rhs = (
                smooth.value(xa)
                + float(np.vdot(xb - xa, smooth.grad(xa)).real)
                + 0.5 * metric.norm(xb - xa) ** 2
            )
            if lhs > rhs + 1e-9 * (1.0 + abs(lhs)):
                return False
        return True

    check("quadratic majorant: scalar metric", lambda: quad_majorant_ok("scalar"))
    check(
        "quadratic majorant: diagonal metric",
        lambda: quad_majorant_ok("diagonal_majorant"),
    )

    def grad_ok():
        xa = rng.standard_normal((8, 8))
        s2 = LeastSquares(
            make_motion_blur(3, 30.0, (8, 8)), rng.standard_normal((8, 8))
        )
        g = s2.grad(xa)
        for idx in np.ndindex(8, 8):
            hstep = 1e-6 * (1.0 + abs(xa[idx]))
            xp = xa.copy()
            xm = xa.copy()
            xp[idx] += hstep
            xm[idx] -= hstep
            fd = (s2.value(xp) - s2.value(xm)) / (2 * hstep)
            if abs(fd - g[idx]) > 1e-5 * (1.0 + abs(fd)):
                return False
        return True

    check("gradient vs finite differences", grad_ok)

    def run_monitors_ok():
        pen = CompositePenalty(LogSum(5.0, 1e-3), "abs", wavelet)
        cfg = SolverConfig(inner_iters=5, max_outer=40, monitor_inexact=True)
        result = c2fb(smooth, pen, cfg)
        tr = result.trace
        descent = np.all(
            np.diff(tr.f) <= 1e-10 * (1.0 + np.abs(tr.f[:-1]))
        )
        return (
            descent
            and bool(np.all(tr.sufficient_decrease_ok))
            and bool(np.all(tr.inexact_optimality_ok))
        )

    check("solver descent and relative-error monitors", run_monitors_ok)

    def reduction_ok():
        pen = CompositePenalty(Linear(1.0), "abs", wavelet)
        direct = DirectProxPenalty("l1", 1.0, analysis=wavelet)
        cfg = SolverConfig(inner_iters=1, max_outer=25, stop_x_tol=1e-300,
                           stop_f_tol=1e-300)
        ra = c2fb(smooth, pen, cfg)
        rb = vmfb(smooth, direct, cfg)
        return np.max(np.abs(ra.x - rb.x)) <= 1e-12 * (1.0 + np.max(np.abs(rb.x)))

    check("linear-phi reduction to the baseline", reduction_ok)

    failed = [name for name, ok in results if not ok]
    if verbose:
        print(
            f"{len(results) - len(failed)}/{len(results)} checks passed"
            + (f"; FAILED: {', '.join(failed)}" if failed else "")
        )
    return not failed
