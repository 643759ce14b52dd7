"""Proximity operators under diagonal metrics, with a brute-force oracle.

Every operator here solves, coordinate by coordinate,

    minimize_t  penalty(t) + (a/2) (t - x)^2

where ``a`` is the diagonal metric weight (already including any 1/gamma
step-size scaling).  The nonconvex cases (log-sum, |t|^rho) are solved
from the stationarity equations and the surviving candidate is compared
against t = 0; on ties the nonzero root wins.  ``prox_oracle`` cross-checks
any of them by dense evaluation of the same scalar objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Metric",
    "prox_weighted_l1",
    "prox_weighted_sq",
    "prox_logsum",
    "prox_lrho",
    "prox_subgradient",
    "prox_objective",
    "prox_oracle",
]


@dataclass(frozen=True)
class Metric:
    """Diagonal positive-definite metric with its eigenvalue bounds."""

    diag: np.ndarray
    nu_lo: float = field(init=False)
    nu_hi: float = field(init=False)

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float)
        if diag.size == 0 or np.min(diag) <= 0 or not np.all(np.isfinite(diag)):
            raise ValueError("metric diagonal must be finite and strictly positive")
        diag = diag.copy()
        diag.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "nu_lo", float(np.min(diag)))
        object.__setattr__(self, "nu_hi", float(np.max(diag)))

    @classmethod
    def scalar(cls, value: float, shape) -> "Metric":
        return cls(np.full(shape, float(value)))

    @property
    def is_scalar(self) -> bool:
        return self.nu_lo == self.nu_hi

    def norm(self, x: np.ndarray) -> float:
        """Weighted norm ``||x||_A = sqrt(x^T A x)``."""
        return float(np.sqrt(np.sum(self.diag * np.square(x))))


def _broadcast_check(x, *others):
    for o in others:
        if np.ndim(o) and np.shape(o) != np.shape(x):
            raise ValueError(
                f"shape mismatch: {np.shape(x)} vs {np.shape(o)}"
            )


def prox_weighted_l1(x, lam, a):
    """Prox of ``sum lam_p |t_p|``: soft threshold at ``lam/a``."""
    x = np.asarray(x, dtype=float)
    _broadcast_check(x, lam, a)
    return np.sign(x) * np.maximum(np.abs(x) - lam / a, 0.0)


def prox_weighted_sq(x, lam, a):
    """Prox of ``sum lam_p t_p^2``: shrink each entry by ``a/(a + 2 lam)``."""
    x = np.asarray(x, dtype=float)
    _broadcast_check(x, lam, a)
    return a * x / (a + 2.0 * lam)


def prox_logsum(x, theta, eps, a):
    """Prox of ``theta * sum log(|t_p| + eps)`` (exact, nonconvex).

    On ``t >= 0`` the stationary points solve
    ``t^2 - (|x| - eps) t + (theta/a - eps |x|) = 0``; the larger root is
    the only interior local minimum and is kept whenever it exists and
    beats ``t = 0``, with the sign of ``x`` restored.
    """
    if theta <= 0 or eps <= 0:
        raise ValueError("theta and eps must be > 0")
    x = np.asarray(x, dtype=float)
    _broadcast_check(x, a)
    a = np.broadcast_to(np.asarray(a, dtype=float), x.shape)
    s = np.abs(x)
    disc = np.square(s + eps) - 4.0 * theta / a
    safe = np.sqrt(np.maximum(disc, 0.0))
    root = 0.5 * ((s - eps) + safe)
    feasible = (disc >= 0.0) & (root > 0.0)
    root = np.where(feasible, root, 0.0)
    # candidate comparison against 0; ties keep the root
    obj_root = theta * np.log(root + eps) + 0.5 * a * np.square(root - s)
    obj_zero = theta * np.log(eps) + 0.5 * a * np.square(s)
    take = feasible & (obj_root <= obj_zero)
    return np.where(take, np.sign(x) * root, 0.0)


def prox_lrho(x, theta, rho, a, newton_tol=1e-12, newton_max=100, info=None):
    """Prox of ``theta * sum |t_p|^rho`` with ``0 < rho < 1``.

    The positive stationary equation ``theta rho t^(rho-1) + a (t - |x|) = 0``
    is convex in ``t`` with at most one root above the inflection point
    ``t_min = (theta rho (1-rho) / a)^(1/(2-rho))``; Newton from ``t = |x|``
    decreases monotonically onto it.  Entries where Newton stalls fall back
    to bisection on ``[t_min, |x|]`` (count reported in ``info`` when a dict
    is passed).  The root is kept only if it beats ``t = 0``.
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    _broadcast_check(x, a)
    shape = x.shape
    a = np.broadcast_to(np.asarray(a, dtype=float), shape).astype(float).ravel()
    x = x.ravel()
    s = np.abs(x)
    out = np.zeros_like(s)
    t_min = (theta * rho * (1.0 - rho) / a) ** (1.0 / (2.0 - rho))

    def grad(t, mask):
        return theta * rho * t ** (rho - 1.0) + a[mask] * (t - s[mask])

    # a root can only exist when the gradient dips below zero on (0, |x|)
    candidate = (s > 0) & (t_min < s)
    if np.any(candidate):
        candidate[candidate] &= grad(t_min[candidate], candidate) <= 0.0
    if np.any(candidate):
        sc, ac, tc = s[candidate], a[candidate], t_min[candidate]
        t = sc.copy()
        scale = 1.0 + ac * sc
        for _ in range(newton_max):
            gval = theta * rho * t ** (rho - 1.0) + ac * (t - sc)
            if np.all(np.abs(gval) <= newton_tol * scale):
                break
            dval = theta * rho * (rho - 1.0) * t ** (rho - 2.0) + ac
            dval = np.maximum(dval, 1e-300)  # grazing root: G' -> 0 at t_min
            t = np.clip(t - gval / dval, tc, sc)
        gval = theta * rho * t ** (rho - 1.0) + ac * (t - sc)
        stuck = np.abs(gval) > 1e6 * newton_tol * scale
        if np.any(stuck):
            lo, hi = tc[stuck].copy(), sc[stuck].copy()
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = theta * rho * mid ** (rho - 1.0) + ac[stuck] * (mid - sc[stuck])
                hi = np.where(gm > 0.0, mid, hi)
                lo = np.where(gm > 0.0, lo, mid)
            t[stuck] = 0.5 * (lo + hi)
            if info is not None:
                info["bisection_fallbacks"] = info.get("bisection_fallbacks", 0) + int(
                    np.count_nonzero(stuck)
                )
        obj_root = theta * t**rho + 0.5 * ac * np.square(t - sc)
        obj_zero = 0.5 * ac * np.square(sc)
        keep = obj_root <= obj_zero
        res = np.where(keep, t, 0.0)
        out[candidate] = res
    return (np.sign(x) * out).reshape(shape)


def prox_subgradient(x_in, x_out, scaled_diag, grad_anchor):
    """Subgradient certificate of a prox step, and its optimality residual.

    For ``x_out = prox_l^M(x_in - M^{-1} grad_anchor)`` with diagonal
    ``M = scaled_diag``, the prox optimality condition selects

        v = M (x_in - x_out) - grad_anchor  in  dl(x_out),

    and the returned residual is ``||grad_anchor + v|| = ||M (x_in - x_out)||``.
    """
    x_in = np.asarray(x_in, dtype=float)
    x_out = np.asarray(x_out, dtype=float)
    weighted = scaled_diag * (x_in - x_out)
    v = weighted - grad_anchor
    return float(np.linalg.norm(weighted)), v


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def prox_objective(kind: str, t, x: float, a: float, params: dict) -> np.ndarray:
    """Scalar prox objective ``penalty(t) + (a/2)(t - x)^2`` on a grid."""
    t = np.asarray(t, dtype=float)
    quad = 0.5 * a * np.square(t - x)
    if kind == "l1":
        return params["lam"] * np.abs(t) + quad
    if kind == "sq":
        return params["lam"] * np.square(t) + quad
    if kind == "logsum":
        return params["theta"] * np.log(np.abs(t) + params["eps"]) + quad
    if kind == "lrho":
        return params["theta"] * np.abs(t) ** params["rho"] + quad
    raise ValueError(f"unknown prox kind {kind!r}")


def prox_oracle(
    kind: str,
    x: float,
    a: float,
    params: dict,
    step: float = 1e-5,
    span: float | None = None,
) -> float:
    """Grid-search minimiser of the scalar prox objective, at resolution ``step``.

    Scans a coarse grid over ``[-span, span]`` first, then refines at
    ``step`` around both the coarse winner and the origin (these cover the
    two basins every supported penalty can have), so the result matches an
    exhaustive ``step``-grid scan while staying fast.  Independent of the
    closed-form/Newton code paths above by construction.
    """
    if span is None:
        span = abs(x) + 1.0
    coarse_step = max(step, 1e-3)
    grid = np.arange(-span, span + coarse_step, coarse_step)
    vals = prox_objective(kind, grid, x, a, params)
    best = grid[int(np.argmin(vals))]

    def refine(centre: float) -> float:
        local = np.arange(centre - 2 * coarse_step, centre + 2 * coarse_step, step)
        lv = prox_objective(kind, local, x, a, params)
        return float(local[int(np.argmin(lv))])

    cands = np.array([refine(best), refine(0.0)])
    cvals = prox_objective(kind, cands, x, a, params)
    return float(cands[int(np.argmin(cvals))])
