"""compfb: forward-backward solvers for composite nonconvex penalties.

Minimises ``f(x) = 1/2 ||Hx - y||^2 + sum_p phi(psi_p(x))`` where ``phi``
is concave increasing (log-sum, smoothed power, or linear) and ``psi_p``
is the absolute value or square of an analysis coefficient.  The main
solver majorises ``phi`` by its tangent and iterates a variable-metric
forward-backward scheme on the resulting reweighted surrogate; the
classic single-loop algorithm with the exact penalty prox is included
as a baseline, together with a deblurring benchmark harness.
"""

from .linops import (
    DWT,
    CircularConvolution,
    Composition,
    Identity,
    LinearOperator,
    NormEstimate,
    daubechies_lowpass,
    dwt_forward,
    dwt_inverse,
    make_motion_blur,
    operator_norm_sq,
)
from .penalty import (
    CompositePenalty,
    DirectProxPenalty,
    Linear,
    LogSum,
    PowerConcave,
    weighted_l1_value,
    weighted_sq_value,
)
from .prox import (
    Metric,
    prox_logsum,
    prox_lrho,
    prox_oracle,
    prox_subgradient,
    prox_weighted_l1,
    prox_weighted_sq,
)
from .smooth import LeastSquares, hessian_diag_majorant
from .solver import (
    SolveResult,
    SolverConfig,
    SolverTrace,
    c2fb,
    check_inexact_optimality,
    check_sufficient_decrease,
    stationarity_residual,
    stopping_test,
    vmfb,
)

__version__ = "0.1.0"

__all__ = [
    "CircularConvolution",
    "CompositePenalty",
    "Composition",
    "DWT",
    "DirectProxPenalty",
    "Identity",
    "LeastSquares",
    "Linear",
    "LinearOperator",
    "LogSum",
    "Metric",
    "NormEstimate",
    "PowerConcave",
    "SolveResult",
    "SolverConfig",
    "SolverTrace",
    "c2fb",
    "check_inexact_optimality",
    "check_sufficient_decrease",
    "daubechies_lowpass",
    "dwt_forward",
    "dwt_inverse",
    "hessian_diag_majorant",
    "make_motion_blur",
    "operator_norm_sq",
    "prox_logsum",
    "prox_lrho",
    "prox_oracle",
    "prox_subgradient",
    "prox_weighted_l1",
    "prox_weighted_sq",
    "stationarity_residual",
    "stopping_test",
    "vmfb",
    "weighted_l1_value",
    "weighted_sq_value",
]
