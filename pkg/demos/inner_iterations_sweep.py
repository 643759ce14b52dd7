"""How the inner-iteration count shapes the composite solver.

Sweeps the number of forward-backward steps taken per reweighting on a
small deblurring problem and reports, for each setting, the objective at
convergence, the reconstruction SNR and the total work.  A single
reweighting step per prox (I=1) is the plain reweighted iteration; large
I approaches solving each weighted subproblem to convergence.

Run:  python demos/inner_iterations_sweep.py
"""

from compfb import CompositePenalty, DWT, LeastSquares, LogSum, SolverConfig, c2fb, make_motion_blur
from compfb.bench import default_image_path, generate_observation, load_pgm, snr_db

truth = load_pgm(default_image_path(64))
blur = make_motion_blur(5, 60.0, truth.shape)
y, _ = generate_observation(truth, blur, isnr_db=20.0, seed=1)
smooth = LeastSquares(blur, y)
penalty = CompositePenalty(LogSum(1000.0, 1e-5), "abs", DWT(truth.shape, 4))

print(f"{'I':>4} {'outer':>6} {'total inner':>12} {'f(x*)':>15} {'SNR dB':>8}")
for inner in (1, 2, 5, 15, 50):
    res = c2fb(smooth, penalty, SolverConfig(inner_iters=inner))
    print(
        f"{inner:>4} {res.outer_iters:>6} {res.total_inner:>12} "
        f"{res.trace.f[-1]:>15.6g} {snr_db(truth, res.x):>8.2f}"
    )
print("\nthe objective and SNR stabilise once the inner loop is deep enough;")
print("the total work is governed by how often the weights are re-anchored.")
