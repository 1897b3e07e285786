"""
LMS and RLS on a pure sinusoid
==============================

A noiseless sinusoid at w = pi/9 is perfectly predicted by two taps, with
weights [2 cos w, -1]. We look at the error surface of that two-tap
predictor, then watch LMS and RLS walk towards its minimum.
"""

import math

import numpy as np

from formantrack.adaptive import LmsConfig, RlsConfig, errors_of, iterations_to_converge, run_predictor
from formantrack.analysis import (autocorr_matrix_2tap, eigenvalue_spread, error_surface,
                                  sym_eigenvalues, wiener_solution)
from formantrack.signal_io import gen_sinusoid

omega = math.pi / 9

# correlation matrix of a unit-power sinusoid and its eigenvalue spread
R, p = autocorr_matrix_2tap(omega)
eig = sym_eigenvalues(R)
print("eigenvalues of R:", np.round(eig, 4), " spread:", round(eigenvalue_spread(eig), 2))

# the surface is a long narrow valley; its floor is the Wiener solution
w_opt = wiener_solution(R, p)
surface = error_surface(1.0, p, R)
print("Wiener solution:", np.round(w_opt, 4), " grid minimum:", surface.argmin())

# run both predictors from zero weights
x = gen_sinusoid(1.0, omega, 1000)
short = gen_sinusoid(1.0, omega, 101)
for cfg in (LmsConfig(0.5), RlsConfig(0.5), RlsConfig(0.8), RlsConfig(0.9)):
    recs = run_predictor(x, cfg, order=2, decimate=100)
    n = iterations_to_converge(errors_of(recs), threshold=1e-2, hold=50)
    print(f"{cfg!r:38s} settles after {n} iterations")

# LMS creeps along the valley floor, so its weights are still short of
# the optimum after a hundred samples while RLS is already there
for cfg in (LmsConfig(0.5), RlsConfig(0.8)):
    recs = run_predictor(short, cfg, order=2, decimate=100)
    print(f"{cfg.method.upper()} weights at n=100:", np.round(recs[-1].weights_snapshot, 4))
