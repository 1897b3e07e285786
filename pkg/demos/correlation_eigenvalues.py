"""
Eigenvalue spread of a speech autocorrelation matrix
====================================================

Eleven autocorrelation lags of a voiced speech segment are turned into a
Toeplitz matrix whose eigenvalues range over two orders of magnitude.
That spread is what slows gradient-descent adaptation on speech.
"""

import numpy as np

from formantrack.analysis import eigenvalue_spread, sym_eigenvalues, toeplitz_from_autocorr

r = [360.54, 268.05, 137.39, 68.63, 11.05, -57.60, -78.29, -89.97, -146.76, -177.18, -149.36]
R = toeplitz_from_autocorr(r)

# Jacobi rotations, checked against LAPACK
v = sym_eigenvalues(R)
print("eigenvalues:", np.round(v, 1))
print("max difference from numpy.linalg.eigvalsh:",
      np.max(np.abs(v - np.sort(np.linalg.eigvalsh(R))[::-1])))

# the eigenvalues sum to the trace, 11 r(0)
print("trace:", np.trace(R), " sum of eigenvalues:", round(v.sum(), 6))
print("eigenvalue spread:", round(eigenvalue_spread(v), 1))
