"""Tridiagonalize a random 4x4 complex matrix and inspect the result.

Every complex matrix of size up to 4 admits a unitary U with U A U*
tridiagonal.  For a generic 4x4 input the solver finds a distinguished
point on a curve attached to the pencil t0*I + t1*A + t2*A*, builds an
orthonormal flag from it, and reads the unitary off the flag.
"""

import numpy as np

from tridiag4 import make_matrix, tridiagonalize, verify

np.set_printoptions(precision=4, suppress=True, linewidth=120)

a = make_matrix("gaussian", 4, seed=2024)
print("input A =")
print(a)

result = tridiagonalize(a, seed=2024)
print(f"\nsolution path: {result.provenance}")
print(f"off-tridiagonal residual (relative): {result.off_residual:.3e}")
print(f"unitarity residual ||UU* - I||:      {result.unitarity_residual:.3e}")

print("\nT = U A U* =")
print(np.round(result.t, 8))

report = verify(result, a)
print(f"\nspectrum preserved: max matched eigenvalue gap = {report.spectrum_gap:.3e}")
for la, lt in report.matching:
    print(f"  {la:+.6f}  <->  {lt:+.6f}")

# the off-tridiagonal part really is numerically zero
mask = np.abs(np.subtract.outer(np.arange(4), np.arange(4))) >= 2
print(f"\nmax |T_ij| for |i-j| >= 2: {np.max(np.abs(result.t[mask])):.3e}")
