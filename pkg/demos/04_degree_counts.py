"""Reproduce the three curve-degree counts numerically.

Slicing the determinant curve with a random projective line yields 4
points (a quartic), slicing the kernel curve with a random hyperplane
yields 6, and the flag-producing points number at most 12 -- for random
matrices, usually exactly 12.
"""

from tridiag4 import Pencil, make_matrix, run_experiments
from tridiag4.degrees import degree_of_det_curve, degree_of_kernel_curve, section_zero_count

a = make_matrix("gaussian", 4, seed=99)
pencil = Pencil(a)

print("one matrix, one experiment each:")
print(f"  determinant-curve degree (expected 4): {degree_of_det_curve(pencil, seed=1)}")
print(f"  kernel-curve degree      (expected 6): {degree_of_kernel_curve(pencil, seed=1)}")
print(f"  flag points             (at most 12): {section_zero_count(pencil)}")

print("\nfull report with 3 independent trials:")
report = run_experiments(a, trials=3, seed=99)
for entry in report.per_trial_detail:
    print(f"  trial {entry['trial']}: deg_D={entry['deg_D']}  deg_C={entry['deg_C']}")
print(f"  modal: deg_D={report.deg_det_curve}, deg_C={report.deg_kernel_curve}, zeros={report.section_zero_count}")
