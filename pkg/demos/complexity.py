"""
Counting arithmetic in LMS, Levinson-Durbin and RLS
===================================================

Every multiply, add and divide of the three model estimators is counted
on one second of synthetic speech at order 8.
"""

from formantrack.analysis import complexity_report

report = complexity_report(order=8, n_samples=8000)
print(report.format_table())
print()
for name, per in report.per_sample().items():
    print(f"{name:16s} {per:8.1f} operations per sample")
