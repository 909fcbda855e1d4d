"""
Which clocks disagree depends on when you compare them
======================================================

Two particles floating freely at rest, seen from a laboratory that
accelerates upward at g.  Compared on the laboratory's surfaces of equal
time, the higher one has aged more, (dx/c) tanh(g t/c); compared on the
free-fall frame's surfaces of equal time they have aged the same.
"""

from tdecoherence.geometry import SI, rindler_to_minkowski
from tdecoherence.scenario import frames_report

g, dx = 9.81, 1.0
for t_f in (1.0, 1e3, 1e6, 1e8):
    rep = frames_report(dx, g, t_f, SI)
    lab = rep["equal_lab_time"]
    print(f"t = {t_f:8.0e} s  lab cut: {lab['closed_form_s']:.6e} s "
          f"(integrated {lab['integrated_s']:.6e}, rel. diff {rep['invariance_residual_rel']:.1e});  "
          f"inertial cut: {rep['equal_inertial_time_s']} s")

# the laboratory observer at x = 0 follows a hyperbola in inertial coordinates
for t in (0.0, 1e7, 3e7):
    X, T = rindler_to_minkowski(0.0, t, g, SI)
    print(f"lab time {t:.0e} s -> inertial X = {X:.4e} m, T = {T:.4e} s")
