"""
A two-level clock in a height superposition
===========================================

An atom in an equal superposition of ground and excited state, split over
two heights one micron apart.  Each branch ages at its own rate, the
internal state records which branch it took, and the fringe contrast
oscillates as |cos(omega dtau / 2)|.
"""

import numpy as np

from tdecoherence.coherence import FixedHeights, revival_time, visibility_curve
from tdecoherence.internal import two_level

omega = 2.4e15  # optical transition, rad/s
law = FixedHeights(g=9.81, delta_x=1e-6)
atom = two_level(omega)

# proper-time difference grows linearly with laboratory time
print("dtau after one day: %.3e s" % law(86400.0))

# full revival when omega * dtau = 2 pi
T = revival_time(atom, law)
print("revival period: %.4e s  (%.2f days)" % (T, T / 86400))

t = np.linspace(0, T, 9)
curve = visibility_curve(atom, law, t)
for ti, vi in zip(curve.times, curve.values):
    print(f"  t = {ti / T:5.3f} T   V = {vi:.6f}")
