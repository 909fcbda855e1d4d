"""
Revivals need a commensurate spectrum
=====================================

A finite clock with equally spaced levels returns to full coherence every
2 pi hbar c^2 / (dE g dx).  Jiggle the gaps by under a percent and the
revivals are gone for good.
"""

import numpy as np

from tdecoherence.coherence import FixedHeights, revival_time, visibility
from tdecoherence.geometry import SI
from tdecoherence.internal import InternalSpectrum

omega = 2.4e15
law = FixedHeights(9.81, 1e-6)
n = np.arange(30)
ladder = InternalSpectrum(n * SI.hbar * omega, np.full(30, 1 / 30))
T = revival_time(ladder, law)
print(f"equal ladder: T_rev = {T:.4e} s, V at 1, 2, 3 periods:",
      [f"{visibility(ladder, law(k * T)):.12f}" for k in (1, 2, 3)])

rng = np.random.default_rng(1)
eta = np.concatenate([[0.0], rng.uniform(-0.01, 0.01, 29)])
rough = InternalSpectrum(n * SI.hbar * omega * (1 + eta), np.full(30, 1 / 30))
print("perturbed ladder: revival_time ->", revival_time(rough, law))
v = visibility(rough, law(np.arange(1, 1001) * T))
print(f"best visibility at the first 1000 would-be revivals: {v.max():.3f} (period #{v.argmax() + 1})")
