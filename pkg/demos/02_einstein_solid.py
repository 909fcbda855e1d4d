"""
Decoherence of a warm microsphere
=================================

Model the internal energy of a composite particle as an Einstein solid:
N constituents, 3N oscillator modes.  For k_B T >> hbar omega the energy
spread approaches sqrt(3N) k_B T, and the visibility decays roughly as a
Gaussian on the time scale hbar c^2 / (Delta H0 g dx).
"""

import math

import numpy as np

from tdecoherence.coherence import (
    FixedHeights, decoherence_time, fit_gaussian_decay, gaussian_visibility, visibility_curve,
)
from tdecoherence.geometry import SI
from tdecoherence.internal import EinsteinSolid, einstein_spectrum, einstein_variance

omega, T = 1e13, 300.0
g, dx = 9.81, 1e-6

for N in (1, 5, 20):
    solid = EinsteinSolid(N, omega, T)
    dH = einstein_variance(solid)
    print(f"N={N:2d}: Delta H0 / (sqrt(3N) k_B T) = {dH / (math.sqrt(3 * N) * SI.k_B * T):.6f}, "
          f"tau_dec = {decoherence_time(dH, g, dx):.3e} s")

# explicit spectrum for N = 5 and a look at the early decay
solid = EinsteinSolid(5, omega, T)
s = einstein_spectrum(solid, 100)
tau = decoherence_time(einstein_variance(solid), g, dx)
t = np.linspace(0, 3 * tau, 301)
curve = visibility_curve(s, FixedHeights(g, dx), t)
gauss = gaussian_visibility(einstein_variance(solid), curve.delta_taus)
print(f"{len(s)} internal levels; max |V - Gaussian| over 3 tau_dec: {np.max(np.abs(curve.values - gauss)):.2e}")

a = fit_gaussian_decay(curve.times, curve.values, v_min=0.95)
print(f"fitted -ln V ~ a t^2: a * tau_dec^2 = {a * tau ** 2:.6f}  (second-cumulant value 0.5)")
