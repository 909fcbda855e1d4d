"""
Gaussian versus exponential loss of coherence
=============================================

Trace out the internal clock and the path coherence obeys a non-Markovian
master equation whose bath correlation never decays.  Compare it with the
exact unitary evolution, and with a Markovian quantum Brownian bath, on the
same time grid.
"""

import numpy as np

from tdecoherence.coherence import decay_model_residuals, fit_log_linear
from tdecoherence.dynamics import (
    HamiltonianSpec, JointState, QuantumBrownianBath, TimeDilationBath, evolve_exact,
    evolve_master_born, trace_out_internal,
)
from tdecoherence.geometry import SI
from tdecoherence.internal import EinsteinSolid, einstein_spectrum, energy_variance

omega = 1e13
s = einstein_spectrum(EinsteinSolid(5, omega, SI.hbar * omega / SI.k_B), 30)
g, dx = 9.81, 1e-6
spec = HamiltonianSpec.fixed_heights(1e-25, s, g, (0.0, dx))
tau = SI.hbar * SI.c ** 2 / (energy_variance(s) * g * dx)

times = np.linspace(0, 2 * tau, 2001)
rho0 = np.full((2, 2), 0.5, dtype=complex)
born = evolve_master_born(TimeDilationBath(s), spec, rho0, times)

joint = JointState.superposition(s)
for t in times[::400]:
    exact = 2 * abs(trace_out_internal(evolve_exact(spec, joint, t))[0, 1])
    v_born = born.visibility[np.searchsorted(times, t)]
    print(f"t = {t / tau:4.2f} tau   exact V = {exact:.4f}   Born V = {v_born:.4f}")
# Born order: the constant kernel gives cos(Omega t); the exact curve is
# the full characteristic function. They part ways beyond weak coupling.

r = decay_model_residuals(times, born.visibility, v_min=0.5)
print(f"time-dilation bath: SSR linear / quadratic = {r['linear'] / r['quadratic']:.0f}")

rate = 3 / times[-1]
gamma = rate / (2 * 1e-25 * SI.k_B * 1e-3 * dx ** 2 / SI.hbar ** 2)
qbm = evolve_master_born(QuantumBrownianBath(1e-25, gamma, 1e-3), spec, rho0, times)
slope, _, r2 = fit_log_linear(times, np.abs(qbm.offdiag))
print(f"Brownian bath: ln|rho_01| slope {slope:.3e} /s (expected {-rate:.3e}), R^2 = {r2:.8f}")
