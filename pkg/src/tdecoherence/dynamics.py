"""Joint path/internal dynamics under time dilation.

The coupling ``H0 (Phi/c^2 - p^2/2m^2c^2)`` is diagonal in the branch basis,
so the joint evolution is pure dephasing: every density-matrix element just
picks up a phase.  Two independent routes to the reduced path coherence are
provided, the exact unitary evolution of the joint state and the
Born-approximation master equation with the bath traced out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import write_csv
from .errors import (
    DimensionMismatch,
    GuardTripped,
    NoRealRoot,
    StepSizeTooCoarse,
    ValidationError,
    WrongSignature,
)
from .geometry import SI
from .internal import InternalSpectrum, energy_variance

__all__ = [
    "HamiltonianSpec", "JointState", "TimeDilationBath", "QuantumBrownianBath", "Trajectory",
    "TRAJECTORY_HEADER", "MAX_INTERNAL_LEVELS",
    "branch_hamiltonian", "solve_dispersion", "weak_field_inverse_metric", "dispersion_expansion",
    "evolve_exact", "trace_out_internal", "evolve_master_born",
    "PlaneWave", "translate", "boost", "bargmann_phase", "equivalence_check",
]

GUARD = 1e-3
MAX_INTERNAL_LEVELS = 4096
TRAJECTORY_HEADER = ("t_s", "re_offdiag", "im_offdiag", "visibility", "trace_error")


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Rest mass, internal spectrum and per-branch (Phi, p) values.

    ``positions`` (branch heights in m) are only needed by baths that couple
    to position, such as quantum Brownian motion.
    """

    m: float
    spectrum: InternalSpectrum
    branch_values: tuple
    external_energy: tuple | None = None
    positions: tuple | None = None

    def __post_init__(self):
        values = tuple((float(phi), float(p)) for phi, p in self.branch_values)
        if len(values) < 2:
            raise ValidationError("need at least two branches")
        if not self.m > 0:
            raise ValidationError("rest mass must be > 0")
        ext = (0.0,) * len(values) if self.external_energy is None else tuple(map(float, self.external_energy))
        if len(ext) != len(values):
            raise DimensionMismatch("external_energy needs one entry per branch")
        if self.positions is not None and len(self.positions) != len(values):
            raise DimensionMismatch("positions needs one entry per branch")
        object.__setattr__(self, "branch_values", values)
        object.__setattr__(self, "external_energy", ext)

    @classmethod
    def fixed_heights(cls, m, spectrum, g, heights):
        """Branches at rest at ``heights`` in the field Phi = g x."""
        return cls(m, spectrum, tuple((g * x, 0.0) for x in heights), positions=tuple(heights))

    @property
    def n_branches(self):
        return len(self.branch_values)

    def couplings(self, constants=SI):
        """Dimensionless branch couplings Phi_b/c^2 - p_b^2/(2 m^2 c^2), guard-checked."""
        c2 = constants.c ** 2
        out = []
        for phi, p in self.branch_values:
            if abs(phi) / c2 >= GUARD or (p / (self.m * constants.c)) ** 2 >= GUARD:
                raise GuardTripped(f"branch (Phi={phi!r}, p={p!r}) violates the weak-field/slow-motion guard")
            out.append(phi / c2 - p * p / (2.0 * self.m ** 2 * c2))
        return np.array(out)

    def coupling_differences(self, constants=SI):
        """kappa_a - kappa_b for all branch pairs, formed from Phi and p differences."""
        self.couplings(constants)
        c2 = constants.c ** 2
        phi = np.array([v[0] for v in self.branch_values])
        p2 = np.array([v[1] ** 2 for v in self.branch_values])
        return np.subtract.outer(phi, phi) / c2 - np.subtract.outer(p2, p2) / (2.0 * self.m ** 2 * c2)


def branch_hamiltonian(spec, constants=SI):
    """Energy table E[b, i] = H_ext(b) + E_i (1 + Phi_b/c^2 - p_b^2/2m^2c^2) [J]."""
    kappa = spec.couplings(constants)
    E = spec.spectrum.energies
    ext = np.array(spec.external_energy)
    return ext[:, None] + E[None, :] + E[None, :] * kappa[:, None]


# --------------------------------------------------------------------------
# dispersion relation

def weak_field_inverse_metric(phi, constants=SI, spatial_dims=1):
    """Inverse metric for g_00 = -(1 + 2 Phi/c^2) with flat spatial part."""
    G = np.eye(spatial_dims + 1)
    G[0, 0] = -1.0 / (1.0 + 2.0 * phi / constants.c ** 2)
    return G


def solve_dispersion(metric_components, p_spatial, m, internal_energy, constants=SI):
    """Energy H = c p_0 from g^{mu nu} p_mu p_nu = -(m c + H0/c)^2 (positive-energy root)."""
    G = np.atleast_2d(np.asarray(metric_components, dtype=float))
    p = np.atleast_1d(np.asarray(p_spatial, dtype=float))
    if G.shape != (p.size + 1, p.size + 1):
        raise DimensionMismatch(f"metric {G.shape} does not match {p.size} spatial momenta")
    a = G[0, 0]
    if not a < 0:
        raise WrongSignature(f"g^00 = {a!r} is not timelike (signature -+++ expected)")
    c = constants.c
    b = 2.0 * float(G[0, 1:] @ p)
    rest = m * c + internal_energy / c
    C = float(p @ G[1:, 1:] @ p) + rest * rest
    disc = b * b - 4.0 * a * C
    if disc < 0:
        raise NoRealRoot(f"discriminant {disc!r} < 0")
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a, C / q] if q != 0 else [0.0]
    p0 = max(roots)
    if not p0 > 0:
        raise NoRealRoot("no positive-energy root")
    return c * p0


def dispersion_expansion(phi, p, m, internal_energy, constants=SI):
    """H_ext + H0 (1 + Phi/c^2 - p^2 / 2m^2c^2) with H_ext the exact H0 = 0 root."""
    c2 = constants.c ** 2
    h_ext = solve_dispersion(weak_field_inverse_metric(phi, constants), p, m, 0.0, constants)
    return h_ext + internal_energy * (1.0 + phi / c2 - p * p / (2.0 * m * m * c2))


# --------------------------------------------------------------------------
# joint state and exact evolution

@dataclass(frozen=True, eq=False)
class JointState:
    """Density matrix on branches (outer index) x internal levels (inner index)."""

    rho: np.ndarray
    n_branches: int
    time: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        n = rho.shape[0]
        if rho.ndim != 2 or rho.shape[1] != n or n % self.n_branches:
            raise DimensionMismatch(f"rho of shape {rho.shape} incompatible with {self.n_branches} branches")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise ValidationError("rho is not Hermitian to 1e-12")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValidationError(f"trace of rho is {np.trace(rho)!r}, not 1")
        object.__setattr__(self, "rho", rho)

    @property
    def n_levels(self):
        return self.rho.shape[0] // self.n_branches

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.rho).min())

    def purity(self):
        return float(np.real(np.vdot(self.rho, self.rho)))

    @classmethod
    def superposition(cls, spectrum, amplitudes=(1.0, 1.0)):
        """Path superposition (normalised ``amplitudes``) times diag(populations)."""
        amp = np.asarray(amplitudes, dtype=complex)
        amp = amp / np.linalg.norm(amp)
        path = np.outer(amp, amp.conj())
        rho = np.kron(path, np.diag(spectrum.populations).astype(complex))
        return cls(rho, amp.size)


def evolve_exact(spec, initial, t, constants=SI):
    """Apply exp(-i E(b,i) t / hbar) to every element of the joint state.

    The branch-0 coupling is folded into a per-level bare energy shared by
    all branches; only ``E_i (kappa_b - kappa_0)`` stays branch dependent,
    and that difference is formed from Phi and p differences directly.  The
    ~1e-16 relative dilation shifts therefore never sit on top of the bare
    energies, and the phase factor is a rank-one product.
    """
    nb, nl = spec.n_branches, len(spec.spectrum)
    if initial.n_branches != nb or initial.n_levels != nl:
        raise DimensionMismatch(f"state is {initial.n_branches}x{initial.n_levels}, spec is {nb}x{nl}")
    if nl > MAX_INTERNAL_LEVELS:
        raise DimensionMismatch(f"{nl} internal levels exceed the exact-evolution cap {MAX_INTERNAL_LEVELS}")
    E = spec.spectrum.energies
    kappa0 = spec.couplings(constants)[0]
    dk = spec.coupling_differences(constants)[:, 0]
    scale = t / constants.hbar
    level = (E - E.min()) + E * kappa0
    bare = np.mod((np.array(spec.external_energy)[:, None] + level[None, :]) * scale, 2.0 * math.pi)
    dil = (dk[:, None] * E[None, :]) * scale
    w = np.exp(-1j * (bare + dil)).ravel()
    rho = initial.rho * np.outer(w, w.conj())
    return JointState(0.5 * (rho + rho.conj().T), nb, initial.time + t)


def trace_out_internal(state):
    """Reduced branch density matrix (partial trace over the internal index)."""
    nb, nl = state.n_branches, state.n_levels
    return np.einsum("aibi->ab", state.rho.reshape(nb, nl, nb, nl))


# --------------------------------------------------------------------------
# Born-approximation master equation

@dataclass(frozen=True, eq=False)
class TimeDilationBath:
    """Internal degrees of freedom as the bath: constant autocorrelation (Delta H0)^2."""

    spectrum: InternalSpectrum


@dataclass(frozen=True)
class QuantumBrownianBath:
    """High-temperature Caldeira-Leggett bath: autocorrelation 4 m gamma k_B T delta(t - t')."""

    m: float
    gamma: float
    T: float

    def __post_init__(self):
        if not (self.m > 0 and self.gamma > 0 and self.T > 0):
            raise ValidationError("QuantumBrownian parameters must be positive")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_t, 2, 2) interaction-picture reduced states

    @property
    def offdiag(self):
        return self.states[:, 0, 1]

    @property
    def visibility(self):
        return 2.0 * np.abs(self.offdiag)

    @property
    def trace_error(self):
        return np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)

    def rows(self):
        od = self.offdiag
        return zip(self.times, od.real, od.imag, self.visibility, self.trace_error)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            write_csv(fh, TRAJECTORY_HEADER, self.rows())


def _generator(bath, spec, constants):
    """(kind, rates): rates[a, b] multiplies rho_ab in the double commutator term."""
    hbar2 = constants.hbar ** 2
    if isinstance(bath, TimeDilationBath):
        dk = spec.coupling_differences(constants)
        return "memory", energy_variance(bath.spectrum) ** 2 * dk * dk / hbar2
    if isinstance(bath, QuantumBrownianBath):
        if spec.positions is None:
            raise ValidationError("QuantumBrownian bath needs branch positions in the HamiltonianSpec")
        x = np.asarray(spec.positions, dtype=float)
        dx = np.subtract.outer(x, x)
        strength = 4.0 * bath.m * bath.gamma * constants.k_B * bath.T
        # delta kernel: only half of its weight lies inside [0, t]
        return "local", 0.5 * strength * dx * dx / hbar2
    raise ValidationError(f"unknown bath {bath!r}")


def _integrate(kind, rates, rho0, h, n_steps):
    """Second-order predictor-corrector; returns the (n_steps + 1) state history."""
    hist = np.empty((n_steps + 1,) + rho0.shape, dtype=complex)
    hist[0] = rho0
    rho = rho0.copy()
    if kind == "local":
        force = lambda r, _q: -rates * r
    else:
        force = lambda _r, q: -rates * q
    q = np.zeros_like(rho0)  # trapezoidal integral of the history, int_0^t rho(t') dt'
    f = force(rho, q)
    for n in range(n_steps):
        # explicit midpoint predictor for rho(t_{n+1}), trapezoidal corrector
        r_half = rho + 0.5 * h * f
        q_half = q + 0.25 * h * (rho + r_half)
        r_pred = rho + h * force(r_half, q_half)
        q_pred = q + 0.5 * h * (rho + r_pred)
        rho_next = rho + 0.5 * h * (f + force(r_pred, q_pred))
        rho_next = 0.5 * (rho_next + rho_next.conj().T)
        q = q + 0.5 * h * (rho + rho_next)
        rho = rho_next
        f = force(rho, q)
        hist[n + 1] = rho
    return hist


def evolve_master_born(bath, spec, initial, times, constants=SI, check_step=True):
    """Integrate the Born master equation for the reduced two-branch state.

    The state under the memory integral is taken from the stored history
    (no Markov substitution).  A time-dilation bath has a constant kernel
    (Delta H0)^2; a quantum-Brownian bath has a delta kernel, integrated
    analytically into a local term.  With ``check_step`` the run is repeated
    at half the step and ``StepSizeTooCoarse`` is raised if the final
    off-diagonal element moves by more than 1e-6 relative.
    """
    if spec.n_branches != 2:
        raise DimensionMismatch("master-equation integrator handles two branches")
    rho0 = np.asarray(initial, dtype=complex)
    if rho0.shape != (2, 2):
        raise DimensionMismatch("initial reduced state must be 2x2")
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValidationError("need a uniform grid of at least two times")
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or not np.allclose(np.diff(t), h, rtol=1e-9, atol=0.0):
        raise ValidationError("time grid must be uniform and increasing")

    kind, rates = _generator(bath, spec, constants)
    hist = _integrate(kind, rates, rho0, h, t.size - 1)
    if check_step:
        fine = _integrate(kind, rates, rho0, 0.5 * h, 2 * (t.size - 1))
        ref = max(np.max(np.abs(hist[:, 0, 1])), np.finfo(float).tiny)
        change = abs(fine[-1, 0, 1] - hist[-1, 0, 1]) / ref
        if change > 1e-6:
            raise StepSizeTooCoarse(f"halving the step moved the final coherence by {change:.3g} (relative)")
    return Trajectory(t.copy(), hist)


# --------------------------------------------------------------------------
# Bargmann phase

@dataclass(frozen=True)
class PlaneWave:
    """Momentum eigenstate of a particle of given mass, with an accumulated phase (rad)."""

    mass: float
    momentum: float
    phase: float = 0.0


def translate(state, a, constants=SI, inverse=False):
    """exp(-i P a / hbar): multiplies each plane wave by exp(-i p a / hbar)."""
    sign = 1.0 if inverse else -1.0
    return [PlaneWave(w.mass, w.momentum, w.phase + sign * w.momentum * a / constants.hbar) for w in state]


def boost(state, v, constants=SI, inverse=False):
    """exp(-i K v / hbar) with K = m X at t = 0: shifts each momentum by -m v."""
    sign = 1.0 if inverse else -1.0
    return [PlaneWave(w.mass, w.momentum + sign * w.mass * v, w.phase) for w in state]


def bargmann_phase(m1, m2, v, a, constants=SI, momentum=0.0):
    """Relative phase in [0, 2 pi) left on a two-mass superposition by U_b^-1 U_t^-1 U_b U_t.

    U_t is a translation by ``a`` and U_b a Galilei boost by ``v``; the
    sequence is the group identity, yet each mass component picks up
    exp(-i m v a / hbar).
    """
    state = [PlaneWave(m1, momentum), PlaneWave(m2, momentum)]
    state = translate(state, a, constants)
    state = boost(state, v, constants)
    state = translate(state, a, constants, inverse=True)
    state = boost(state, v, constants, inverse=True)
    first, second = state
    if first.momentum != momentum or second.momentum != momentum:
        raise ValidationError("operator sequence failed to close on the momentum labels")
    return float(np.mod(second.phase - first.phase, 2.0 * math.pi))


# --------------------------------------------------------------------------
# weak equivalence principle

def equivalence_check(m, internal_energy, constants=SI, rel_step=1e-4):
    """(weight mass dH/dPhi, inertial mass 1/(d^2H/dp^2)) at Phi = 0, p = 0, by central differences."""
    c = constants.c

    def energy(phi, p):
        return solve_dispersion(weak_field_inverse_metric(phi, constants), p, m, internal_energy, constants)

    h_phi = rel_step * c * c
    weight = (energy(h_phi, 0.0) - energy(-h_phi, 0.0)) / (2.0 * h_phi)
    h_p = rel_step * (m + internal_energy / (c * c)) * c
    curvature = (energy(0.0, h_p) - 2.0 * energy(0.0, 0.0) + energy(0.0, -h_p)) / (h_p * h_p)
    return weight, 1.0 / curvature
