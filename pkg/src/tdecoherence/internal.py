"""Internal energy spectra: the particle's built-in clock.

Only the energy-basis diagonal of the internal state is stored.  The
visibility depends on the internal state through
``Tr(rho0 exp(-i H0 dtau / hbar)) = sum_i rho0_ii exp(-i E_i dtau / hbar)``,
so off-diagonal elements of ``rho0`` never contribute; keeping just the
populations is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import InvalidPopulation, LevelCapExceeded, TruncationTooSevere, ValidationError
from .geometry import SI

__all__ = [
    "InternalSpectrum", "EinsteinSolid",
    "two_level", "truncated_thermal_mode", "tensor_product",
    "energy_variance", "einstein_variance", "einstein_spectrum",
    "load_spectrum", "save_spectrum",
]

NORMALIZATION_TOL = 1e-12
MERGE_RTOL = 1e-15


@dataclass(frozen=True, eq=False)
class InternalSpectrum:
    """Energy levels ``energies`` [J] with occupation probabilities ``populations``."""

    energies: np.ndarray
    populations: np.ndarray
    label: str = ""

    def __post_init__(self):
        E = np.array(self.energies, dtype=float).reshape(-1)
        p = np.array(self.populations, dtype=float).reshape(-1)
        if E.size == 0:
            raise InvalidPopulation("spectrum needs at least one level")
        if E.shape != p.shape:
            raise InvalidPopulation(f"{E.size} energies but {p.size} populations")
        if not np.all(np.isfinite(E)):
            raise InvalidPopulation("energies must be finite")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidPopulation("populations must be finite and >= 0 (simplex invariant)")
        total = math.fsum(p)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidPopulation(f"populations sum to {total!r}, not 1 (simplex invariant)")
        E.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "energies", E)
        object.__setattr__(self, "populations", p)

    def __len__(self):
        return self.energies.size

    @classmethod
    def from_weights(cls, energies, weights, label=""):
        """Build a spectrum from unnormalised non-negative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidPopulation("weights must be finite and >= 0")
        total = math.fsum(w)
        if total <= 0:
            raise InvalidPopulation("weights sum to zero")
        return cls(energies, w / total, label)

    @property
    def mean_energy(self):
        return float(np.dot(self.populations, self.energies))

    def occupied(self):
        """Copy restricted to levels with non-zero population."""
        keep = self.populations > 0
        return InternalSpectrum.from_weights(self.energies[keep], self.populations[keep], self.label)


@dataclass(frozen=True)
class EinsteinSolid:
    """N constituents, i.e. 3N independent oscillator modes of frequency omega at temperature T."""

    N: int
    omega: float
    T: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N!r}")
        if not self.omega > 0 or not self.T > 0:
            raise ValidationError("omega and T must be > 0")

    @property
    def n_modes(self):
        return 3 * int(self.N)


def two_level(omega, p_excited=0.5, constants=SI):
    """Ground state at 0 and excited state at hbar*omega."""
    if not (0.0 <= p_excited <= 1.0):
        raise InvalidPopulation(f"p_excited must lie in [0, 1], got {p_excited!r}")
    return InternalSpectrum(
        [0.0, constants.hbar * omega], [1.0 - p_excited, p_excited], label=f"two_level(omega={omega!r})")


def _boltzmann_ratio(omega, T, constants):
    if not omega > 0 or not T > 0:
        raise ValidationError("omega and T must be > 0")
    return math.exp(-constants.hbar * omega / (constants.k_B * T))


def truncated_thermal_mode(omega, T, n_max, constants=SI):
    """Thermal harmonic mode on levels n*hbar*omega, n = 0..n_max.

    Raises ``TruncationTooSevere`` when the kept levels hold less than
    ``1 - 1e-10`` of the Boltzmann weight.  Levels whose population
    underflows to zero are dropped.
    """
    if int(n_max) != n_max or n_max < 1:
        raise ValidationError(f"n_max must be an integer >= 1, got {n_max!r}")
    q = _boltzmann_ratio(omega, T, constants)
    lost = q ** (n_max + 1)
    if lost > 1e-10:
        raise TruncationTooSevere(
            f"n_max={n_max} keeps only {1 - lost:.12g} of the Boltzmann weight (q={q:.6g})")
    n = np.arange(n_max + 1)
    with np.errstate(under="ignore"):
        w = (1.0 - q) * q ** n
    keep = w > 0
    return InternalSpectrum.from_weights(
        n[keep] * (constants.hbar * omega), w[keep], label=f"thermal_mode(omega={omega!r}, T={T!r})")


def _merge(energies, populations):
    order = np.argsort(energies, kind="stable")
    E, p = energies[order], populations[order]
    # tolerance relative to the spectrum's energy scale, so levels near zero merge too
    scale = max(abs(E[0]), abs(E[-1]))
    new_group = np.diff(E) > MERGE_RTOL * scale
    starts = np.concatenate([[0], np.nonzero(new_group)[0] + 1])
    merged_p = np.add.reduceat(p, starts)
    merged_E = E[starts]
    return merged_E, merged_p


def _common_grid(a, b):
    """Spacing delta when all energies of both spectra sit on E_min + k*delta, else None."""
    offsets = np.concatenate([a.energies - a.energies.min(), b.energies - b.energies.min()])
    nonzero = offsets[offsets > 0]
    if nonzero.size == 0:
        return None
    delta = nonzero.min()
    k = offsets / delta
    if k.max() > 2 ** 40:
        return None
    if np.all(np.abs(k - np.round(k)) <= 1e-9 * np.maximum(k, 1.0)):
        return delta
    return None


def _grid_product(a, b, ia, ib, delta, label):
    pa = np.bincount(ia, weights=a.populations)
    pb = np.bincount(ib, weights=b.populations)
    p = np.convolve(pa, pb)
    E = a.energies.min() + b.energies.min() + delta * np.arange(p.size)
    keep = p > 0
    return InternalSpectrum.from_weights(E[keep], p[keep], label)


def tensor_product(a, b, level_cap=4096):
    """Spectrum of two independent subsystems: energies add, populations multiply.

    Energies equal to within 1e-15 of the largest |E| are merged.  ``level_cap`` bounds
    the number of levels of the merged result.  Spectra sharing a uniform
    energy grid are combined by convolution, which keeps large thermal
    ladders cheap.
    """
    label = " x ".join(part for part in (a.label, b.label) if part)
    delta = _common_grid(a, b)
    if delta is not None:
        ia = np.round((a.energies - a.energies.min()) / delta).astype(np.int64)
        ib = np.round((b.energies - b.energies.min()) / delta).astype(np.int64)
        n_out = int(ia.max() + ib.max() + 1)
        if n_out <= level_cap:
            return _grid_product(a, b, ia, ib, delta, label)

    if len(a) * len(b) > max(level_cap, 1) * 64:
        raise LevelCapExceeded(f"raw product of {len(a)}x{len(b)} levels is too large for level_cap={level_cap}")
    E = np.add.outer(a.energies, b.energies).ravel()
    p = np.multiply.outer(a.populations, b.populations).ravel()
    E, p = _merge(E, p)
    if E.size > level_cap:
        raise LevelCapExceeded(f"product has {E.size} levels > level_cap={level_cap}")
    return InternalSpectrum.from_weights(E, p, label)


def energy_variance(s):
    """Population-weighted standard deviation of the energy, Delta H0 [J]."""
    dev = s.energies - s.mean_energy
    return math.sqrt(max(float(np.dot(s.populations, dev * dev)), 0.0))


def einstein_variance(solid, constants=SI):
    """Exact energy spread of an Einstein solid.

    Each Bose mode contributes a variance ``(hbar*omega)^2 q / (1-q)^2`` with
    ``q = exp(-hbar*omega / k_B T)``, which equals
    ``(hbar*omega / (2 sinh(x/2)))^2`` for ``x = hbar*omega / k_B T``.  For
    ``k_B T >> hbar*omega`` the total tends to ``sqrt(3N) k_B T`` from below.
    """
    x = constants.hbar * solid.omega / (constants.k_B * solid.T)
    if x > 1400:
        return 0.0
    per_mode = constants.hbar * solid.omega / (2.0 * math.sinh(0.5 * x))
    return math.sqrt(solid.n_modes) * per_mode


def einstein_spectrum(solid, n_max, constants=SI, level_cap=100_000):
    """Explicit truncated spectrum of all 3N modes of ``solid``."""
    mode = truncated_thermal_mode(solid.omega, solid.T, n_max, constants)
    out = reduce(lambda acc, _: tensor_product(acc, mode, level_cap), range(solid.n_modes - 1), mode)
    return InternalSpectrum(out.energies, out.populations,
                            label=f"einstein(N={solid.N}, omega={solid.omega!r}, T={solid.T!r}, n_max={n_max})")


def save_spectrum(s, path):
    """Write a two-column text table: energy [J], population."""
    np.savetxt(path, np.column_stack([s.energies, s.populations]), fmt="%.17g",
               header="energy_J population")


def load_spectrum(path, label=None):
    """Read a table written by ``save_spectrum`` (``#`` comments allowed)."""
    path = Path(path)
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"{path}: expected 2 columns (energy_J population), got {data.shape[1]}")
    return InternalSpectrum(data[:, 0], data[:, 1], label=label if label is not None else path.stem)
