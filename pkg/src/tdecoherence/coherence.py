"""Interferometric visibility, decoherence times and revivals."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveArgument, UnsupportedLaw, ValidationError
from .geometry import SI, delta_tau_fixed_heights, delta_tau_freefall_in_rindler
from .internal import MERGE_RTOL

__all__ = [
    "FixedHeights", "FreeFallRindler", "Explicit",
    "VisibilityCurve", "VISIBILITY_HEADER",
    "visibility", "visibility_two_level", "decoherence_time", "gaussian_visibility",
    "revival_time", "visibility_curve",
    "early_window", "fit_gaussian_decay", "decay_model_residuals", "fit_log_linear",
]

VISIBILITY_HEADER = ("t_s", "delta_tau_s", "visibility")
TWO_PI = 2.0 * math.pi


# --------------------------------------------------------------------------
# proper-time-difference laws: laboratory time t -> delta tau

@dataclass(frozen=True)
class FixedHeights:
    """Branches held at heights differing by ``delta_x``: dtau = g dx t / c^2."""

    g: float
    delta_x: float
    constants: object = SI

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        rate = delta_tau_fixed_heights(self.delta_x, 1.0, self.g, self.constants)
        return rate * t

    def summary(self):
        return {"kind": "fixed_heights", "g_m_s2": self.g, "delta_x_m": self.delta_x}


@dataclass(frozen=True)
class FreeFallRindler:
    """Free-falling branches compared at equal Rindler time: dtau = (dx/c) tanh(g t/c)."""

    g: float
    delta_x: float
    constants: object = SI

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        delta_tau_freefall_in_rindler(self.delta_x, 0.0, self.g, self.constants)  # argument check
        c = self.constants.c
        return (self.delta_x / c) * np.tanh(self.g * t / c)

    def summary(self):
        return {"kind": "freefall_rindler", "g_m_s2": self.g, "delta_x_m": self.delta_x}


@dataclass(frozen=True, eq=False)
class Explicit:
    """Tabulated dtau(t), linearly interpolated."""

    times: np.ndarray
    delta_taus: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.asarray(self.delta_taus, dtype=float)
        if t.ndim != 1 or t.shape != d.shape or t.size == 0:
            raise ValidationError("times and delta_taus must be equal-length 1-d arrays")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("tabulated times must be strictly increasing")
        if t[0] != 0.0 or d[0] != 0.0:
            raise ValidationError("tabulated law must start at dtau(0) = 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "delta_taus", d)

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.delta_taus)

    def summary(self):
        return {"kind": "explicit", "n_points": int(self.times.size)}


# --------------------------------------------------------------------------
# visibility

def _phase_rates(s, constants):
    # global phase is unobservable; shifting to the lowest level keeps angles small
    return (s.energies - s.energies.min()) / constants.hbar


def visibility(s, delta_tau, constants=SI):
    """|sum_i p_i exp(-i E_i dtau / hbar)| for a scalar or array of dtau.

    Angles are reduced modulo 2*pi term by term before exponentiation, and the
    sum over levels runs in a fixed order per time point.
    """
    dt = np.asarray(delta_tau, dtype=float)
    flat = dt.reshape(-1)
    rates = _phase_rates(s, constants)
    p = s.populations
    out = np.empty(flat.size)
    step = max(1, 2_000_000 // max(rates.size, 1))
    for lo in range(0, flat.size, step):
        angle = np.mod(np.multiply.outer(flat[lo:lo + step], rates), TWO_PI)
        re = (np.cos(angle) * p).sum(axis=1)
        im = (np.sin(angle) * p).sum(axis=1)
        out[lo:lo + step] = np.hypot(re, im)
    if dt.ndim == 0:
        return float(out[0])
    return out.reshape(dt.shape)


def visibility_two_level(omega, delta_tau):
    """|cos(omega dtau / 2)|: equal superposition of two levels split by hbar*omega."""
    v = np.abs(np.cos(0.5 * omega * np.asarray(delta_tau, dtype=float)))
    return float(v) if v.ndim == 0 else v


def decoherence_time(delta_H0, g, delta_x, constants=SI):
    """hbar c^2 / (Delta H0 g Delta x)."""
    if not (delta_H0 > 0 and g > 0 and delta_x > 0):
        raise NonPositiveArgument("decoherence_time needs delta_H0, g, delta_x > 0")
    return constants.hbar * constants.c ** 2 / (delta_H0 * g * delta_x)


def gaussian_visibility(delta_H0, delta_tau, constants=SI):
    """Second-cumulant approximation exp(-(Delta H0 dtau)^2 / (2 hbar^2))."""
    if delta_H0 < 0:
        raise NonPositiveArgument("delta_H0 must be >= 0")
    x = delta_H0 * np.asarray(delta_tau, dtype=float) / constants.hbar
    v = np.exp(-0.5 * x * x)
    return float(v) if v.ndim == 0 else v


# --------------------------------------------------------------------------
# revivals

def revival_time(s, law, commensuration_tol=1e-9, max_denominator=10**6):
    """Exact revival period of the visibility under a linear law, or ``None``.

    The occupied level gaps ``E_i - E_0`` are tested for a common divisor
    ``dE``: with ``d1`` the smallest gap, the first integer ``M <= max_denominator``
    for which every ``M (E_i - E_0) / d1`` lies within ``commensuration_tol``
    of an integer fixes ``dE = d1 gcd(n_i) / M``.  The period is then
    ``2 pi hbar c^2 / (dE g dx)``.

    Returns ``0.0`` when the visibility is identically 1 (a single occupied
    level, or no proper-time difference).
    """
    if not isinstance(law, FixedHeights):
        raise UnsupportedLaw(f"revival analysis needs a linear FixedHeights law, got {type(law).__name__}")
    E = np.sort(s.energies[s.populations > 0])
    gaps = E - E[0]
    scale = max(abs(E[0]), abs(E[-1]))
    gaps = gaps[gaps > MERGE_RTOL * scale]
    if gaps.size == 0 or law.g * law.delta_x == 0:
        return 0.0
    d1 = gaps.min()
    ratios = gaps / d1

    found = None
    chunk = max(1, 4_000_000 // ratios.size)
    for lo in range(1, max_denominator + 1, chunk):
        M = np.arange(lo, min(lo + chunk, max_denominator + 1), dtype=float)
        scaled = np.multiply.outer(M, ratios)
        ok = np.all(np.abs(scaled - np.round(scaled)) <= commensuration_tol, axis=1)
        if ok.any():
            found = int(M[np.argmax(ok)])
            break
    if found is None:
        return None

    n = np.round(found * ratios).astype(np.int64)
    common = math.gcd(found, *[int(k) for k in n])
    dE = d1 * common / found
    c = law.constants.c
    return TWO_PI * law.constants.hbar * c * c / (dE * abs(law.g * law.delta_x))


# --------------------------------------------------------------------------
# curves and export

@dataclass(frozen=True, eq=False)
class VisibilityCurve:
    times: np.ndarray
    delta_taus: np.ndarray
    values: np.ndarray
    law: object = None
    spectrum_label: str = ""

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            write_csv(fh, VISIBILITY_HEADER, zip(self.times, self.delta_taus, self.values))


def write_csv(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([x if isinstance(x, str) else f"{float(x):.17g}" for x in row])


def visibility_curve(s, law, times, constants=SI):
    """Sample V(t) = visibility(s, law(t)) on a strictly increasing grid."""
    t = np.asarray(times, dtype=float).reshape(-1)
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise ValidationError("time grid must be strictly increasing")
    dtau = np.asarray(law(t), dtype=float).reshape(-1) if t.size else np.empty(0)
    values = visibility(s, dtau, constants) if t.size else np.empty(0)
    return VisibilityCurve(t, dtau, np.asarray(values), law, s.label)


# --------------------------------------------------------------------------
# decay fits

def early_window(times, values, v_min):
    """Leading run of samples with t > 0 and V >= v_min (the early-decay window)."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    below = np.nonzero(v < v_min)[0]
    stop = below[0] if below.size else v.size
    keep = slice(0, stop)
    t, v = t[keep], v[keep]
    positive = t > 0
    return t[positive], v[positive]


def fit_gaussian_decay(times, values, v_min=0.95, quartic=True):
    """Quadratic coefficient ``a`` of -ln V = a t^2 (+ b t^4) on the early window.

    With ``quartic=True`` the leading non-Gaussian (fourth-cumulant) term is
    fitted alongside, so ``a`` is the short-time curvature itself; with
    ``quartic=False`` the single-term through-origin fit is used.
    """
    t, v = early_window(times, values, v_min)
    if t.size < 3:
        raise ValidationError("too few samples in the fit window")
    y = -np.log(v)
    # fit in u = t / t_max so the t^2 and t^4 columns are commensurate
    scale = t.max()
    u2 = (t / scale) ** 2
    if not quartic:
        return float(np.dot(u2, y) / np.dot(u2, u2)) / scale ** 2
    design = np.column_stack([u2, u2 * u2])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0]) / scale ** 2


def decay_model_residuals(times, values, v_min=0.5):
    """Sum of squared residuals of -ln V against ``a t^2`` and against ``b t`` (both through the origin)."""
    t, v = early_window(times, values, v_min)
    y = -np.log(v)
    out = {}
    for name, basis in (("quadratic", t ** 2), ("linear", t)):
        coef = np.dot(basis, y) / np.dot(basis, basis)
        out[name] = float(np.sum((y - coef * basis) ** 2))
    return out


def fit_log_linear(times, magnitudes):
    """Least-squares line through ln|rho_ab| vs t; returns (slope, intercept, R^2)."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(magnitudes, dtype=float))
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2
