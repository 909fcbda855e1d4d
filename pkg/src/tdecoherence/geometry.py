"""Space-time backgrounds, world lines and proper time.

Proper times of laboratory-scale superpositions differ by ~1e-16 s over a
second, below the resolution of a double holding the total.  Every routine
here therefore works with the *offset* ``tau - (t1 - t0)`` of proper time from
elapsed coordinate time, and differences are assembled from offsets with
``math.fsum``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import mpmath
import numpy as np
import scipy.constants as sc
from scipy.optimize import brentq

from .errors import (
    NonContiguousWorldLine,
    OutsideRindlerWedge,
    PostNewtonianGuardTripped,
    PostNewtonianWarning,
    SuperluminalSegment,
    ValidationError,
)
from .quadrature import adaptive_simpson

__all__ = [
    "Constants", "SI", "NATURAL",
    "Minkowski", "Rindler", "WeakField", "Metric",
    "AtRest", "UniformVelocity", "FreeFall", "Segment", "WorldLine",
    "BranchPair", "LAB", "FREEFALL",
    "proper_time", "proper_time_offset",
    "rindler_to_minkowski", "minkowski_to_rindler",
    "delta_tau_freefall_in_rindler", "delta_tau_fixed_heights",
    "delta_tau", "delta_tau_minkowski_side",
]

POST_NEWTONIAN_BOUND = 1e-3


@dataclass(frozen=True)
class Constants:
    c: float
    hbar: float
    k_B: float

    def __post_init__(self):
        for name in ("c", "hbar", "k_B"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"constant {name} must be positive, got {value!r}")


SI = Constants(c=sc.c, hbar=sc.hbar, k_B=sc.k)
NATURAL = Constants(c=1.0, hbar=1.0, k_B=1.0)


# --------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Minkowski:
    """Flat space-time in inertial coordinates."""


@dataclass(frozen=True)
class Rindler:
    """Flat space-time in the coordinates of an observer with proper acceleration ``g``."""

    g: float

    def __post_init__(self):
        if not (math.isfinite(self.g) and self.g > 0):
            raise ValidationError(f"Rindler acceleration must be > 0, got {self.g!r}")

    def weak_field(self, extent=1e7):
        """The first-order (Phi = g x) approximation of this metric."""
        return WeakField.uniform(self.g, extent=extent)


@dataclass(frozen=True)
class WeakField:
    """Post-Newtonian metric with a piecewise-linear potential Phi(x) [m^2/s^2].

    ``acceleration`` is the free-fall acceleration used for ``FreeFall``
    segments.  It defaults to the slope of Phi when Phi is a single straight
    line and must be given explicitly otherwise.
    """

    heights: tuple
    potentials: tuple
    acceleration: float | None = None

    def __post_init__(self):
        xs = tuple(float(x) for x in self.heights)
        ys = tuple(float(y) for y in self.potentials)
        if len(xs) < 2 or len(xs) != len(ys):
            raise ValidationError("potential needs >= 2 (height, value) breakpoints")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("potential heights must be strictly increasing")
        if not all(math.isfinite(v) for v in xs + ys):
            raise ValidationError("potential must be finite on its domain")
        object.__setattr__(self, "heights", xs)
        object.__setattr__(self, "potentials", ys)
        if self.acceleration is None:
            slopes = np.diff(ys) / np.diff(xs)
            if np.allclose(slopes, slopes[0], rtol=1e-12, atol=0.0):
                object.__setattr__(self, "acceleration", float(slopes[0]))

    @classmethod
    def uniform(cls, g, extent=1e7):
        """Homogeneous field Phi(x) = g x on [-extent, extent] (origin kept as a breakpoint)."""
        return cls((-extent, 0.0, extent), (-g * extent, 0.0, g * extent), acceleration=g)

    @property
    def domain(self):
        return self.heights[0], self.heights[-1]

    def _segment(self, x):
        xs = self.heights
        if not (xs[0] <= x <= xs[-1]):
            raise ValidationError(f"height {x!r} m outside the potential's domain {self.domain}")
        return min(max(np.searchsorted(xs, x, side="right") - 1, 0), len(xs) - 2)

    def potential(self, x):
        x = float(x)
        k = self._segment(x)
        x0, x1 = self.heights[k], self.heights[k + 1]
        y0, y1 = self.potentials[k], self.potentials[k + 1]
        slope = (y1 - y0) / (x1 - x0)
        # anchor on the nearer breakpoint to keep Phi(x) ~ g x exact near the origin
        if x - x0 <= x1 - x:
            return y0 + slope * (x - x0)
        return y1 - slope * (x1 - x)

    def potential_integral(self, xa, xb):
        """Exact integral of Phi over [xa, xb] (either order)."""
        if xa == xb:
            return 0.0
        sign = 1.0
        if xb < xa:
            xa, xb, sign = xb, xa, -1.0
        self._segment(xa), self._segment(xb)
        inner = [h for h in self.heights if xa < h < xb]
        nodes = [xa, *inner, xb]
        vals = [self.potential(x) for x in nodes]
        parts = [0.5 * (b - a) * (fa + fb) for a, b, fa, fb in zip(nodes, nodes[1:], vals, vals[1:])]
        return sign * math.fsum(parts)


Metric = Union[Minkowski, Rindler, WeakField]


# --------------------------------------------------------------------------
# world lines

@dataclass(frozen=True)
class AtRest:
    x: float


@dataclass(frozen=True)
class UniformVelocity:
    x0: float
    v: float


@dataclass(frozen=True)
class FreeFall:
    """Inertial motion starting at ``x0`` with coordinate velocity ``v0``.

    Under ``WeakField`` this is the Newtonian parabola; under ``Rindler`` it
    is the image of a straight Minkowski world line; under ``Minkowski`` it
    is uniform motion.
    """

    x0: float
    v0: float = 0.0


Motion = Union[AtRest, UniformVelocity, FreeFall]


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    motion: Motion

    def __post_init__(self):
        if not (self.t_end > self.t_start):
            raise NonContiguousWorldLine(f"segment must have t_end > t_start, got [{self.t_start}, {self.t_end}]")


@dataclass(frozen=True)
class WorldLine:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise NonContiguousWorldLine("world line needs at least one segment")
        for left, right in zip(segs, segs[1:]):
            if left.t_end != right.t_start:
                raise NonContiguousWorldLine(
                    f"gap between segments: t_end={left.t_end!r} vs next t_start={right.t_start!r}")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def single(cls, motion, t_end, t_start=0.0):
        return cls((Segment(t_start, t_end, motion),))

    @property
    def t_start(self):
        return self.segments[0].t_start

    @property
    def t_end(self):
        return self.segments[-1].t_end


LAB = "lab"
FREEFALL = "freefall"


@dataclass(frozen=True)
class BranchPair:
    """Two superposed branches plus the simultaneity surface on which they are compared.

    ``measurement_frame`` is ``"lab"`` (Rindler / weak-field laboratory time)
    or ``"freefall"`` (Minkowski time); ``t_final`` is the coordinate time of
    the measurement in that frame.
    """

    branch_a: WorldLine
    branch_b: WorldLine
    measurement_frame: str = LAB
    t_final: float = field(default=0.0)

    def __post_init__(self):
        if self.measurement_frame not in (LAB, FREEFALL):
            raise ValidationError(f"measurement_frame must be 'lab' or 'freefall', got {self.measurement_frame!r}")
        if self.t_final < 0:
            raise ValidationError("t_final must be >= 0")


# --------------------------------------------------------------------------
# kinematics of one segment under a metric, as functions of local time s

def _kinematics(metric, motion, constants):
    c = constants.c
    if isinstance(motion, AtRest):
        x = motion.x
        return (lambda s: x), (lambda s: 0.0)
    if isinstance(motion, UniformVelocity):
        x0, v = motion.x0, motion.v
        return (lambda s: x0 + v * s), (lambda s: v)
    if not isinstance(motion, FreeFall):
        raise ValidationError(f"unknown motion {motion!r}")

    x0, v0 = motion.x0, motion.v0
    if isinstance(metric, Minkowski):
        return (lambda s: x0 + v0 * s), (lambda s: v0)
    if isinstance(metric, WeakField):
        g = metric.acceleration
        if g is None:
            raise ValidationError("FreeFall under a multi-slope potential needs an explicit acceleration")
        return (lambda s: x0 + v0 * s - 0.5 * g * s * s), (lambda s: v0 - g * s)

    # Rindler: straight Minkowski line through the initial event, mapped back.
    g = metric.g
    L = c * c / g
    one_plus_a0 = 1.0 + x0 / L
    beta = v0 / (c * one_plus_a0)
    L_beta = c * v0 / (g * one_plus_a0)
    rho0 = x0 + L

    def parts(s):
        th = g * s / c
        ch_m1 = 2.0 * math.sinh(0.5 * th) ** 2
        sh = math.sinh(th)
        return ch_m1, sh, 1.0 + ch_m1 - beta * sh

    def pos(s):
        ch_m1, sh, D = parts(s)
        return (x0 - L * ch_m1 + L_beta * sh) / D

    def vel(s):
        ch_m1, sh, D = parts(s)
        return -rho0 * (g / c) * (sh - beta * (1.0 + ch_m1)) / (D * D)

    return pos, vel


def _potential_fn(metric):
    if isinstance(metric, WeakField):
        return metric.potential
    if isinstance(metric, Rindler):
        g = metric.g
        return lambda x: g * x
    return lambda x: 0.0


def _check_segment(metric, seg, pos, vel, s_lo, s_hi, constants):
    c = constants.c
    phi = _potential_fn(metric)
    samples = np.linspace(s_lo, s_hi, 9)
    tripped = False
    for s in samples:
        x, v = pos(s), vel(s)
        if isinstance(metric, Rindler):
            limit = c * (1.0 + metric.g * x / (c * c))
            if limit <= 0:
                raise OutsideRindlerWedge(f"world line leaves the Rindler wedge at x={x!r}")
        else:
            limit = c
        if abs(v) >= limit:
            raise SuperluminalSegment(f"|v|={abs(v)!r} m/s reaches the local light speed in segment {seg}")
        if abs(phi(x)) / (c * c) >= POST_NEWTONIAN_BOUND:
            tripped = True
    if tripped and isinstance(metric, WeakField):
        warnings.warn(f"|Phi|/c^2 >= {POST_NEWTONIAN_BOUND} along segment {seg}", PostNewtonianWarning, stacklevel=4)


def _segment_offset(metric, seg, pos, vel, s_lo, s_hi, constants):
    """tau - (s_hi - s_lo) for the piece [s_lo, s_hi] of one segment (local times)."""
    c = constants.c
    c2 = c * c
    dt = s_hi - s_lo
    motion = seg.motion

    if isinstance(metric, Minkowski):
        if isinstance(motion, AtRest):
            return 0.0
        b2 = (vel(0.0) / c) ** 2
        return -dt * b2 / (1.0 + math.sqrt(1.0 - b2))

    if isinstance(metric, WeakField):
        if isinstance(motion, AtRest):
            return dt * metric.potential(motion.x) / c2
        if isinstance(motion, UniformVelocity) and motion.v != 0.0:
            v = motion.v
            integral = metric.potential_integral(pos(s_lo), pos(s_hi)) / v
            return integral / c2 - dt * v * v / (2.0 * c2)
        if isinstance(motion, UniformVelocity):
            return dt * metric.potential(motion.x0) / c2

        def rate(s):
            v = vel(s)
            return metric.potential(pos(s)) / c2 - v * v / (2.0 * c2)

        return adaptive_simpson(rate, s_lo, s_hi)

    # Rindler: exact line element d tau/dt = sqrt((1 + g x/c^2)^2 - v^2/c^2)
    g = metric.g
    if isinstance(motion, AtRest):
        return dt * g * motion.x / c2

    def rate(s):
        a = g * pos(s) / c2
        b = vel(s) / c
        return (2.0 * a + a * a - b * b) / (math.sqrt((1.0 + a) ** 2 - b * b) + 1.0)

    return adaptive_simpson(rate, s_lo, s_hi)


def _pieces(line, t0, t1):
    if not (line.t_start <= t0 <= t1 <= line.t_end):
        raise ValidationError(f"[{t0}, {t1}] outside world line domain [{line.t_start}, {line.t_end}]")
    for seg in line.segments:
        lo, hi = max(t0, seg.t_start), min(t1, seg.t_end)
        if hi > lo:
            yield seg, lo - seg.t_start, hi - seg.t_start


def _check_joins(metric, line, constants):
    for left, right in zip(line.segments, line.segments[1:]):
        end = _kinematics(metric, left.motion, constants)[0](left.t_end - left.t_start)
        start = _kinematics(metric, right.motion, constants)[0](0.0)
        if abs(end - start) > 1e-9 + 1e-12 * max(abs(end), abs(start)):
            raise NonContiguousWorldLine(f"position jumps from {end!r} m to {start!r} m at t={right.t_start!r}")


def proper_time_offset(metric, line, constants, t0, t1):
    """Return ``tau - (t1 - t0)`` along ``line`` between coordinate times t0 and t1."""
    _check_joins(metric, line, constants)
    parts = []
    for seg, s_lo, s_hi in _pieces(line, t0, t1):
        pos, vel = _kinematics(metric, seg.motion, constants)
        _check_segment(metric, seg, pos, vel, s_lo, s_hi, constants)
        parts.append(_segment_offset(metric, seg, pos, vel, s_lo, s_hi, constants))
    return math.fsum(parts)


def proper_time(metric, line, constants, t0, t1):
    """Proper time [s] elapsed along ``line`` between coordinate times t0 and t1.

    Minkowski and Rindler use the exact line element; ``WeakField`` uses the
    first-order rate ``1 + Phi/c^2 - v^2/2c^2``.  Emits ``PostNewtonianWarning``
    when |Phi|/c^2 >= 1e-3 somewhere on the path.
    """
    return math.fsum([t1 - t0, proper_time_offset(metric, line, constants, t0, t1)])


# --------------------------------------------------------------------------
# coordinate transforms

def _wedge_length(g, constants):
    if not g > 0:
        raise ValidationError(f"acceleration must be > 0, got {g!r}")
    return constants.c ** 2 / g


def rindler_to_minkowski(x, t, g, constants):
    """Map Rindler (x, t) to Minkowski (X, T); inverse of ``minkowski_to_rindler``."""
    c = constants.c
    L = _wedge_length(g, constants)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x <= -L):
        raise OutsideRindlerWedge("x must exceed -c^2/g")
    th = g * t / c
    rho = x + L
    X = x + rho * 2.0 * np.sinh(0.5 * th) ** 2
    T = rho * np.sinh(th) / c
    if X.ndim == 0:
        return float(X), float(T)
    return X, T


def minkowski_to_rindler(X, T, g, constants):
    """Map Minkowski (X, T) to Rindler (x, t) for points inside the wedge X + c^2/g > c|T|."""
    c = constants.c
    L = _wedge_length(g, constants)
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(X + L <= c * np.abs(T)):
        raise OutsideRindlerWedge("event lies on or outside the Rindler horizon")
    u = c * T / (X + L)
    root = np.sqrt((1.0 - u) * (1.0 + u))
    x = X * root - L * u * u / (1.0 + root)
    t = (c / g) * np.arctanh(u)
    if x.ndim == 0:
        return float(x), float(t)
    return x, t


# --------------------------------------------------------------------------
# proper-time differences

def delta_tau_freefall_in_rindler(delta_x, t_f, g, constants):
    """Proper-time difference of two free-falling branches cut at equal Rindler time t_f."""
    if t_f < 0 or not g > 0:
        raise ValidationError("need t_f >= 0 and g > 0")
    c = constants.c
    return (delta_x / c) * math.tanh(g * t_f / c)


def delta_tau_fixed_heights(delta_x, t, g, constants):
    """Proper-time difference of two branches held at heights differing by delta_x."""
    c2 = constants.c ** 2
    if abs(g * delta_x) / c2 >= POST_NEWTONIAN_BOUND:
        raise PostNewtonianGuardTripped(f"g*delta_x/c^2 = {g * delta_x / c2!r} exceeds {POST_NEWTONIAN_BOUND}")
    return g * delta_x * t / c2


def _native_frame(metric):
    return FREEFALL if isinstance(metric, Minkowski) else LAB


def _minkowski_cut(metric, line, T_final, constants):
    """Rindler coordinate time at which ``line`` reaches Minkowski time T_final."""
    if T_final == 0.0:
        return 0.0

    def minkowski_time(t):
        for seg in line.segments:
            if seg.t_start <= t <= seg.t_end:
                x = _kinematics(metric, seg.motion, constants)[0](t - seg.t_start)
                return rindler_to_minkowski(x, t, metric.g, constants)[1]
        raise ValidationError(f"t={t!r} outside the world line")

    lo, hi = line.t_start, line.t_end
    if minkowski_time(hi) < T_final:
        raise ValidationError("branch ends before the Minkowski measurement surface")
    return brentq(lambda t: minkowski_time(t) - T_final, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)


def delta_tau(pair, metric, constants):
    """tau(branch_b) - tau(branch_a), each integrated from its first event to the measurement surface.

    Branches are parameterised in the metric's own coordinates.  A Rindler
    metric may be cut on Minkowski simultaneity surfaces
    (``measurement_frame="freefall"``); the crossing is located by root
    finding in double precision, so that route resolves differences only down
    to ~1e-16 of the elapsed time.
    """
    frame = pair.measurement_frame
    if frame == _native_frame(metric):
        cut_a = cut_b = pair.t_final
    elif isinstance(metric, Rindler) and frame == FREEFALL:
        cut_a = _minkowski_cut(metric, pair.branch_a, pair.t_final, constants)
        cut_b = _minkowski_cut(metric, pair.branch_b, pair.t_final, constants)
    else:
        raise ValidationError(f"{type(metric).__name__} metric cannot be cut on the {frame!r} surface")

    a0, b0 = pair.branch_a.t_start, pair.branch_b.t_start
    off_a = proper_time_offset(metric, pair.branch_a, constants, a0, cut_a)
    off_b = proper_time_offset(metric, pair.branch_b, constants, b0, cut_b)
    return math.fsum([off_b, cut_b, -b0, -off_a, -cut_a, a0])


def delta_tau_minkowski_side(line_a, line_b, t_f, g, constants, dps=50):
    """Delta tau of two Minkowski world lines cut at equal Rindler time ``t_f``.

    Independent cross-check of the Rindler-side calculations: the crossing of
    each line with the Rindler surface ``t = t_f`` is located through the
    inverse coordinate transform and the Minkowski line element is integrated
    up to it, all in ``dps``-digit arithmetic.  Lines must use inertial
    motions (AtRest, UniformVelocity, FreeFall) in Minkowski coordinates.
    """
    with mpmath.workdps(dps):
        c, g_ = mpmath.mpf(constants.c), mpmath.mpf(g)
        L = c * c / g_
        target = mpmath.mpf(t_f)

        # t(X, T) = t_f  <=>  c T = tanh(g t_f / c) (X + L); linear in T and
        # finite even past the horizon, so segment ends need no care
        slope = mpmath.tanh(g_ * target / c)

        def branch_tau(line):
            if target == 0:
                return mpmath.mpf(0)
            total = mpmath.mpf(0)
            for seg in line.segments:
                m = seg.motion
                if isinstance(m, AtRest):
                    X0, V = mpmath.mpf(m.x), mpmath.mpf(0)
                elif isinstance(m, UniformVelocity):
                    X0, V = mpmath.mpf(m.x0), mpmath.mpf(m.v)
                else:
                    X0, V = mpmath.mpf(m.x0), mpmath.mpf(m.v0)
                Ts, Te = mpmath.mpf(seg.t_start), mpmath.mpf(seg.t_end)

                def X(T):
                    return X0 + V * (T - Ts)

                def F(T):
                    return c * T - slope * (X(T) + L)

                rate = lambda T: mpmath.sqrt(1 - (V / c) ** 2)
                if F(Te) < 0:
                    total += mpmath.quad(rate, [Ts, Te])
                    continue
                T_cut = mpmath.findroot(F, (Ts, Te), solver="anderson")
                if X(T_cut) + L <= c * abs(T_cut):
                    raise OutsideRindlerWedge("crossing lies outside the Rindler wedge")
                total += mpmath.quad(rate, [Ts, T_cut])
                return total
            raise ValidationError("world line ends before the Rindler measurement surface")

        return float(branch_tau(line_b) - branch_tau(line_a))
