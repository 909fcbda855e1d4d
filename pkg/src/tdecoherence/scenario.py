"""Scenario files, reports and parameter scans.

A scenario is a flat TOML file whose keys carry their units
(``delta_x_m``, ``omega_rad_s``, ...).  See ``docs/formats/scenario.md``.
Nothing is written until every requested output has been computed, and
then each file is moved into place atomically.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .coherence import (
    VISIBILITY_HEADER, FixedHeights, FreeFallRindler, decoherence_time, revival_time, visibility_curve, write_csv,
)
from .dynamics import TRAJECTORY_HEADER, HamiltonianSpec, QuantumBrownianBath, TimeDilationBath, evolve_master_born
from .errors import InapplicableParameter, ParseError, ValidationError
from .geometry import (
    FREEFALL, NATURAL, SI, AtRest, BranchPair, Minkowski, WorldLine,
    delta_tau, delta_tau_fixed_heights, delta_tau_freefall_in_rindler, delta_tau_minkowski_side,
)
from .internal import EinsteinSolid, einstein_spectrum, einstein_variance, energy_variance, load_spectrum, two_level

__all__ = [
    "Scenario", "MissingFile", "load_scenario", "parse_scenario", "build_spectrum", "build_law",
    "make_report", "run_scenario", "scan", "scan_rows", "frames_report", "dumps_json",
    "SCAN_HEADER", "SCAN_PARAMETERS", "OUTPUT_FILES", "FRAME_TOLERANCE",
    "csv_text", "master_trajectory", "render_outputs", "write_atomic",
]

SCAN_HEADER = ("param", "value", "t_s", "visibility")
OUTPUT_FILES = {
    "visibility_csv": "visibility.csv",
    "trajectory_csv": "trajectory.csv",
    "report_json": "report.json",
}
FRAME_TOLERANCE = 1e-9
SCAN_PARAMETERS = ("delta_x", "N", "T", "omega")


class MissingFile(FileNotFoundError):
    """A scenario or a file it references does not exist."""


@dataclass(frozen=True)
class Scenario:
    name: str
    internal: str
    delta_x_m: float
    t_end_s: float
    constants: str = "SI"
    metric: str = "rindler"
    g_m_s2: float = 9.81
    branches: str = "fixed_heights"
    omega_rad_s: float | None = None
    p_excited: float = 0.5
    n_constituents: int = 1
    temperature_K: float | None = None
    n_max: int | None = None
    table_path: str | None = None
    t_start_s: float = 0.0
    n_points: int = 101
    mass_kg: float = 1e-25
    bath: str = "time_dilation"
    bath_mass_kg: float | None = None
    bath_gamma_s: float | None = None
    bath_temperature_K: float | None = None
    outputs: tuple = ("visibility_csv", "report_json")
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        _choice("constants", self.constants, ("SI", "natural"))
        _choice("metric", self.metric, ("rindler", "weak_field"))
        _choice("branches", self.branches, ("fixed_heights", "freefall_rindler"))
        _choice("internal", self.internal, ("two_level", "einstein", "table"))
        _choice("bath", self.bath, ("time_dilation", "quantum_brownian"))
        if self.branches == "freefall_rindler" and self.metric != "rindler":
            raise ValidationError("branches 'freefall_rindler' needs metric 'rindler'")
        if not self.g_m_s2 > 0:
            raise ValidationError("g_m_s2 must be > 0")
        if self.delta_x_m < 0:
            raise ValidationError("delta_x_m must be >= 0")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValidationError("grid invariant: n_points must be an integer >= 2")
        if not (0 <= self.t_start_s < self.t_end_s):
            raise ValidationError("grid invariant: need 0 <= t_start_s < t_end_s")
        for out in self.outputs:
            _choice("outputs", out, tuple(OUTPUT_FILES))
        needs = {
            "two_level": ("omega_rad_s",),
            "einstein": ("omega_rad_s", "temperature_K"),
            "table": ("table_path",),
        }[self.internal]
        for key in needs:
            if getattr(self, key) is None:
                raise ValidationError(f"internal model {self.internal!r} needs {key}")
        other = {"omega_rad_s", "temperature_K", "table_path", "n_max"} - set(needs)
        if self.internal == "einstein":
            other.discard("n_max")
        for key in sorted(other):
            if getattr(self, key) is not None:
                raise ValidationError(f"exactly one internal model: {key} does not apply to {self.internal!r}")
        if self.bath == "quantum_brownian":
            for key in ("bath_mass_kg", "bath_gamma_s", "bath_temperature_K"):
                if getattr(self, key) is None:
                    raise ValidationError(f"bath 'quantum_brownian' needs {key}")

    @property
    def physical_constants(self):
        return SI if self.constants == "SI" else NATURAL

    def times(self):
        return np.linspace(self.t_start_s, self.t_end_s, int(self.n_points))

    def canonical_dump(self):
        """One ``key = value`` line per field (defaults applied), sorted by key."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name == "base_dir":
                continue
            lines.append(f"{f.name} = {_dump_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


def _choice(key, value, allowed):
    if value not in allowed:
        raise ValidationError(f"{key} must be one of {', '.join(allowed)}; got {value!r}")


def _dump_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)  # shortest round-trip form
    if isinstance(v, tuple):
        return "[" + ", ".join(_dump_value(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v)
    return str(v)


_FLOAT_KEYS = {"delta_x_m", "t_end_s", "g_m_s2", "omega_rad_s", "p_excited", "temperature_K", "t_start_s",
               "mass_kg", "bath_mass_kg", "bath_gamma_s", "bath_temperature_K"}
_INT_KEYS = {"n_constituents", "n_max", "n_points"}
_STR_KEYS = {"name", "internal", "constants", "metric", "branches", "table_path", "bath"}


def parse_scenario(text, base_dir="."):
    """Validate TOML text into a ``Scenario``."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"scenario is not valid TOML: {exc}") from None
    kwargs = {}
    for key, value in raw.items():
        if key in _FLOAT_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParseError(f"field {key!r}: expected a number, got {value!r}")
            value = float(value)
            if not math.isfinite(value):
                raise ParseError(f"field {key!r}: must be finite")
        elif key in _INT_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ParseError(f"field {key!r}: expected an integer, got {value!r}")
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                raise ParseError(f"field {key!r}: expected a string, got {value!r}")
        elif key == "outputs":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ParseError("field 'outputs': expected a list of strings")
            value = tuple(value)
        else:
            raise ParseError(f"unknown field {key!r}")
        kwargs[key] = value
    for key in ("name", "internal", "delta_x_m", "t_end_s"):
        if key not in kwargs:
            raise ParseError(f"missing required field {key!r}")
    scenario = Scenario(base_dir=str(base_dir), **kwargs)
    if scenario.internal == "table" and not _table_file(scenario).is_file():
        raise MissingFile(f"spectrum table {_table_file(scenario)} not found")
    # build eagerly so every referenced invariant is checked at load time
    build_spectrum(scenario)
    build_law(scenario)
    return scenario


def load_scenario(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"scenario file {path} not found")
    return parse_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent)


def _table_file(s):
    return Path(s.base_dir) / s.table_path


def _auto_n_max(omega, T, constants):
    x = constants.hbar * omega / (constants.k_B * T)
    # smallest n with q^(n+1) <= 1e-10
    return max(1, math.ceil(10 * math.log(10) / x) - 1)


def build_spectrum(s):
    const = s.physical_constants
    if s.internal == "two_level":
        return two_level(s.omega_rad_s, s.p_excited, const)
    if s.internal == "einstein":
        solid = EinsteinSolid(s.n_constituents, s.omega_rad_s, s.temperature_K)
        n_max = s.n_max if s.n_max is not None else _auto_n_max(s.omega_rad_s, s.temperature_K, const)
        return einstein_spectrum(solid, n_max, const)
    return load_spectrum(_table_file(s))


def build_law(s):
    const = s.physical_constants
    delta_tau_fixed_heights(s.delta_x_m, s.t_end_s, s.g_m_s2, const)  # guard check
    if s.branches == "fixed_heights":
        return FixedHeights(s.g_m_s2, s.delta_x_m, const)
    return FreeFallRindler(s.g_m_s2, s.delta_x_m, const)


# --------------------------------------------------------------------------
# frame comparison

def frames_report(delta_x, g, t_f, constants=SI):
    """Two branches at rest in the inertial frame, seen from the accelerated laboratory.

    Cut at equal laboratory (Rindler) time they differ by the closed form
    (dx/c) tanh(g t_f/c), computed here also by integrating the inertial
    line element up to the laboratory surface.  Cut at equal inertial time
    they do not differ at all.
    """
    if t_f < 0 or delta_x < 0:
        raise ValidationError("frames report needs t_f >= 0 and delta_x >= 0")
    c = constants.c
    closed = delta_tau_freefall_in_rindler(delta_x, t_f, g, constants)
    L = c * c / g
    T_end = (delta_x + L) / c + t_f + 1.0
    line_a = WorldLine.single(AtRest(0.0), T_end)
    line_b = WorldLine.single(AtRest(delta_x), T_end)
    # 1 - tanh(theta) ~ 2 exp(-2 theta) must stay resolvable in the oracle
    dps = 50 + math.ceil(2.0 * g * t_f / c / math.log(10.0))
    integrated = delta_tau_minkowski_side(line_a, line_b, t_f, g, constants, dps=dps)
    inertial_cut = delta_tau(BranchPair(line_a, line_b, FREEFALL, t_f), Minkowski(), constants)
    residual = abs(closed - integrated)
    rel = residual / abs(closed) if closed != 0 else residual
    return {
        "delta_x_m": delta_x,
        "g_m_s2": g,
        "t_final_s": t_f,
        "equal_lab_time": {"closed_form_s": closed, "integrated_s": integrated},
        "equal_inertial_time_s": inertial_cut,
        "invariance_residual_s": residual,
        "invariance_residual_rel": rel,
        "tolerance_rel": FRAME_TOLERANCE,
        "within_tolerance": rel <= FRAME_TOLERANCE,
    }


# --------------------------------------------------------------------------
# report

def make_report(s, spectrum=None, law=None):
    const = s.physical_constants
    spectrum = build_spectrum(s) if spectrum is None else spectrum
    law = build_law(s) if law is None else law
    if s.internal == "einstein":
        dH = einstein_variance(EinsteinSolid(s.n_constituents, s.omega_rad_s, s.temperature_K), const)
    else:
        dH = energy_variance(spectrum)
    tau_dec = decoherence_time(dH, s.g_m_s2, s.delta_x_m, const) if dH > 0 and s.delta_x_m > 0 else None
    if isinstance(law, FixedHeights):
        period = revival_time(spectrum, law)
        verdict = {None: "none", 0.0: "always_coherent"}.get(period, "periodic")
    else:
        period, verdict = None, "not_applicable"
    ratio = s.g_m_s2 * s.delta_x_m / const.c ** 2
    return {
        "scenario": s.name,
        "spectrum": spectrum.label,
        "n_levels": len(spectrum),
        "delta_tau_law": law.summary(),
        "delta_tau_final_s": float(law(s.t_end_s)),
        "delta_H0_J": dH,
        "tau_dec_s": tau_dec,
        "revival": {"verdict": verdict, "period_s": period},
        "frame_invariance": frames_report(s.delta_x_m, s.g_m_s2, s.t_end_s, const),
        "guards": {"g_delta_x_over_c2": ratio, "bound": 1e-3, "within": abs(ratio) < 1e-3},
    }


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValidationError(f"non-finite number {x!r} in report")
        return f"{float(x):.17g}"
    return json.dumps(str(x))


def dumps_json(obj, indent=0):
    """JSON with sorted keys and every float at 17 significant digits."""
    pad = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dumps_json(v, indent + 1) for v in obj) + "]"
    return _fmt(obj)


# --------------------------------------------------------------------------
# running

def csv_text(header, rows):
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def master_trajectory(s, spectrum):
    if s.branches != "fixed_heights":
        raise ValidationError("trajectory output needs branches 'fixed_heights' (static branch Hamiltonian)")
    spec = HamiltonianSpec.fixed_heights(s.mass_kg, spectrum, s.g_m_s2, (0.0, s.delta_x_m))
    if s.bath == "time_dilation":
        bath = TimeDilationBath(spectrum)
    else:
        bath = QuantumBrownianBath(s.bath_mass_kg, s.bath_gamma_s, s.bath_temperature_K)
    rho0 = np.full((2, 2), 0.5, dtype=complex)
    return evolve_master_born(bath, spec, rho0, s.times(), s.physical_constants)


def render_outputs(s):
    """{file name: text} for every requested output; nothing touches disk."""
    spectrum = build_spectrum(s)
    law = build_law(s)
    report = make_report(s, spectrum, law)
    files = {}
    for out in s.outputs:
        name = OUTPUT_FILES[out]
        if out == "visibility_csv":
            curve = visibility_curve(spectrum, law, s.times(), s.physical_constants)
            files[name] = csv_text(VISIBILITY_HEADER, zip(curve.times, curve.delta_taus, curve.values))
        elif out == "trajectory_csv":
            tr = master_trajectory(s, spectrum)
            files[name] = csv_text(TRAJECTORY_HEADER, tr.rows())
        else:
            files[name] = dumps_json(report) + "\n"
    return report, files


def write_atomic(out_dir, files):
    """Write all files via temporaries in ``out_dir``, then rename them into place."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]


def run_scenario(s, out_dir=None):
    """Compute the report and requested outputs; write them to ``out_dir`` if given."""
    try:
        report, files = render_outputs(s)
    except (ValidationError, ArithmeticError) as exc:
        exc.args = (f"scenario {s.name!r}: {exc}",) + exc.args[1:]
        raise
    if out_dir is not None:
        write_atomic(out_dir, files)
    return report, files


# --------------------------------------------------------------------------
# scans

_SCAN_FIELD = {"delta_x": "delta_x_m", "N": "n_constituents", "T": "temperature_K", "omega": "omega_rad_s"}


def _scan_variant(s, parameter, value):
    if parameter not in SCAN_PARAMETERS:
        raise InapplicableParameter(f"scan parameter must be one of {SCAN_PARAMETERS}, got {parameter!r}")
    if parameter in ("N", "T") and s.internal != "einstein":
        raise InapplicableParameter(f"{parameter} applies only to the einstein internal model")
    if parameter == "omega" and s.internal == "table":
        raise InapplicableParameter("omega does not apply to a tabulated spectrum")
    if parameter == "N":
        if float(value) != int(value):
            raise InapplicableParameter("N must be an integer")
        value = int(value)
    else:
        value = float(value)
    return replace(s, **{_SCAN_FIELD[parameter]: value})


def scan_rows(s, parameter, values):
    """(param, value, t, V) tuples ordered by (value, t)."""
    variants = [(v, _scan_variant(s, parameter, v)) for v in sorted(values)]
    rows = []
    for value, variant in variants:
        curve = visibility_curve(build_spectrum(variant), build_law(variant), variant.times(),
                                 variant.physical_constants)
        rows.extend((parameter, value, t, v) for t, v in zip(curve.times, curve.values))
    return rows


def scan(s, parameter, values):
    """Long-form CSV text with header ``param,value,t_s,visibility``."""
    return csv_text(SCAN_HEADER, scan_rows(s, parameter, values))
