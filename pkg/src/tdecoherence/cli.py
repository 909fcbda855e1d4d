"""Command-line front end.

Every subcommand reads ``--scenario FILE``, applies the optional
``--delta-x-m`` / ``--t-final-s`` overrides, writes its files into
``--out DIR`` and prints a one-line JSON summary.

Exit codes: 0 success, 2 invalid input, 3 numerical guard, 4 I/O.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import scenario as sc
from .coherence import VISIBILITY_HEADER, visibility_curve
from .dynamics import TRAJECTORY_HEADER
from .errors import GuardError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_GUARD, EXIT_IO = 0, 2, 3, 4


def _load(args):
    s = sc.load_scenario(args.scenario)
    overrides = {}
    if args.delta_x_m is not None:
        overrides["delta_x_m"] = args.delta_x_m
    if args.t_final_s is not None:
        overrides["t_end_s"] = args.t_final_s
    if overrides:
        s = dataclasses.replace(s, **overrides)
        sc.build_law(s)
    return s


def cmd_propertime(s):
    law = sc.build_law(s)
    out = {"scenario": s.name, "delta_tau_law": law.summary(), "t_final_s": s.t_end_s,
           "delta_tau_s": float(law(s.t_end_s))}
    return out, {"propertime.json": sc.dumps_json(out) + "\n"}


def cmd_visibility(s):
    curve = visibility_curve(sc.build_spectrum(s), sc.build_law(s), s.times(), s.physical_constants)
    text = sc.csv_text(VISIBILITY_HEADER, zip(curve.times, curve.delta_taus, curve.values))
    return {"scenario": s.name, "n_points": int(curve.times.size),
            "final_visibility": float(curve.values[-1])}, {"visibility.csv": text}


def cmd_dectime(s):
    report = sc.make_report(s)
    if report["tau_dec_s"] is None:
        raise ValidationError("decoherence time needs delta_x_m > 0 and a spectrum with non-zero energy spread")
    out = {key: report[key] for key in ("scenario", "spectrum", "delta_H0_J", "tau_dec_s")}
    return out, {"dectime.json": sc.dumps_json(out) + "\n"}


def cmd_evolve(s):
    tr = sc.master_trajectory(s, sc.build_spectrum(s))
    text = sc.csv_text(TRAJECTORY_HEADER, tr.rows())
    return {"scenario": s.name, "final_visibility": float(tr.visibility[-1]),
            "max_trace_error": float(tr.trace_error.max())}, {"trajectory.csv": text}


def cmd_frames(s):
    out = sc.frames_report(s.delta_x_m, s.g_m_s2, s.t_end_s, s.physical_constants)
    return out, {"frames.json": sc.dumps_json(out) + "\n"}


def cmd_scan(s, param, values):
    text = sc.scan(s, param, values)
    return {"scenario": s.name, "param": param, "n_values": len(values)}, {"scan.csv": text}


def cmd_run(s):
    report, files = sc.render_outputs(s)
    return {"scenario": s.name, "files": sorted(files)}, files


COMMANDS = {
    "propertime": (cmd_propertime, "proper-time difference at the final time"),
    "visibility": (cmd_visibility, "visibility curve on the scenario grid (visibility.csv)"),
    "dectime": (cmd_dectime, "energy spread and decoherence time (dectime.json)"),
    "evolve": (cmd_evolve, "master-equation trajectory (trajectory.csv)"),
    "frames": (cmd_frames, "equal-time-surface comparison (frames.json)"),
    "scan": (cmd_scan, "visibility curves over a parameter sweep (scan.csv)"),
    "run": (cmd_run, "every output listed in the scenario"),
}


def _values(text):
    if not text.strip():
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="tdecoherence", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--delta-x-m", type=float, help="override branch separation [m]")
        p.add_argument("--t-final-s", type=float, help="override final time [s]")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        if name == "scan":
            p.add_argument("--param", required=True, choices=sc.SCAN_PARAMETERS)
            p.add_argument("--values", required=True, type=_values, help="comma-separated values")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        s = _load(args)
        if args.command == "scan":
            summary, files = func(s, args.param, args.values)
        else:
            summary, files = func(s)
        sc.write_atomic(args.out, files)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    print(json.dumps(json.loads(sc.dumps_json(summary)), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
